// Copyright (c) 2026 OrthoSpot Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "orthospot/base/error.h"
#include "orthospot/base/rng.h"
#include "orthospot/dataset/corpus.h"
#include "orthospot/evaluator/evaluator.h"
#include "orthospot/frontend/feature_bank.h"
#include "orthospot/frontend/mfcc.h"
#include "orthospot/model/model.h"
#include "orthospot/trainer/trainer.h"

namespace orthospot {
namespace {

TEST(CosineScoreTest, Examples) {
  std::vector<double> a = {1, 0}, b = {0, 1}, c = {2, 0}, d = {-3, 0};
  EXPECT_EQ(CosineScore(a, b), 0.0);
  EXPECT_EQ(CosineScore(a, c), 1.0);
  EXPECT_EQ(CosineScore(a, d), -1.0);
  std::vector<double> e = {1, 1};
  EXPECT_NEAR(CosineScore(a, e), 1.0 / std::sqrt(2.0), 1e-15);
}

TEST(CosineScoreTest, ZeroVectorScoresZeroAndIsCounted) {
  std::vector<double> a = {1, 2, 3}, z = {0, 0, 0};
  std::size_t degenerate = 0;
  EXPECT_EQ(CosineScore(a, z, &degenerate), 0.0);
  EXPECT_EQ(CosineScore(z, z, &degenerate), 0.0);
  EXPECT_EQ(degenerate, 2u);
}

TEST(CosineScoreTest, BoundedAndSymmetric) {
  Rng rng = MakeRng(51, "cos");
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> a(5), b(5);
    for (double& v : a) v = Uniform(&rng, -10, 10);
    for (double& v : b) v = Uniform(&rng, -10, 10);
    double s = CosineScore(a, b);
    EXPECT_LE(std::abs(s), 1.0);
    EXPECT_EQ(s, CosineScore(b, a));
  }
}

TEST(TrialsTest, FourUtterancesGiveSixPairs) {
  std::vector<int> labels = {0, 0, 1, 1};
  TrialSet trials = BuildTrials(labels);
  ASSERT_EQ(trials.pairs.size(), 6u);
  std::size_t targets = 0;
  for (std::size_t k = 0; k < 6; ++k) {
    auto [i, j] = trials.pairs[k];
    EXPECT_LT(i, j);
    EXPECT_EQ(trials.targets[k], labels[i] == labels[j]);
    targets += trials.targets[k];
  }
  EXPECT_EQ(targets, 2u);
}

TEST(TrialsTest, DegenerateLabelSetsThrow) {
  std::vector<int> same = {3, 3, 3};
  std::vector<int> distinct = {0, 1, 2};
  std::vector<int> single = {0};
  EXPECT_THROW(BuildTrials(same), DataError);
  EXPECT_THROW(BuildTrials(distinct), DataError);
  EXPECT_THROW(BuildTrials(single), DataError);
}

TEST(EerTest, PerfectSeparationIsZero) {
  std::vector<double> scores = {0.9, 0.8, 0.1, 0.2};
  std::vector<uint8_t> targets = {1, 1, 0, 0};
  EXPECT_EQ(ComputeEer(scores, targets), 0.0);
}

TEST(EerTest, ConstantScoresGiveHalf) {
  std::vector<double> scores(10, 0.3);
  std::vector<uint8_t> targets = {1, 0, 1, 0, 0, 1, 0, 0, 1, 0};
  EXPECT_NEAR(ComputeEer(scores, targets), 0.5, 1e-15);
}

TEST(EerTest, InvertedScoresGiveOne) {
  std::vector<double> scores = {0.1, 0.2, 0.8, 0.9};
  std::vector<uint8_t> targets = {1, 1, 0, 0};
  EXPECT_NEAR(ComputeEer(scores, targets), 1.0, 1e-15);
}

TEST(EerTest, SingleClassThrows) {
  std::vector<double> scores = {0.1, 0.2};
  std::vector<uint8_t> ones = {1, 1}, zeros = {0, 0};
  EXPECT_THROW(ComputeEer(scores, ones), DataError);
  EXPECT_THROW(ComputeEer(scores, zeros), DataError);
}

// Quadratic reference: evaluate every threshold by counting from scratch.
double BruteForceEer(const std::vector<double>& scores, const std::vector<uint8_t>& targets) {
  std::set<double> unique(scores.begin(), scores.end());
  std::vector<double> thresholds(unique.begin(), unique.end());
  thresholds.push_back(INFINITY);
  double n_t = 0, n_n = 0;
  for (uint8_t t : targets) (t ? n_t : n_n) += 1;
  double prev_far = 0, prev_frr = 0;
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    double fa = 0, fr = 0;
    for (std::size_t k = 0; k < scores.size(); ++k) {
      if (!targets[k] && scores[k] >= thresholds[i]) fa += 1;
      if (targets[k] && scores[k] < thresholds[i]) fr += 1;
    }
    double far = fa / n_n, frr = fr / n_t;
    if (far - frr <= 0) {
      if (i == 0 || far == frr) return far;
      double d0 = prev_far - prev_frr, d1 = far - frr;
      return prev_far + d0 / (d0 - d1) * (far - prev_far);
    }
    prev_far = far;
    prev_frr = frr;
  }
  return NAN;
}

TEST(EerTest, MatchesBruteForceWithTies) {
  Rng rng = MakeRng(52, "eer");
  for (int set = 0; set < 1000; ++set) {
    std::size_t n = 2 + UniformIndex(&rng, 60);
    std::vector<double> scores(n);
    std::vector<uint8_t> targets(n);
    // Coarse grid so ties are common.
    int levels = 1 + static_cast<int>(UniformIndex(&rng, 12));
    double shift = Uniform(&rng, -0.5, 0.5);
    for (std::size_t k = 0; k < n; ++k) {
      targets[k] = UniformUnit(&rng) < 0.4;
      double level = static_cast<double>(UniformIndex(&rng, levels)) / levels;
      scores[k] = level + (targets[k] ? shift : 0.0);
    }
    targets[0] = 1;
    targets[1] = 0;
    double got = ComputeEer(scores, targets);
    EXPECT_NEAR(got, BruteForceEer(scores, targets), 1e-9) << "set " << set;
    EXPECT_GE(got, 0.0);
    EXPECT_LE(got, 1.0);
  }
}

TEST(EerTest, InvariantUnderMonotoneTransform) {
  Rng rng = MakeRng(53, "eer-mono");
  for (int set = 0; set < 200; ++set) {
    std::size_t n = 4 + UniformIndex(&rng, 100);
    std::vector<double> scores(n), mapped(n);
    std::vector<uint8_t> targets(n);
    for (std::size_t k = 0; k < n; ++k) {
      targets[k] = k % 3 == 0;
      scores[k] = Uniform(&rng, -1, 1) + (targets[k] ? 0.3 : 0.0);
      mapped[k] = std::exp(3.0 * scores[k]) + 7.0;
    }
    EXPECT_NEAR(ComputeEer(scores, targets), ComputeEer(mapped, targets), 1e-12);
  }
}

TEST(EerTest, RandomLabelsGiveAboutHalf) {
  Rng rng = MakeRng(54, "eer-random");
  std::vector<double> scores(10000);
  std::vector<uint8_t> targets(10000);
  for (std::size_t k = 0; k < scores.size(); ++k) {
    scores[k] = UniformUnit(&rng);
    targets[k] = UniformUnit(&rng) < 0.5;
  }
  EXPECT_NEAR(ComputeEer(scores, targets), 0.5, 0.05);
}

class EvaluateTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    SyntheticOptions opts;
    opts.num_keywords = 3;
    opts.num_speakers = 14;
    opts.clips_per_pair = 4;
    opts.seed = 5;
    split_ = new CorpusSplit(MakeSynthetic(opts));
    MfccExtractor extractor;
    bank_ = new FeatureBank(*split_, extractor);
    ModelConfig config;
    config.tconv_channels = 4;
    config.hidden = 6;
    config.gru_layers = 1;
    config = ResolveModelConfig(config, BuildClassMap(*split_));
    params_ = new ModelParams(InitParams(config, 3));
  }
  static void TearDownTestSuite() {
    delete params_;
    delete bank_;
    delete split_;
  }
  static CorpusSplit* split_;
  static FeatureBank* bank_;
  static ModelParams* params_;
};

CorpusSplit* EvaluateTest::split_ = nullptr;
FeatureBank* EvaluateTest::bank_ = nullptr;
ModelParams* EvaluateTest::params_ = nullptr;

TEST_F(EvaluateTest, EmbeddingsHaveModelWidthAndAreFinite) {
  const auto& clips = split_->test;
  Embeddings emb = ExtractEmbeddings(*params_, *bank_, clips, 5);
  EXPECT_EQ(emb.count, clips.size());
  EXPECT_EQ(emb.dim, 6u);
  ASSERT_EQ(emb.kws.size(), clips.size() * 6);
  ASSERT_EQ(emb.sv.size(), clips.size() * 6);
  for (std::size_t i = 0; i < emb.count; ++i) {
    double norm_k = 0, norm_s = 0;
    for (double v : emb.row(Task::kKws, i)) {
      ASSERT_TRUE(std::isfinite(v));
      norm_k += v * v;
    }
    for (double v : emb.row(Task::kSv, i)) {
      ASSERT_TRUE(std::isfinite(v));
      norm_s += v * v;
    }
    EXPECT_GT(norm_k, 0.0);
    EXPECT_GT(norm_s, 0.0);
  }
  // Batch size must not change the result.
  Embeddings one = ExtractEmbeddings(*params_, *bank_, clips, 64);
  for (std::size_t k = 0; k < emb.kws.size(); ++k) {
    EXPECT_NEAR(emb.kws[k], one.kws[k], 1e-12);
  }
}

TEST_F(EvaluateTest, TrialCountsMatchEnumeration) {
  const auto& clips = split_->test;
  ASSERT_EQ(clips.size(), 24u);  // 2 speakers x 3 words x 4 clips
  EvalReport report = Evaluate(*params_, *split_, *bank_, clips);
  EXPECT_EQ(report.num_clips, 24u);
  EXPECT_EQ(report.kws.trials, 276u);
  EXPECT_EQ(report.sv.trials, 276u);
  std::size_t kws_targets = 0, sv_targets = 0;
  for (std::size_t i = 0; i < clips.size(); ++i) {
    for (std::size_t j = i + 1; j < clips.size(); ++j) {
      const ClipInfo& a = split_->clips[clips[i]];
      const ClipInfo& b = split_->clips[clips[j]];
      kws_targets += a.keyword_id == b.keyword_id;
      sv_targets += a.speaker_id == b.speaker_id;
    }
  }
  EXPECT_EQ(kws_targets, 84u);   // 3 * C(8, 2)
  EXPECT_EQ(sv_targets, 132u);   // 2 * C(12, 2)
  EXPECT_EQ(report.kws.targets, kws_targets);
  EXPECT_EQ(report.sv.targets, sv_targets);
  EXPECT_EQ(report.kws.nontargets, 276u - kws_targets);
  for (double eer : {report.kws.eer, report.sv.eer}) {
    EXPECT_GE(eer, 0.0);
    EXPECT_LE(eer, 1.0);
  }
  EXPECT_EQ(report.degenerate, 0u);
}

TEST_F(EvaluateTest, SubsetIsEvenlySpacedAndDeterministic) {
  EvalReport a = Evaluate(*params_, *split_, *bank_, split_->test, 10);
  EvalReport b = Evaluate(*params_, *split_, *bank_, split_->test, 10);
  EXPECT_EQ(a.num_clips, 10u);
  EXPECT_EQ(a.kws.trials, 45u);
  EXPECT_EQ(a.kws.eer, b.kws.eer);
  EXPECT_EQ(a.sv.eer, b.sv.eer);
}

TEST_F(EvaluateTest, ReportHasEveryKey) {
  EvalReport report = Evaluate(*params_, *split_, *bank_, split_->test);
  auto path = std::filesystem::temp_directory_path() / "orthospot_eval_report.txt";
  WriteEvalReport(report, path.string());
  std::ifstream in(path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    auto eq = line.find('=');
    ASSERT_NE(eq, std::string::npos) << line;
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  for (const char* key : {"num_clips", "eer_kws", "trials_kws", "targets_kws", "eer_sv",
                          "trials_sv", "targets_sv", "degenerate_embeddings"}) {
    EXPECT_TRUE(kv.count(key)) << key;
  }
  EXPECT_EQ(kv["num_clips"], "24");
  EXPECT_EQ(std::stod(kv["eer_kws"]), report.kws.eer);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace orthospot
