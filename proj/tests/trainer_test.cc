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
#include <sstream>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "orthospot/base/error.h"
#include "orthospot/dataset/corpus.h"
#include "orthospot/dataset/sampler.h"
#include "orthospot/frontend/feature_bank.h"
#include "orthospot/frontend/mfcc.h"
#include "orthospot/trainer/trainer.h"

namespace orthospot {
namespace {

TEST(SgdTest, SingleStepExample) {
  std::vector<double> w = {0.0}, g = {1.0}, v = {0.0};
  SgdUpdate(w, g, v, 0.01, 0.9, 0.001);
  EXPECT_NEAR(v[0], 1.0, 1e-15);
  EXPECT_NEAR(w[0], -0.01, 1e-15);
}

TEST(SgdTest, MomentumAccumulates) {
  std::vector<double> w = {0.0}, g = {1.0}, v = {0.0};
  SgdUpdate(w, g, v, 0.01, 0.9, 0.0);
  SgdUpdate(w, g, v, 0.01, 0.9, 0.0);
  EXPECT_NEAR(v[0], 1.9, 1e-15);
  EXPECT_NEAR(w[0], -0.01 - 0.019, 1e-15);
}

TEST(SgdTest, ZeroGradientAndWeightIsFixedPoint) {
  std::vector<double> w = {0.0, 0.0}, g = {0.0, 0.0}, v = {0.0, 0.0};
  for (int i = 0; i < 10; ++i) SgdUpdate(w, g, v, 0.01, 0.9, 0.001);
  EXPECT_EQ(w[0], 0.0);
  EXPECT_EQ(v[1], 0.0);
}

TEST(SgdTest, WeightDecayAloneShrinksTowardZero) {
  std::vector<double> w = {2.0, -3.0}, g = {0.0, 0.0}, v = {0.0, 0.0};
  SgdUpdate(w, g, v, 0.1, 0.0, 0.5);
  EXPECT_NEAR(w[0], 2.0 * (1 - 0.05), 1e-15);
  EXPECT_NEAR(w[1], -3.0 * (1 - 0.05), 1e-15);
}

TEST(SgdTest, StepRejectsNonFiniteGradient) {
  ModelConfig mc;
  mc.input_dim = 3;
  mc.tconv_channels = 2;
  mc.hidden = 2;
  mc.gru_layers = 1;
  mc.num_keywords = 2;
  mc.num_speakers = 2;
  TrainConfig tc;
  TrainState state = MakeTrainState(InitParams(mc, 0), tc);
  EXPECT_EQ(state.lr, tc.lr_init);
  ASSERT_EQ(state.velocity.size(), state.params.Named().size());
  state.params.ZeroGrad();
  state.params.head_sv_b.grad()[1] = NAN;
  try {
    SgdStep(&state, tc);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("head_sv.bias"), std::string::npos) << e.what();
  }
}

TEST(SchedulerTest, FlatSequenceDecaysEveryPatienceAndStops) {
  PlateauScheduler s(0.01, 2.0, 3, 10);
  EXPECT_TRUE(s.Observe(0.4).improved);
  std::vector<std::size_t> decays;
  std::size_t stop_at = 0;
  for (std::size_t k = 1; k <= 12; ++k) {
    auto d = s.Observe(0.4);  // equal is not an improvement
    EXPECT_FALSE(d.improved);
    if (d.decayed) decays.push_back(k);
    if (d.stop) {
      stop_at = k;
      break;
    }
  }
  EXPECT_EQ(decays, (std::vector<std::size_t>{3, 6, 9}));
  EXPECT_EQ(stop_at, 10u);
  EXPECT_DOUBLE_EQ(s.lr(), 0.01 / 8);
  EXPECT_EQ(s.num_decays(), 3u);
}

TEST(SchedulerTest, StrictlyImprovingNeverDecays) {
  PlateauScheduler s(0.01, 2.0, 3, 10);
  for (int k = 0; k < 50; ++k) {
    auto d = s.Observe(1.0 - 0.01 * k);
    EXPECT_TRUE(d.improved);
    EXPECT_FALSE(d.decayed);
    EXPECT_FALSE(d.stop);
  }
  EXPECT_EQ(s.lr(), 0.01);
}

TEST(SchedulerTest, ImprovementResetsTheCounter) {
  PlateauScheduler s(1.0, 2.0, 3, 10);
  s.Observe(0.5);
  s.Observe(0.6);
  s.Observe(0.6);
  EXPECT_TRUE(s.Observe(0.4).improved);
  EXPECT_EQ(s.since_improve(), 0u);
  s.Observe(0.45);
  s.Observe(0.45);
  EXPECT_TRUE(s.Observe(0.45).decayed);
  EXPECT_EQ(s.lr(), 0.5);
}

TEST(SchedulerTest, StopPatienceOne) {
  PlateauScheduler s(0.01, 2.0, 3, 1);
  s.Observe(0.3);
  EXPECT_TRUE(s.Observe(0.3).stop);
}

TEST(SchedulerTest, LearningRateIsAlwaysInitOverPowerOfFactor) {
  Rng rng = MakeRng(61, "sched");
  for (int run = 0; run < 50; ++run) {
    PlateauScheduler s(0.01, 2.0, 1 + UniformIndex(&rng, 4), 100);
    for (int k = 0; k < 40; ++k) {
      s.Observe(UniformUnit(&rng));
      EXPECT_EQ(s.lr(), 0.01 / std::pow(2.0, static_cast<double>(s.num_decays())));
    }
  }
}

TEST(TrainConfigTest, ValidateRejectsBadValues) {
  TrainConfig ok;
  EXPECT_NO_THROW(ok.Validate());
  auto bad = [](auto mutate) {
    TrainConfig c;
    mutate(&c);
    return c;
  };
  EXPECT_THROW(bad([](TrainConfig* c) { c->batch_size = 0; }).Validate(), ConfigError);
  EXPECT_THROW(bad([](TrainConfig* c) { c->lr_init = -1; }).Validate(), ConfigError);
  EXPECT_THROW(bad([](TrainConfig* c) { c->lr_decay_factor = 0.5; }).Validate(), ConfigError);
  EXPECT_THROW(bad([](TrainConfig* c) { c->plateau_patience = 0; }).Validate(), ConfigError);
  EXPECT_THROW(bad([](TrainConfig* c) { c->micro_batch = 0; }).Validate(), ConfigError);
}

class TinyTrainingTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    SyntheticOptions opts;
    opts.num_keywords = 3;
    opts.num_speakers = 14;
    opts.clips_per_pair = 3;
    opts.seed = 9;
    split_ = new CorpusSplit(MakeSynthetic(opts));
    MfccExtractor extractor;
    bank_ = new FeatureBank(*split_, extractor);
  }
  static void TearDownTestSuite() {
    delete bank_;
    delete split_;
  }
  static ModelConfig Model() {
    ModelConfig mc;
    mc.tconv_channels = 4;
    mc.hidden = 6;
    mc.gru_layers = 2;
    return mc;
  }
  static TrainConfig Train() {
    TrainConfig tc;
    tc.batch_size = 32;
    tc.micro_batch = 16;
    tc.max_epochs = 2;
    tc.seed = 4;
    tc.check_grad_coverage = true;
    return tc;
  }
  static CorpusSplit* split_;
  static FeatureBank* bank_;
};

CorpusSplit* TinyTrainingTest::split_ = nullptr;
FeatureBank* TinyTrainingTest::bank_ = nullptr;

std::string ReadFile(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST_F(TinyTrainingTest, SameSeedGivesIdenticalMetrics) {
  auto dir = std::filesystem::temp_directory_path() / "orthospot_trainer_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir / "a");
  std::filesystem::create_directories(dir / "b");
  FitResult a = Fit(Train(), Model(), *split_, *bank_, (dir / "a").string());
  FitResult b = Fit(Train(), Model(), *split_, *bank_, (dir / "b").string());
  ASSERT_EQ(a.history.size(), 2u);
  std::string csv_a = ReadFile(dir / "a" / "metrics.csv");
  EXPECT_EQ(csv_a, ReadFile(dir / "b" / "metrics.csv"));
  EXPECT_EQ(csv_a.substr(0, csv_a.find('\n')), MetricsCsvHeader());
  EXPECT_TRUE(std::filesystem::exists(dir / "a" / "best.ckpt"));
  EXPECT_TRUE(std::filesystem::exists(dir / "a" / "last.ckpt"));
  for (const auto& m : a.history) {
    EXPECT_TRUE(std::isfinite(m.loss.total));
    EXPECT_GT(m.loss.l_orth, 0.0);
    EXPECT_NEAR(m.loss.total,
                m.loss.l_ckws + m.loss.l_tkws + m.loss.l_csv + m.loss.l_tsv + m.loss.l_orth,
                1e-9);
    EXPECT_EQ(m.steps, (split_->train.size() + 31) / 32);
  }
  std::filesystem::remove_all(dir);
}

TEST_F(TinyTrainingTest, DifferentSeedChangesTheRun) {
  TrainConfig other = Train();
  other.seed = 5;
  FitResult a = Fit(Train(), Model(), *split_, *bank_);
  FitResult b = Fit(other, Model(), *split_, *bank_);
  EXPECT_NE(a.history[0].loss.total, b.history[0].loss.total);
}

TEST_F(TinyTrainingTest, TwoScenarioModeTrainsWithoutTheMiddleSlots) {
  TrainConfig tc = Train();
  tc.scenario_mode = ScenarioMode::kTwo;
  tc.max_epochs = 1;
  FitResult r = Fit(tc, Model(), *split_, *bank_);
  ASSERT_EQ(r.history.size(), 1u);
  EXPECT_TRUE(std::isfinite(r.history[0].loss.total));
  EXPECT_GT(r.history[0].loss.l_tsv + r.history[0].loss.l_tkws, 0.0);
}

TEST_F(TinyTrainingTest, WithoutPenaltyTotalExcludesOrthTerm) {
  TrainConfig tc = Train();
  tc.lambda_orth = 0.0;
  tc.max_epochs = 1;
  FitResult r = Fit(tc, Model(), *split_, *bank_);
  const auto& m = r.history[0];
  EXPECT_GT(m.loss.l_orth, 0.0);
  EXPECT_NEAR(m.loss.total, m.loss.l_ckws + m.loss.l_tkws + m.loss.l_csv + m.loss.l_tsv,
              1e-9);
}

TEST_F(TinyTrainingTest, EpochUpdatesEveryParameter) {
  TrainConfig tc = Train();
  TrainingData data;
  data.split = split_;
  data.bank = bank_;
  data.classes = BuildClassMap(*split_);
  QuadrupletSampler sampler(*split_);
  data.sampler = &sampler;
  ModelConfig mc = ResolveModelConfig(Model(), data.classes);
  TrainState state = MakeTrainState(InitParams(mc, 1), tc);
  ModelParams before = state.params.Clone();
  Rng shuffle = MakeRng(1, "shuffle"), samp = MakeRng(1, "sampler");
  EpochMetrics m = RunEpoch(&state, data, tc, &shuffle, &samp);
  EXPECT_EQ(state.epoch, 1u);
  EXPECT_EQ(m.steps, state.step);
  auto old = before.Named();
  auto now = state.params.Named();
  for (std::size_t i = 0; i < now.size(); ++i) {
    bool changed = false;
    auto a = old[i].second.data(), b = now[i].second.data();
    for (std::size_t k = 0; k < a.size(); ++k) changed |= a[k] != b[k];
    EXPECT_TRUE(changed) << now[i].first;
  }
}

}  // namespace
}  // namespace orthospot
