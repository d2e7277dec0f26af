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

// Acceptance checks. Prints one PASS / FAIL / SKIP line per criterion and
// exits non-zero when any criterion fails.
//
//   acceptance [--work DIR] [--only 1,2,...] [--epochs N]
//
// Criteria 4-6 train three models on the default synthetic corpus and take
// most of the runtime. Their run directories are kept under --work.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "CLI11.hpp"
#include "orthospot/base/error.h"
#include "orthospot/base/rng.h"
#include "orthospot/cli/commands.h"
#include "orthospot/cli/gradcheck_suite.h"
#include "orthospot/dataset/corpus.h"
#include "orthospot/evaluator/evaluator.h"
#include "orthospot/frontend/feature_bank.h"
#include "orthospot/model/gru.h"
#include "orthospot/trainer/trainer.h"

namespace orthospot {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

// Pinned tolerances.
constexpr double kGradTolerance = 1e-4;
constexpr double kGradSeconds = 120.0;
constexpr double kEerOracleTolerance = 1e-9;
constexpr double kRandomEerBand = 0.05;
constexpr double kGruOracleTolerance = 1e-12;
constexpr double kSyntheticEerCeiling = 0.20;
constexpr double kSyntheticTrainSeconds = 15 * 60.0;
constexpr double kDecouplingRatio = 5.0;

// Desk-scale model for the synthetic runs; every optimizer and loss
// setting keeps its default.
constexpr std::size_t kAcceptanceHidden = 64;
constexpr std::size_t kAcceptanceChannels = 32;
constexpr std::size_t kAcceptanceMicroBatch = 256;

int failures = 0;

void Report(int id, bool passed, const std::string& detail) {
  if (!passed) ++failures;
  std::printf("%s %d %s\n", passed ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
}

void Skip(int id, const std::string& detail) {
  std::printf("SKIP %d %s\n", id, detail.c_str());
  std::fflush(stdout);
}

std::string Fmt(const char* format, double a = 0, double b = 0, double c = 0,
                double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), format, a, b, c, d);
  return buf;
}

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

void CheckGradients() {
  auto start = Clock::now();
  GradcheckSuiteOptions options;
  options.tolerance = kGradTolerance;
  std::ostringstream log;
  GradcheckReport report = RunGradcheckSuite(options, &log);
  double worst = 0.0;
  std::string worst_case;
  for (const auto& c : report.cases) {
    if (c.result.max_rel_error >= worst) {
      worst = c.result.max_rel_error;
      worst_case = c.name;
    }
  }
  double seconds = Seconds(start);
  bool ok = report.all_passed() && seconds < kGradSeconds;
  if (!ok) std::cerr << log.str();
  Report(1, ok,
         "gradcheck: " + std::to_string(report.cases.size()) + " cases, worst rel err " +
             Fmt("%.3g", worst) + " (" + worst_case + "), " + Fmt("%.1f s", seconds));
}

double BruteForceEer(const std::vector<double>& scores, const std::vector<uint8_t>& targets) {
  std::set<double> unique(scores.begin(), scores.end());
  std::vector<double> thresholds(unique.begin(), unique.end());
  thresholds.push_back(INFINITY);
  double n_t = 0, n_n = 0;
  for (uint8_t t : targets) (t ? n_t : n_n) += 1;
  double prev_far = 1, prev_frr = 0;
  for (double th : thresholds) {
    double fa = 0, fr = 0;
    for (std::size_t k = 0; k < scores.size(); ++k) {
      if (!targets[k] && scores[k] >= th) fa += 1;
      if (targets[k] && scores[k] < th) fr += 1;
    }
    double far = fa / n_n, frr = fr / n_t;
    if (far - frr <= 0) {
      if (far == frr) return far;
      double d0 = prev_far - prev_frr, d1 = far - frr;
      return prev_far + d0 / (d0 - d1) * (far - prev_far);
    }
    prev_far = far;
    prev_frr = frr;
  }
  return NAN;
}

void CheckEer() {
  Rng rng = MakeRng(2, "acceptance/eer");
  double worst = 0.0;
  for (int set = 0; set < 1000; ++set) {
    std::size_t n = 2 + UniformIndex(&rng, 80);
    std::vector<double> scores(n);
    std::vector<uint8_t> targets(n);
    // Every fourth set sits on a 3-level grid so most scores tie.
    int levels = set % 4 == 0 ? 3 : 1000;
    for (std::size_t k = 0; k < n; ++k) {
      targets[k] = UniformUnit(&rng) < 0.5;
      scores[k] = std::floor(UniformUnit(&rng) * levels) / levels +
                  (targets[k] ? Uniform(&rng, 0.0, 0.3) : 0.0);
    }
    targets[0] = 1;
    targets[1] = 0;
    worst = std::max(worst, std::abs(ComputeEer(scores, targets) - BruteForceEer(scores, targets)));
  }
  std::vector<double> sep = {0.9, 0.8, 0.7, 0.1, 0.2};
  std::vector<uint8_t> sep_t = {1, 1, 1, 0, 0};
  double perfect = ComputeEer(sep, sep_t);
  std::vector<double> scores(10000);
  std::vector<uint8_t> targets(10000);
  for (std::size_t k = 0; k < scores.size(); ++k) {
    scores[k] = UniformUnit(&rng);
    targets[k] = UniformUnit(&rng) < 0.5;
  }
  double chance = ComputeEer(scores, targets);
  bool ok = worst <= kEerOracleTolerance && perfect == 0.0 &&
            std::abs(chance - 0.5) <= kRandomEerBand;
  Report(2, ok,
         Fmt("eer: max |fast - brute| %.3g over 1000 sets, separable %.3g, random labels %.4f",
             worst, perfect, chance));
}

// Scalar reference for one GRU step of one sample.
std::vector<long double> ScalarGruStep(const GruLayerParams& p, const double* x,
                                       const std::vector<long double>& h) {
  const std::size_t in = p.input_size(), hid = p.hidden_size();
  auto affine = [&](const Tensor& w, const Tensor& b, const double* v, std::size_t n,
                    std::size_t row) {
    long double acc = b.data()[row];
    for (std::size_t k = 0; k < n; ++k) acc += w.data()[row * n + k] * v[k];
    return acc;
  };
  std::vector<double> hd(h.begin(), h.end());
  std::vector<long double> out(hid);
  for (std::size_t j = 0; j < hid; ++j) {
    long double r = 1 / (1 + std::exp(-(affine(p.w_ir, p.b_ir, x, in, j) +
                                        affine(p.w_hr, p.b_hr, hd.data(), hid, j))));
    long double z = 1 / (1 + std::exp(-(affine(p.w_iz, p.b_iz, x, in, j) +
                                        affine(p.w_hz, p.b_hz, hd.data(), hid, j))));
    long double n = std::tanh(affine(p.w_in, p.b_in, x, in, j) +
                              r * affine(p.w_hn, p.b_hn, hd.data(), hid, j));
    out[j] = (1 - z) * n + z * h[j];
  }
  return out;
}

void CheckGru() {
  Rng rng = MakeRng(3, "acceptance/gru");
  double worst = 0.0;
  for (int config = 0; config < 100; ++config) {
    std::size_t in = 1 + UniformIndex(&rng, 12), hid = 1 + UniformIndex(&rng, 12);
    std::size_t batch = 1 + UniformIndex(&rng, 4);
    GruLayerParams p = GruLayerParams::Zeros(in, hid, false);
    for (Tensor t : p.weights()) for (double& v : t.data()) v = Uniform(&rng, -1.5, 1.5);
    for (Tensor t : p.biases()) for (double& v : t.data()) v = Uniform(&rng, -1, 1);
    Tensor x = Tensor::Zeros({batch, in}), h = Tensor::Zeros({batch, hid});
    for (double& v : x.data()) v = Uniform(&rng, -2, 2);
    for (double& v : h.data()) v = Uniform(&rng, -1, 1);
    Tape tape(false);
    Tensor got = GruStep(&tape, p, x, h);
    for (std::size_t b = 0; b < batch; ++b) {
      std::vector<long double> hb(hid);
      for (std::size_t j = 0; j < hid; ++j) hb[j] = h.data()[b * hid + j];
      auto want = ScalarGruStep(p, &x.data()[b * in], hb);
      for (std::size_t j = 0; j < hid; ++j) {
        worst = std::max(worst, static_cast<double>(std::abs(got.data()[b * hid + j] - want[j])));
      }
    }
  }
  Report(3, worst < kGruOracleTolerance,
         Fmt("gru step: max |vectorized - scalar| %.3g over 100 configs", worst));
}

struct SyntheticRun {
  std::string name;
  FitResult fit;
  EvalReport test;
  double seconds = 0.0;
};

TrainConfig AcceptanceTrainConfig(std::size_t epochs) {
  TrainConfig tc;
  tc.max_epochs = epochs;
  tc.micro_batch = kAcceptanceMicroBatch;
  return tc;
}

ModelConfig AcceptanceModelConfig() {
  ModelConfig mc;
  mc.hidden = kAcceptanceHidden;
  mc.tconv_channels = kAcceptanceChannels;
  return mc;
}

SyntheticRun Train(const std::string& name, const TrainConfig& tc, const CorpusSplit& split,
                   const FeatureBank& bank, const fs::path& work) {
  SyntheticRun run;
  run.name = name;
  fs::path dir = work / name;
  fs::create_directories(dir);
  std::ofstream log(dir / "train.log");
  std::cerr << "training " << name << " (log in " << (dir / "train.log").string() << ")\n";
  auto start = Clock::now();
  run.fit = Fit(tc, AcceptanceModelConfig(), split, bank, dir.string(), &log);
  run.seconds = Seconds(start);
  run.test = Evaluate(run.fit.best_params, split, bank, split.test);
  WriteEvalReport(run.test, (dir / "test_eval.txt").string());
  std::cerr << Fmt("  %.0f s, best epoch %.0f of %.0f, test eer kws %.4f",
                   run.seconds, static_cast<double>(run.fit.best_epoch),
                   static_cast<double>(run.fit.history.size()), run.test.kws.eer)
            << Fmt(" sv %.4f\n", run.test.sv.eer);
  return run;
}

void CheckSynthetic(const std::set<int>& wanted, const fs::path& work, std::size_t epochs) {
  CorpusSplit split = MakeSynthetic({.num_keywords = 8, .num_speakers = 20,
                                     .clips_per_pair = 10, .seed = 0});
  MfccExtractor extractor;
  FeatureBank bank(split, extractor);

  ModelConfig untrained_config =
      ResolveModelConfig(AcceptanceModelConfig(), BuildClassMap(split));
  EvalReport untrained = Evaluate(InitParams(untrained_config, 0), split, bank, split.test);

  TrainConfig base = AcceptanceTrainConfig(epochs);
  SyntheticRun with_orth = Train("lambda1_four", base, split, bank, work);

  if (wanted.count(4)) {
    bool ok = with_orth.test.kws.eer < kSyntheticEerCeiling &&
              with_orth.test.sv.eer < kSyntheticEerCeiling &&
              with_orth.test.kws.eer < untrained.kws.eer &&
              with_orth.test.sv.eer < untrained.sv.eer &&
              with_orth.seconds < kSyntheticTrainSeconds;
    Report(4, ok,
           Fmt("synthetic: test eer kws %.4f sv %.4f (untrained %.4f / %.4f)",
               with_orth.test.kws.eer, with_orth.test.sv.eer, untrained.kws.eer,
               untrained.sv.eer) +
               Fmt(", %.0f epochs in %.0f s", static_cast<double>(with_orth.fit.history.size()),
                   with_orth.seconds));
  }
  if (!wanted.count(5) && !wanted.count(6)) return;

  TrainConfig no_orth_config = base;
  no_orth_config.lambda_orth = 0.0;
  SyntheticRun no_orth = Train("lambda0_four", no_orth_config, split, bank, work);

  if (wanted.count(5)) {
    // Compare at the last epoch both runs reached.
    std::size_t epoch = std::min(with_orth.fit.history.size(), no_orth.fit.history.size());
    double n1 = with_orth.fit.history[epoch - 1].cross_norm;
    double n0 = no_orth.fit.history[epoch - 1].cross_norm;
    Report(5, n0 >= kDecouplingRatio * n1,
           Fmt("decoupling at epoch %.0f: cross-branch norm %.4g with penalty, %.4g without "
               "(ratio %.1f)",
               static_cast<double>(epoch), n1, n0, n0 / n1));
  }
  if (!wanted.count(6)) return;

  TrainConfig two_config = base;
  two_config.scenario_mode = ScenarioMode::kTwo;
  SyntheticRun two = Train("lambda1_two", two_config, split, bank, work);

  bool orth_helps = with_orth.test.kws.eer <= no_orth.test.kws.eer &&
                    with_orth.test.sv.eer <= no_orth.test.sv.eer;
  bool four_helps = with_orth.test.kws.eer <= two.test.kws.eer &&
                    with_orth.test.sv.eer <= two.test.sv.eer;
  Report(6, orth_helps && four_helps,
         Fmt("ablation: kws/sv eer  full %.4f/%.4f  no-orth %.4f/%.4f", with_orth.test.kws.eer,
             with_orth.test.sv.eer, no_orth.test.kws.eer, no_orth.test.sv.eer) +
             Fmt("  two-scenario %.4f/%.4f", two.test.kws.eer, two.test.sv.eer));
}

void CheckGscdSplit() {
  const char* root = std::getenv(kDataEnvVar);
  if (root == nullptr || *root == '\0') {
    Skip(7, std::string("split fidelity needs the Speech Commands v2 tree in $") + kDataEnvVar);
    return;
  }
  CorpusIndex index = ScanGscd(root);
  CorpusSplit split = BuildSplit(index, 0);
  std::size_t held_out_train = 0;
  const auto& held = GscdHeldOutWords();
  for (std::size_t c : split.train) {
    const std::string& w = split.keyword_vocab[split.clips[c].keyword_id];
    held_out_train += std::find(held.begin(), held.end(), w) != held.end();
  }
  bool ok = index.utterances.size() == 105829 && index.keyword_vocab.size() == 35 &&
            split.eligible_speakers == 2277 && split.speaker_partition[0].size() == 1959 &&
            split.speaker_partition[1].size() == 159 &&
            split.speaker_partition[2].size() == 159 && held_out_train == 0;
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "split: %zu utterances, %zu words, %zu eligible speakers, %zu/%zu/%zu, "
                "%zu held-out training clips",
                index.utterances.size(), index.keyword_vocab.size(), split.eligible_speakers,
                split.speaker_partition[0].size(), split.speaker_partition[1].size(),
                split.speaker_partition[2].size(), held_out_train);
  Report(7, ok, buf);
}

std::string ReadAll(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void CheckDeterminism(const fs::path& work) {
  std::string csv[2];
  for (int i = 0; i < 2; ++i) {
    RunConfig c;
    for (const char* kv : {"synthetic_keywords=4", "synthetic_speakers=14",
                           "synthetic_clips_per_pair=4", "hidden_size=16",
                           "tconv_channels=8", "max_epochs=3", "batch_size=64", "seed=7"}) {
      ApplyOverride(kv, &c);
    }
    c.out_dir = (work / ("determinism_" + std::to_string(i))).string();
    fs::remove_all(c.out_dir);
    std::ostringstream log;
    CommandTrain(c, log);
    csv[i] = ReadAll(fs::path(c.out_dir) / "metrics.csv");
  }
  std::size_t rows = std::count(csv[0].begin(), csv[0].end(), '\n');
  Report(9, !csv[0].empty() && csv[0] == csv[1],
         "determinism: two train runs, metrics.csv " +
             std::string(csv[0] == csv[1] ? "byte-identical" : "differs") + " (" +
             std::to_string(rows) + " lines)");
}

}  // namespace
}  // namespace orthospot

int main(int argc, char** argv) {
  using namespace orthospot;
#if defined(__GLIBC__)
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
  CLI::App app{"acceptance checks"};
  std::string work = "acceptance_runs";
  std::vector<int> only;
  std::size_t epochs = 30;
  app.add_option("--work", work, "directory for training runs");
  app.add_option("--only", only, "criteria to run")->delimiter(',');
  app.add_option("--epochs", epochs, "epoch cap for the synthetic runs");
  CLI11_PARSE(app, argc, argv);
  std::set<int> wanted(only.begin(), only.end());
  if (wanted.empty()) wanted = {1, 2, 3, 4, 5, 6, 7, 8, 9};

  int code = RunWithExitCode(
      [&] {
        fs::create_directories(work);
        if (wanted.count(1)) CheckGradients();
        if (wanted.count(2)) CheckEer();
        if (wanted.count(3)) CheckGru();
        if (wanted.count(9)) CheckDeterminism(work);
        if (wanted.count(7)) CheckGscdSplit();
        if (wanted.count(8)) {
          Skip(8, "full-scale EERs are not gated; see the README for the optional recipe");
        }
        if (wanted.count(4) || wanted.count(5) || wanted.count(6)) {
          CheckSynthetic(wanted, work, epochs);
        }
        return 0;
      },
      std::cerr);
  if (code != 0) return code;
  return failures == 0 ? 0 : 1;
}
