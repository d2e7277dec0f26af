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

// Command-line entry point: train, eval, gradcheck, make-synthetic, splits,
// extract-features. Exit codes: 0 ok, 1 usage, 2 config, 3 data,
// 4 checkpoint, 5 numeric failure.

#include <iostream>
#include <string>
#include <vector>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "CLI11.hpp"
#include "orthospot/base/error.h"
#include "orthospot/cli/commands.h"

namespace {

struct ConfigArgs {
  std::string path;
  std::vector<std::string> overrides;

  void Attach(CLI::App* cmd) {
    cmd->add_option("-c,--config", path, "key = value config file");
    cmd->add_option("--set", overrides, "override, key=value (repeatable)");
  }

  orthospot::RunConfig Resolve() const {
    orthospot::RunConfig config;
    if (!path.empty()) orthospot::LoadConfigFile(path, &config);
    for (const auto& kv : overrides) orthospot::ApplyOverride(kv, &config);
    return config;
  }
};

}  // namespace

int main(int argc, char** argv) {
  using namespace orthospot;
#if defined(__GLIBC__)
  // Training allocates and frees large activation buffers every step; keep
  // them on the heap instead of paying for fresh mmap pages each time.
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
  CLI::App app{"Joint keyword spotting and speaker verification trainer"};
  app.require_subcommand(1);

  ConfigArgs train_args;
  auto* train = app.add_subcommand("train", "train a model and score the test split");
  train_args.Attach(train);

  ConfigArgs eval_args;
  std::string checkpoint, part_name = "test", report_path, trials_prefix;
  auto* eval = app.add_subcommand("eval", "score a split with a checkpoint");
  eval_args.Attach(eval);
  eval->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
  eval->add_option("--split", part_name, "train | validation | test");
  eval->add_option("--report", report_path, "write key=value report here");
  eval->add_option("--trials", trials_prefix, "write <prefix>.{kws,sv}.tsv trial dumps");

  GradcheckSuiteOptions gc;
  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient checks");
  gradcheck->add_option("--seed", gc.seed);
  gradcheck->add_option("--trials", gc.trials, "random draws per case");
  gradcheck->add_option("--tolerance", gc.tolerance);
  gradcheck->add_flag("--inject-fault", gc.inject_fault,
                      "add a case with a wrong backward pass (must fail)");

  ConfigArgs synth_args;
  std::string synth_out = "synthetic";
  bool write_audio = false;
  auto* synth = app.add_subcommand("make-synthetic", "generate the synthetic corpus");
  synth_args.Attach(synth);
  synth->add_option("-o,--out", synth_out, "output directory");
  synth->add_flag("--audio", write_audio, "also write WAV files in GSCD layout");

  ConfigArgs split_args;
  std::string manifest;
  auto* splits = app.add_subcommand("splits", "build the speaker split and write a manifest");
  split_args.Attach(splits);
  splits->add_option("-o,--manifest", manifest, "manifest path");

  ConfigArgs feat_args;
  std::string wav_path, feat_out;
  auto* feats = app.add_subcommand("extract-features", "MFCC dump of one WAV file");
  feat_args.Attach(feats);
  feats->add_option("wav", wav_path)->required();
  feats->add_option("out", feat_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ExitCode::kUsage);
  }

  return RunWithExitCode(
      [&]() -> int {
        if (*train) {
          CommandTrain(train_args.Resolve(), std::cout);
        } else if (*eval) {
          SplitPart part;
          if (part_name == "train") {
            part = SplitPart::kTrain;
          } else if (part_name == "validation") {
            part = SplitPart::kValidation;
          } else if (part_name == "test") {
            part = SplitPart::kTest;
          } else {
            throw ConfigError("unknown split '" + part_name + "'");
          }
          CommandEval(eval_args.Resolve(), checkpoint, part, report_path, trials_prefix,
                      std::cout);
        } else if (*gradcheck) {
          if (!CommandGradcheck(gc, std::cout)) return static_cast<int>(ExitCode::kNumeric);
        } else if (*synth) {
          CommandMakeSynthetic(synth_args.Resolve(), synth_out, write_audio, std::cout);
        } else if (*splits) {
          CommandSplits(split_args.Resolve(), manifest, std::cout);
        } else if (*feats) {
          CommandExtractFeatures(feat_args.Resolve(), wav_path, feat_out, std::cout);
        }
        return 0;
      },
      std::cerr);
}
