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

#ifndef ORTHOSPOT_CLI_COMMANDS_H_
#define ORTHOSPOT_CLI_COMMANDS_H_

#include <functional>
#include <iosfwd>
#include <string>

#include "orthospot/cli/gradcheck_suite.h"
#include "orthospot/cli/run_config.h"
#include "orthospot/dataset/corpus.h"
#include "orthospot/evaluator/evaluator.h"
#include "orthospot/trainer/trainer.h"

namespace orthospot {

constexpr const char* kDataEnvVar = "ORTHOSPOT_DATA";

// data_root, else $ORTHOSPOT_DATA; throws DataError when neither is set.
std::string ResolveDataRoot(const RunConfig& config);

// Synthetic corpus or scanned GSCD tree, split per the config.
CorpusSplit LoadCorpus(const RunConfig& config, std::ostream* log);

struct TrainSummary {
  FitResult fit;
  EvalReport test;  // best checkpoint on the test split
};

// Writes config.txt, split.tsv, metrics.csv, best.ckpt, last.ckpt and
// test_eval.txt under config.out_dir.
TrainSummary CommandTrain(const RunConfig& config, std::ostream& log);

// Scores `part` with a checkpoint. report_path / trials_prefix may be empty.
EvalReport CommandEval(const RunConfig& config, const std::string& checkpoint,
                       SplitPart part, const std::string& report_path,
                       const std::string& trials_prefix, std::ostream& log);

bool CommandGradcheck(const GradcheckSuiteOptions& options, std::ostream& log);

// manifest.tsv, and with write_audio a GSCD-style tree of WAV files.
void CommandMakeSynthetic(const RunConfig& config, const std::string& out_dir,
                          bool write_audio, std::ostream& log);

void CommandSplits(const RunConfig& config, const std::string& manifest_path,
                   std::ostream& log);

void CommandExtractFeatures(const RunConfig& config, const std::string& wav_path,
                            const std::string& out_path, std::ostream& log);

// Runs body and maps orthospot::Error to its exit code; other exceptions
// exit 1. The message goes to err.
int RunWithExitCode(const std::function<int()>& body, std::ostream& err);

}  // namespace orthospot

#endif  // ORTHOSPOT_CLI_COMMANDS_H_
