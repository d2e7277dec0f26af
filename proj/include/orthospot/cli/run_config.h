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

#ifndef ORTHOSPOT_CLI_RUN_CONFIG_H_
#define ORTHOSPOT_CLI_RUN_CONFIG_H_

#include <string>
#include <vector>

#include "orthospot/dataset/corpus.h"
#include "orthospot/frontend/mfcc.h"
#include "orthospot/model/model.h"
#include "orthospot/trainer/trainer.h"

namespace orthospot {

enum class DatasetMode { kSynthetic, kGscd };

struct RunConfig {
  DatasetMode dataset = DatasetMode::kSynthetic;
  std::string data_root;  // gscd mode; empty falls back to $ORTHOSPOT_DATA
  SyntheticOptions synthetic;
  SplitOptions split;
  std::string out_dir = "run";
  std::size_t test_max_clips = 0;  // 0 = score every test clip
  TrainConfig train;
  ModelConfig model;  // input_dim follows features.num_ceps
  MfccOptions features;

  // Throws ConfigError.
  void Validate() const;
};

// Applies `key = value` lines to *config. Blank lines and text after '#' are
// ignored. Errors carry "<source>:<line>: ".
void ParseConfigText(const std::string& text, const std::string& source,
                     RunConfig* config);
void LoadConfigFile(const std::string& path, RunConfig* config);

// "key=value" from the command line.
void ApplyOverride(const std::string& assignment, RunConfig* config);

// Every key with its current value, parseable by ParseConfigText.
std::string ConfigText(const RunConfig& config);

std::vector<std::string> ConfigKeys();

}  // namespace orthospot

#endif  // ORTHOSPOT_CLI_RUN_CONFIG_H_
