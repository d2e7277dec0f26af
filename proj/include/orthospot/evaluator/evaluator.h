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

#ifndef ORTHOSPOT_EVALUATOR_EVALUATOR_H_
#define ORTHOSPOT_EVALUATOR_EVALUATOR_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "orthospot/dataset/corpus.h"
#include "orthospot/frontend/feature_bank.h"
#include "orthospot/model/model.h"

namespace orthospot {

enum class Task { kKws, kSv };
const char* TaskName(Task task);

// Row-major [count, dim] pooled embeddings for each branch.
struct Embeddings {
  std::size_t count = 0;
  std::size_t dim = 0;
  std::vector<double> kws;
  std::vector<double> sv;

  std::span<const double> row(Task task, std::size_t i) const {
    const auto& v = task == Task::kKws ? kws : sv;
    return {v.data() + i * dim, dim};
  }
};

Embeddings ExtractEmbeddings(const ModelParams& params, const FeatureBank& bank,
                             std::span<const std::size_t> clips,
                             std::size_t batch_size = 64);

// a.b / (|a||b|). A zero-norm side scores 0 and bumps *degenerate.
double CosineScore(std::span<const double> a, std::span<const double> b,
                   std::size_t* degenerate = nullptr);

// Every unordered pair of distinct utterances; target = equal labels.
struct TrialSet {
  std::vector<std::pair<uint32_t, uint32_t>> pairs;
  std::vector<uint8_t> targets;
  std::vector<double> scores;
};

// Throws DataError for fewer than two clips or when every pair has the same
// target value (EER undefined).
TrialSet BuildTrials(std::span<const int> labels);
void ScoreTrials(const Embeddings& emb, Task task, TrialSet* trials);

// Thresholds at the sorted unique scores plus +inf; FAR counts non-targets
// >= threshold, FRR counts targets < threshold. The EER is read where
// FAR - FRR changes sign, interpolating linearly between neighbouring points.
// Throws DataError when either class is empty.
double ComputeEer(std::span<const double> scores, std::span<const uint8_t> targets);

struct TaskResult {
  double eer = 0.0;
  std::size_t trials = 0;
  std::size_t targets = 0;
  std::size_t nontargets = 0;
};

struct EvalReport {
  std::size_t num_clips = 0;
  TaskResult kws;
  TaskResult sv;
  std::size_t degenerate = 0;
};

// All-pairs scoring of `clips` (keyword labels for KWS, speaker labels for
// SV). max_clips > 0 keeps an evenly spaced subset.
EvalReport Evaluate(const ModelParams& params, const CorpusSplit& split,
                    const FeatureBank& bank, std::span<const std::size_t> clips,
                    std::size_t max_clips = 0);

// enroll_path<TAB>test_path<TAB>target<TAB>score
void WriteTrialDump(const CorpusSplit& split, std::span<const std::size_t> clips,
                    const TrialSet& trials, const std::string& path);

// key=value lines.
void WriteEvalReport(const EvalReport& report, const std::string& path);

}  // namespace orthospot

#endif  // ORTHOSPOT_EVALUATOR_EVALUATOR_H_
