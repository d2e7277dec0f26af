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

#include "orthospot/evaluator/evaluator.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "orthospot/base/error.h"

namespace orthospot {

const char* TaskName(Task task) { return task == Task::kKws ? "kws" : "sv"; }

Embeddings ExtractEmbeddings(const ModelParams& params, const FeatureBank& bank,
                             std::span<const std::size_t> clips,
                             std::size_t batch_size) {
  Embeddings emb;
  emb.count = clips.size();
  emb.dim = params.head_kws_w.dim(1);
  emb.kws.reserve(emb.count * emb.dim);
  emb.sv.reserve(emb.count * emb.dim);
  for (std::size_t start = 0; start < clips.size(); start += batch_size) {
    std::size_t stop = std::min(clips.size(), start + batch_size);
    Tape tape(false);
    ModelOutput out = Forward(&tape, params, bank.Batch(clips.subspan(start, stop - start)));
    auto k = out.kws.embedding.data();
    auto s = out.sv.embedding.data();
    emb.kws.insert(emb.kws.end(), k.begin(), k.end());
    emb.sv.insert(emb.sv.end(), s.begin(), s.end());
  }
  return emb;
}

double CosineScore(std::span<const double> a, std::span<const double> b,
                   std::size_t* degenerate) {
  double dot = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa == 0.0 || bb == 0.0) {
    if (degenerate) ++*degenerate;
    return 0.0;
  }
  return std::clamp(dot / (std::sqrt(aa) * std::sqrt(bb)), -1.0, 1.0);
}

TrialSet BuildTrials(std::span<const int> labels) {
  const std::size_t n = labels.size();
  if (n < 2) throw DataError("trials need at least two utterances");
  TrialSet trials;
  trials.pairs.reserve(n * (n - 1) / 2);
  trials.targets.reserve(n * (n - 1) / 2);
  std::size_t positives = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      trials.pairs.emplace_back(static_cast<uint32_t>(i), static_cast<uint32_t>(j));
      uint8_t t = labels[i] == labels[j];
      positives += t;
      trials.targets.push_back(t);
    }
  }
  if (positives == 0 || positives == trials.targets.size()) {
    throw DataError(positives == 0 ? "no target trials: every label differs"
                                   : "no non-target trials: every label is the same");
  }
  return trials;
}

void ScoreTrials(const Embeddings& emb, Task task, TrialSet* trials) {
  trials->scores.resize(trials->pairs.size());
  for (std::size_t k = 0; k < trials->pairs.size(); ++k) {
    auto [i, j] = trials->pairs[k];
    trials->scores[k] = CosineScore(emb.row(task, i), emb.row(task, j));
  }
}

double ComputeEer(std::span<const double> scores, std::span<const uint8_t> targets) {
  if (scores.size() != targets.size()) {
    throw DataError("ComputeEer: score and label counts differ");
  }
  std::size_t n_target = 0;
  for (uint8_t t : targets) n_target += t != 0;
  const std::size_t n_non = targets.size() - n_target;
  if (n_target == 0 || n_non == 0) {
    throw DataError("EER needs both target and non-target trials");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&scores](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });

  const double inv_t = 1.0 / static_cast<double>(n_target);
  const double inv_n = 1.0 / static_cast<double>(n_non);
  // Operating point at the lowest score: nothing rejected, everything accepted.
  std::size_t targets_below = 0, nontargets_below = 0;
  double prev_far = 1.0, prev_frr = 0.0;
  std::size_t k = 0;
  while (true) {
    // Advance past one group of tied scores; the next threshold is the next
    // unique score, or +inf after the last group.
    const double value = scores[order[k]];
    while (k < order.size() && scores[order[k]] == value) {
      if (targets[order[k]]) {
        ++targets_below;
      } else {
        ++nontargets_below;
      }
      ++k;
    }
    const double far = static_cast<double>(n_non - nontargets_below) * inv_n;
    const double frr = static_cast<double>(targets_below) * inv_t;
    const double d_prev = prev_far - prev_frr;
    const double d = far - frr;
    if (d <= 0.0) {
      if (d == 0.0) return far;
      const double s = d_prev / (d_prev - d);
      return prev_far + s * (far - prev_far);
    }
    prev_far = far;
    prev_frr = frr;
  }
}

namespace {

TaskResult ScoreAllPairs(const Embeddings& emb, Task task, std::span<const int> labels,
                         std::size_t* degenerate) {
  const std::size_t n = emb.count;
  TaskResult result;
  std::vector<double> scores;
  std::vector<uint8_t> targets;
  scores.reserve(n * (n - 1) / 2);
  targets.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      scores.push_back(CosineScore(emb.row(task, i), emb.row(task, j), degenerate));
      uint8_t t = labels[i] == labels[j];
      targets.push_back(t);
      result.targets += t;
    }
  }
  result.trials = scores.size();
  result.nontargets = result.trials - result.targets;
  if (result.targets == 0 || result.nontargets == 0) {
    throw DataError(std::string(TaskName(task)) +
                    " trials are single-class; EER is undefined");
  }
  result.eer = ComputeEer(scores, targets);
  return result;
}

}  // namespace

EvalReport Evaluate(const ModelParams& params, const CorpusSplit& split,
                    const FeatureBank& bank, std::span<const std::size_t> clips,
                    std::size_t max_clips) {
  std::vector<std::size_t> chosen(clips.begin(), clips.end());
  if (max_clips > 0 && chosen.size() > max_clips) {
    std::vector<std::size_t> subset;
    for (std::size_t k = 0; k < max_clips; ++k) {
      subset.push_back(chosen[k * chosen.size() / max_clips]);
    }
    chosen = std::move(subset);
  }
  if (chosen.size() < 2) throw DataError("evaluation needs at least two clips");
  std::vector<int> keywords, speakers;
  for (std::size_t c : chosen) {
    keywords.push_back(split.clips[c].keyword_id);
    speakers.push_back(split.clips[c].speaker_id);
  }
  Embeddings emb = ExtractEmbeddings(params, bank, chosen);
  EvalReport report;
  report.num_clips = chosen.size();
  report.kws = ScoreAllPairs(emb, Task::kKws, keywords, &report.degenerate);
  report.sv = ScoreAllPairs(emb, Task::kSv, speakers, &report.degenerate);
  return report;
}

void WriteTrialDump(const CorpusSplit& split, std::span<const std::size_t> clips,
                    const TrialSet& trials, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot write trial dump " + path);
  os.precision(17);
  for (std::size_t k = 0; k < trials.pairs.size(); ++k) {
    auto [i, j] = trials.pairs[k];
    os << split.clips[clips[i]].source_path << '\t' << split.clips[clips[j]].source_path
       << '\t' << static_cast<int>(trials.targets[k]) << '\t'
       << (k < trials.scores.size() ? trials.scores[k] : 0.0) << '\n';
  }
  if (!os) throw DataError("write failed for trial dump " + path);
}

void WriteEvalReport(const EvalReport& report, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot write report " + path);
  os.precision(17);
  os << "num_clips=" << report.num_clips << '\n'
     << "eer_kws=" << report.kws.eer << '\n'
     << "trials_kws=" << report.kws.trials << '\n'
     << "targets_kws=" << report.kws.targets << '\n'
     << "eer_sv=" << report.sv.eer << '\n'
     << "trials_sv=" << report.sv.trials << '\n'
     << "targets_sv=" << report.sv.targets << '\n'
     << "degenerate_embeddings=" << report.degenerate << '\n';
  if (!os) throw DataError("write failed for report " + path);
}

}  // namespace orthospot
