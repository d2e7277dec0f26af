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

#include "orthospot/trainer/trainer.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <unordered_map>

#include "orthospot/autodiff/ops.h"
#include "orthospot/base/error.h"
#include "orthospot/evaluator/evaluator.h"
#include "orthospot/model/checkpoint.h"

namespace orthospot {

void TrainConfig::Validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  require(batch_size > 0, "batch_size must be positive");
  require(lr_init > 0.0, "lr must be positive");
  require(momentum >= 0.0 && momentum < 1.0, "momentum must be in [0, 1)");
  require(weight_decay >= 0.0, "weight_decay must be non-negative");
  require(lr_decay_factor >= 1.0, "lr_decay_factor must be >= 1");
  require(plateau_patience > 0, "plateau_patience must be positive");
  require(stop_patience > 0, "stop_patience must be positive");
  require(max_epochs > 0, "max_epochs must be positive");
  require(lambda_orth >= 0.0, "lambda_orth must be non-negative");
  require(triplet_margin >= 0.0, "triplet_margin must be non-negative");
  require(grad_clip >= 0.0, "grad_clip must be non-negative");
  require(micro_batch > 0, "micro_batch must be positive");
}

TrainState MakeTrainState(ModelParams params, const TrainConfig& config) {
  TrainState state;
  state.params = std::move(params);
  for (const auto& [name, t] : state.params.Named()) {
    state.velocity.push_back(Tensor::Zeros(t.shape()));
  }
  state.lr = config.lr_init;
  state.best_metric = std::numeric_limits<double>::infinity();
  return state;
}

void SgdUpdate(std::span<double> weights, std::span<const double> grads,
               std::span<double> velocity, double lr, double momentum,
               double weight_decay) {
  for (std::size_t i = 0; i < weights.size(); ++i) {
    velocity[i] = momentum * velocity[i] + (grads[i] + weight_decay * weights[i]);
    weights[i] -= lr * velocity[i];
  }
}

void SgdStep(TrainState* state, const TrainConfig& config) {
  auto named = state->params.Named();
  double sq_norm = 0.0;
  for (auto& [name, t] : named) {
    for (double g : t.grad()) {
      if (!std::isfinite(g)) {
        throw NumericError("non-finite gradient in " + name + " at step " +
                           std::to_string(state->step));
      }
      sq_norm += g * g;
    }
  }
  double clip_scale = 1.0;
  if (config.grad_clip > 0.0) {
    double norm = std::sqrt(sq_norm);
    if (norm > config.grad_clip) clip_scale = config.grad_clip / norm;
  }
  for (std::size_t k = 0; k < named.size(); ++k) {
    Tensor& t = named[k].second;
    auto g = t.grad();
    if (clip_scale != 1.0) {
      for (double& v : g) v *= clip_scale;
    }
    SgdUpdate(t.data(), g, state->velocity[k].data(), state->lr, config.momentum,
              config.weight_decay);
  }
  ++state->step;
}

PlateauScheduler::PlateauScheduler(double lr_init, double decay_factor,
                                   std::size_t plateau_patience,
                                   std::size_t stop_patience)
    : lr_(lr_init),
      factor_(decay_factor),
      plateau_(plateau_patience),
      stop_(stop_patience),
      best_(std::numeric_limits<double>::infinity()) {}

PlateauScheduler::Decision PlateauScheduler::Observe(double metric) {
  Decision d;
  if (metric < best_) {
    best_ = metric;
    since_ = 0;
    d.improved = true;
    return d;
  }
  ++since_;
  if (since_ % plateau_ == 0) {
    lr_ /= factor_;
    ++decays_;
    d.decayed = true;
  }
  d.stop = since_ >= stop_;
  return d;
}

namespace {

struct TripletRows {
  std::vector<std::size_t> anchor, positive, negative;
};

// Slots of a quadruplet in forward order: anchor, s1, s2, s3, s4 (four) or
// anchor, s1, s4 (two).
std::vector<std::size_t> Slots(const Quadruplet& q) {
  std::vector<std::size_t> s = {q.anchor, q.s1};
  if (q.s2) s.push_back(*q.s2);
  if (q.s3) s.push_back(*q.s3);
  s.push_back(q.s4);
  return s;
}

struct MicroBatchLoss {
  double l_ckws = 0.0, l_tkws = 0.0, l_csv = 0.0, l_tsv = 0.0;
  std::size_t degenerate = 0;
};

// Forward and backward for a chunk of quadruplets. Loss terms are scaled so
// that summing chunks gives means over the whole batch of `batch_anchors`.
MicroBatchLoss RunMicroBatch(const ModelParams& params, const TrainingData& data,
                             const TrainConfig& config,
                             std::span<const Quadruplet> quads,
                             std::size_t batch_anchors) {
  std::vector<std::size_t> clips;
  std::vector<double> multiplicity;
  std::unordered_map<std::size_t, std::size_t> position;
  auto pos_of = [&](std::size_t clip) {
    auto [it, inserted] = position.emplace(clip, clips.size());
    if (inserted) {
      clips.push_back(clip);
      multiplicity.push_back(0.0);
    }
    return it->second;
  };

  const bool four = config.scenario_mode == ScenarioMode::kFour;
  const std::size_t slots = four ? 5 : 3;
  const std::size_t triplets_per_quad = four ? 4 : 1;
  TripletRows kws, sv;
  for (const Quadruplet& q : quads) {
    for (std::size_t c : Slots(q)) multiplicity[pos_of(c)] += 1.0;
    const std::size_t a = pos_of(q.anchor), s1 = pos_of(q.s1), s4 = pos_of(q.s4);
    auto add = [](TripletRows* rows, std::size_t an, std::size_t p, std::size_t n) {
      rows->anchor.push_back(an);
      rows->positive.push_back(p);
      rows->negative.push_back(n);
    };
    if (four) {
      const std::size_t s2 = pos_of(*q.s2), s3 = pos_of(*q.s3);
      // Keyword positives share the word; speaker positives share the voice.
      for (std::size_t p : {s1, s2}) {
        for (std::size_t n : {s3, s4}) add(&kws, a, p, n);
      }
      for (std::size_t p : {s1, s3}) {
        for (std::size_t n : {s2, s4}) add(&sv, a, p, n);
      }
    } else {
      add(&kws, a, s1, s4);
      add(&sv, a, s1, s4);
    }
  }

  const double anchors = static_cast<double>(batch_anchors);
  std::vector<double> ce_weights(clips.size());
  std::vector<std::size_t> kw_targets(clips.size()), spk_targets(clips.size());
  for (std::size_t i = 0; i < clips.size(); ++i) {
    ce_weights[i] = multiplicity[i] / (static_cast<double>(slots) * anchors);
    const ClipInfo& info = data.split->clips[clips[i]];
    kw_targets[i] = static_cast<std::size_t>(data.classes.keyword_class[info.keyword_id]);
    spk_targets[i] = static_cast<std::size_t>(data.classes.speaker_class[info.speaker_id]);
  }

  Tape tape;
  ModelOutput out = Forward(&tape, params, data.bank->Batch(clips));
  MicroBatchLoss loss;
  const double triplet_scale = 1.0 / (static_cast<double>(triplets_per_quad) * anchors);
  auto triplet = [&](const Tensor& emb, const TripletRows& rows) {
    Tensor hinge = TripletLoss(&tape, GatherRows(&tape, emb, rows.anchor),
                               GatherRows(&tape, emb, rows.positive),
                               GatherRows(&tape, emb, rows.negative),
                               config.triplet_margin, &loss.degenerate);
    return Scale(&tape, Sum(&tape, hinge), triplet_scale);
  };
  Tensor ce_kws = SoftmaxXent(&tape, out.kws.logits, kw_targets, ce_weights);
  Tensor ce_sv = SoftmaxXent(&tape, out.sv.logits, spk_targets, ce_weights);
  Tensor t_kws = triplet(out.kws.embedding, kws);
  Tensor t_sv = triplet(out.sv.embedding, sv);
  LossBreakdown parts;
  Tensor total = TotalLoss(&tape, ce_kws, t_kws, ce_sv, t_sv, Tensor(), 0.0, &parts);
  tape.Backward(total);
  loss.l_ckws = parts.l_ckws;
  loss.l_tkws = parts.l_tkws;
  loss.l_csv = parts.l_csv;
  loss.l_tsv = parts.l_tsv;
  return loss;
}

void CheckCoverage(const ModelParams& params, std::size_t step) {
  for (const auto& [name, t] : params.Named()) {
    if (!t.grad_touched()) {
      throw NumericError("parameter " + name + " received no gradient at step " +
                         std::to_string(step));
    }
  }
}

}  // namespace

EpochMetrics RunEpoch(TrainState* state, const TrainingData& data,
                      const TrainConfig& config, Rng* shuffle_rng, Rng* sampler_rng) {
  const CorpusSplit& split = *data.split;
  if (split.train.empty()) throw DataError("training split is empty");
  const QuadrupletSampler& sampler = *data.sampler;
  const auto& eligible = sampler.EligibleAnchors(config.scenario_mode);
  if (eligible.empty()) throw DataError("no training anchor supports the scenario mode");

  std::vector<std::size_t> anchors = split.train;
  Shuffle(&anchors, shuffle_rng);

  EpochMetrics metrics;
  metrics.epoch = state->epoch + 1;
  metrics.lr = state->lr;
  LossBreakdown sum;
  for (std::size_t start = 0; start < anchors.size(); start += config.batch_size) {
    const std::size_t stop = std::min(anchors.size(), start + config.batch_size);
    std::vector<Quadruplet> quads;
    quads.reserve(stop - start);
    for (std::size_t i = start; i < stop; ++i) {
      auto q = sampler.Sample(anchors[i], config.scenario_mode, sampler_rng);
      if (!q) {
        ++metrics.skipped_anchors;
        std::size_t replacement = eligible[UniformIndex(sampler_rng, eligible.size())];
        q = sampler.Sample(replacement, config.scenario_mode, sampler_rng);
      }
      quads.push_back(*q);
    }

    state->params.ZeroGrad();
    LossBreakdown batch;
    {
      Tape tape(config.lambda_orth != 0.0);
      Tensor orth = OrthPenalty(&tape, state->params.gru_kws, state->params.gru_sv,
                                config.orth_mode);
      batch.l_orth = orth.item();
      if (config.lambda_orth != 0.0) tape.Backward(Scale(&tape, orth, config.lambda_orth));
    }
    for (std::size_t m = 0; m < quads.size(); m += config.micro_batch) {
      std::size_t len = std::min(config.micro_batch, quads.size() - m);
      MicroBatchLoss part = RunMicroBatch(state->params, data, config,
                                          std::span(quads).subspan(m, len), quads.size());
      batch.l_ckws += part.l_ckws;
      batch.l_tkws += part.l_tkws;
      batch.l_csv += part.l_csv;
      batch.l_tsv += part.l_tsv;
      metrics.degenerate += part.degenerate;
    }
    batch = TotalLoss(batch.l_ckws, batch.l_tkws, batch.l_csv, batch.l_tsv, batch.l_orth,
                      config.lambda_orth);
    if (!std::isfinite(batch.total)) {
      throw NumericError("non-finite loss at step " + std::to_string(state->step));
    }
    if (config.check_grad_coverage) CheckCoverage(state->params, state->step);
    SgdStep(state, config);

    sum.l_ckws += batch.l_ckws;
    sum.l_tkws += batch.l_tkws;
    sum.l_csv += batch.l_csv;
    sum.l_tsv += batch.l_tsv;
    sum.l_orth += batch.l_orth;
    sum.total += batch.total;
    ++metrics.steps;
  }
  const double inv = 1.0 / static_cast<double>(metrics.steps);
  metrics.loss = {sum.l_ckws * inv, sum.l_tkws * inv, sum.l_csv * inv,
                  sum.l_tsv * inv,  sum.l_orth * inv, sum.total * inv};
  ++state->epoch;
  return metrics;
}

ModelConfig ResolveModelConfig(ModelConfig base, const ClassMap& classes) {
  base.num_keywords = classes.num_keyword_classes;
  base.num_speakers = classes.num_speaker_classes;
  base.Validate();
  return base;
}

std::string MetricsCsvHeader() {
  return "epoch,lr,l_ckws,l_tkws,l_csv,l_tsv,l_orth,total,val_eer_kws,val_eer_sv";
}

std::string MetricsCsvRow(const EpochMetrics& m) {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", m.epoch,
                m.lr, m.loss.l_ckws, m.loss.l_tkws, m.loss.l_csv, m.loss.l_tsv,
                m.loss.l_orth, m.loss.total, m.val_eer_kws, m.val_eer_sv);
  return buf;
}

FitResult Fit(const TrainConfig& config, const ModelConfig& model_config,
              const CorpusSplit& split, const FeatureBank& bank,
              const std::string& out_dir, std::ostream* log) {
  config.Validate();
  TrainingData data;
  data.split = &split;
  data.bank = &bank;
  data.classes = BuildClassMap(split);
  QuadrupletSampler sampler(split);
  data.sampler = &sampler;

  const ModelConfig resolved = ResolveModelConfig(model_config, data.classes);
  TrainState state = MakeTrainState(InitParams(resolved, config.seed), config);
  PlateauScheduler scheduler(config.lr_init, config.lr_decay_factor,
                             config.plateau_patience, config.stop_patience);
  Rng shuffle_rng = MakeRng(config.seed, "shuffle");
  Rng sampler_rng = MakeRng(config.seed, "sampler");

  std::ofstream csv;
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    csv.open(out_dir + "/metrics.csv");
    if (!csv) throw DataError("cannot write " + out_dir + "/metrics.csv");
    csv << MetricsCsvHeader() << '\n';
  }

  FitResult result;
  result.best_params = state.params.Clone();
  for (std::size_t e = 0; e < config.max_epochs; ++e) {
    EpochMetrics m = RunEpoch(&state, data, config, &shuffle_rng, &sampler_rng);
    EvalReport val = Evaluate(state.params, split, bank, split.validation,
                              config.eval_max_clips);
    m.val_eer_kws = val.kws.eer;
    m.val_eer_sv = val.sv.eer;
    m.cross_norm = CrossBranchNorm(state.params.gru_kws, state.params.gru_sv);
    const double monitored = config.monitor == MonitorMode::kMaxEer
                                 ? std::max(m.val_eer_kws, m.val_eer_sv)
                                 : std::min(m.val_eer_kws, m.val_eer_sv);
    PlateauScheduler::Decision d = scheduler.Observe(monitored);
    state.lr = scheduler.lr();
    state.best_metric = scheduler.best();
    state.epochs_since_improve = scheduler.since_improve();
    if (d.improved) {
      result.best_params = state.params.Clone();
      result.best_epoch = m.epoch;
      if (!out_dir.empty()) SaveCheckpoint(state.params, out_dir + "/best.ckpt");
    }
    if (!out_dir.empty()) {
      SaveCheckpoint(state.params, out_dir + "/last.ckpt");
      csv << MetricsCsvRow(m) << '\n';
      csv.flush();
    }
    if (log) {
      char line[256];
      std::snprintf(line, sizeof(line),
                    "epoch %3zu lr %.5g loss %.4f (ce %.4f/%.4f tri %.4f/%.4f orth %.4g) "
                    "val eer kws %.4f sv %.4f%s",
                    m.epoch, m.lr, m.loss.total, m.loss.l_ckws, m.loss.l_csv,
                    m.loss.l_tkws, m.loss.l_tsv, m.loss.l_orth, m.val_eer_kws,
                    m.val_eer_sv, d.improved ? " *" : "");
      *log << line << std::endl;
    }
    result.history.push_back(m);
    if (d.stop) break;
  }
  result.last_params = state.params.Clone();
  return result;
}

}  // namespace orthospot
