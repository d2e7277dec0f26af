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

#ifndef ORTHOSPOT_TRAINER_TRAINER_H_
#define ORTHOSPOT_TRAINER_TRAINER_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "orthospot/dataset/corpus.h"
#include "orthospot/dataset/sampler.h"
#include "orthospot/frontend/feature_bank.h"
#include "orthospot/losses/losses.h"
#include "orthospot/model/model.h"

namespace orthospot {

// Which scalar the scheduler watches after each epoch.
enum class MonitorMode { kMaxEer, kMinEer };

struct TrainConfig {
  std::size_t batch_size = 256;
  double lr_init = 0.01;
  double momentum = 0.9;
  double weight_decay = 0.001;
  double lr_decay_factor = 2.0;
  std::size_t plateau_patience = 3;
  std::size_t stop_patience = 10;
  std::size_t max_epochs = 100;
  double lambda_orth = 1.0;
  OrthMode orth_mode = OrthMode::kFrobenius;
  double triplet_margin = 0.5;
  uint64_t seed = 0;
  ScenarioMode scenario_mode = ScenarioMode::kFour;
  MonitorMode monitor = MonitorMode::kMaxEer;
  double grad_clip = 0.0;        // global L2 norm; 0 disables
  std::size_t micro_batch = 64;  // anchors per forward pass
  bool check_grad_coverage = false;
  std::size_t eval_max_clips = 0;  // validation subset; 0 = all

  // Throws ConfigError.
  void Validate() const;
};

struct TrainState {
  ModelParams params;
  std::vector<Tensor> velocity;  // mirrors params.Named()
  std::size_t epoch = 0;
  std::size_t step = 0;
  double lr = 0.01;
  double best_metric = 0.0;
  std::size_t epochs_since_improve = 0;
};

TrainState MakeTrainState(ModelParams params, const TrainConfig& config);

// v <- momentum * v + (g + weight_decay * w); w <- w - lr * v.
void SgdUpdate(std::span<double> weights, std::span<const double> grads,
               std::span<double> velocity, double lr, double momentum,
               double weight_decay);

// Applies SgdUpdate to every parameter using its accumulated gradient.
// Throws NumericError naming the tensor and step on a non-finite gradient.
void SgdStep(TrainState* state, const TrainConfig& config);

// Halves (by lr_decay_factor) every plateau_patience epochs without a new
// best and requests a stop after stop_patience. Both counters share the best.
class PlateauScheduler {
 public:
  struct Decision {
    bool improved = false;
    bool decayed = false;
    bool stop = false;
  };

  PlateauScheduler(double lr_init, double decay_factor, std::size_t plateau_patience,
                   std::size_t stop_patience);

  Decision Observe(double metric);
  double lr() const { return lr_; }
  double best() const { return best_; }
  std::size_t since_improve() const { return since_; }
  std::size_t num_decays() const { return decays_; }

 private:
  double lr_;
  double factor_;
  std::size_t plateau_;
  std::size_t stop_;
  double best_;
  std::size_t since_ = 0;
  std::size_t decays_ = 0;
};

struct EpochMetrics {
  std::size_t epoch = 0;
  double lr = 0.0;
  LossBreakdown loss;  // means over the epoch's batches
  double val_eer_kws = 0.0;
  double val_eer_sv = 0.0;
  double cross_norm = 0.0;  // CrossBranchNorm at epoch end
  std::size_t steps = 0;
  std::size_t skipped_anchors = 0;
  std::size_t degenerate = 0;
};

// Everything the training loop needs besides the mutable state.
struct TrainingData {
  const CorpusSplit* split = nullptr;
  const FeatureBank* bank = nullptr;
  const QuadrupletSampler* sampler = nullptr;
  ClassMap classes;
};

// One pass over the shuffled training anchors in batches of batch_size.
// Validation fields of the result are left at zero.
EpochMetrics RunEpoch(TrainState* state, const TrainingData& data,
                      const TrainConfig& config, Rng* shuffle_rng, Rng* sampler_rng);

// Fills the class counts of `base` from the training split.
ModelConfig ResolveModelConfig(ModelConfig base, const ClassMap& classes);

struct FitResult {
  ModelParams best_params;
  ModelParams last_params;
  std::size_t best_epoch = 0;
  std::vector<EpochMetrics> history;
};

// Trains until early stopping or max_epochs. When out_dir is non-empty,
// writes best.ckpt (on improvement), last.ckpt, and metrics.csv there.
// `log` receives one line per epoch when non-null.
FitResult Fit(const TrainConfig& config, const ModelConfig& model_config,
              const CorpusSplit& split, const FeatureBank& bank,
              const std::string& out_dir = "", std::ostream* log = nullptr);

// epoch,lr,l_ckws,l_tkws,l_csv,l_tsv,l_orth,total,val_eer_kws,val_eer_sv
std::string MetricsCsvHeader();
std::string MetricsCsvRow(const EpochMetrics& m);

}  // namespace orthospot

#endif  // ORTHOSPOT_TRAINER_TRAINER_H_
