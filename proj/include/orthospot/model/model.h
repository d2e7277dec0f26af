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

#ifndef ORTHOSPOT_MODEL_MODEL_H_
#define ORTHOSPOT_MODEL_MODEL_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "orthospot/autodiff/tensor.h"
#include "orthospot/frontend/mfcc.h"
#include "orthospot/model/gru.h"

namespace orthospot {

struct ModelConfig {
  std::size_t input_dim = 40;
  std::size_t tconv_channels = 64;
  std::size_t tconv_width = 5;
  std::size_t hidden = 256;  // also the embedding width
  std::size_t gru_layers = 2;
  std::size_t num_keywords = 32;
  std::size_t num_speakers = 1959;

  // Throws ShapeError on a zero size.
  void Validate() const;
};

// Shared temporal convolution feeding a keyword branch and a speaker branch.
// Both GRU stacks have identical shapes so their weights can be compared.
struct ModelParams {
  Tensor tconv_kernel;  // [channels, input_dim, width]
  Tensor tconv_bias;    // [channels]
  std::vector<GruLayerParams> gru_kws;
  std::vector<GruLayerParams> gru_sv;
  Tensor head_kws_w;  // [num_keywords, hidden]
  Tensor head_kws_b;
  Tensor head_sv_w;  // [num_speakers, hidden]
  Tensor head_sv_b;

  // Stable order; names look like "gru_kws.0.w_ir".
  std::vector<std::pair<std::string, Tensor>> Named() const;

  // Independent copy of every tensor.
  ModelParams Clone() const;
  void ZeroGrad();
};

// Glorot-uniform weights drawn from the "init" stream of `seed`, zero biases.
ModelParams InitParams(const ModelConfig& config, uint64_t seed);

struct BranchOutput {
  Tensor embedding;  // [B, hidden], pooled before the head
  Tensor logits;     // [B, classes]
};

struct ModelOutput {
  BranchOutput kws;
  BranchOutput sv;
};

// features[B, T, input_dim] -> per-branch embeddings and logits.
ModelOutput Forward(Tape* tape, const ModelParams& params, const Tensor& features);

// Single clip convenience wrapper (no gradient).
ModelOutput Forward(const ModelParams& params, const FeatureMatrix& features);

// Packs equally sized feature matrices into [B, T, D].
Tensor StackFeatures(std::span<const FeatureMatrix* const> batch);

}  // namespace orthospot

#endif  // ORTHOSPOT_MODEL_MODEL_H_
