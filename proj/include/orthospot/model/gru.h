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

#ifndef ORTHOSPOT_MODEL_GRU_H_
#define ORTHOSPOT_MODEL_GRU_H_

#include <array>
#include <cstddef>
#include <string_view>

#include "orthospot/autodiff/tensor.h"
#include "orthospot/base/rng.h"

namespace orthospot {

// One GRU layer:
//   r_t = sigmoid(W_ir x_t + b_ir + W_hr h_{t-1} + b_hr)
//   z_t = sigmoid(W_iz x_t + b_iz + W_hz h_{t-1} + b_hz)
//   n_t = tanh(W_in x_t + b_in + r_t * (W_hn h_{t-1} + b_hn))
//   h_t = (1 - z_t) * n_t + z_t * h_{t-1}
// Input weights are hidden x input, recurrent weights hidden x hidden.
struct GruLayerParams {
  Tensor w_ir, w_iz, w_in;
  Tensor w_hr, w_hz, w_hn;
  Tensor b_ir, b_iz, b_in;
  Tensor b_hr, b_hz, b_hn;

  static GruLayerParams Zeros(std::size_t input, std::size_t hidden,
                              bool requires_grad = true);
  // Glorot-uniform weights, zero biases.
  static GruLayerParams Glorot(std::size_t input, std::size_t hidden, Rng* rng);

  std::size_t input_size() const { return w_ir.dim(1); }
  std::size_t hidden_size() const { return w_ir.dim(0); }

  // Order: ir, iz, in, hr, hz, hn.
  std::array<Tensor, 6> weights() const;
  std::array<Tensor, 6> biases() const;
  static const std::array<std::string_view, 6>& WeightNames();
  static const std::array<std::string_view, 6>& BiasNames();

  // Throws ShapeError when the twelve tensors disagree.
  void Validate() const;
};

// One step built from autodiff primitives. x[B, In], h_prev[B, H] -> [B, H].
Tensor GruStep(Tape* tape, const GruLayerParams& p, const Tensor& x,
               const Tensor& h_prev);

// Whole sequence as one tape node with a hand-derived backward pass through
// time. x[B, T, In] -> hidden states [B, T, H], starting from h_0 = 0.
Tensor GruSequence(Tape* tape, const GruLayerParams& p, const Tensor& x);

}  // namespace orthospot

#endif  // ORTHOSPOT_MODEL_GRU_H_
