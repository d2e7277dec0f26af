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

#ifndef ORTHOSPOT_AUTODIFF_OPS_H_
#define ORTHOSPOT_AUTODIFF_OPS_H_

#include <cstddef>
#include <span>
#include <vector>

#include "orthospot/autodiff/tensor.h"

namespace orthospot {

// Differentiable primitives. Each computes its output eagerly and, when the
// tape is recording and any input requires grad, records a backward closure.
// Shape errors throw ShapeError naming both operand shapes.

// [M, K] x [K, N] -> [M, N]
Tensor MatMul(Tape* tape, const Tensor& a, const Tensor& b);
// [M, K] x [N, K]^T -> [M, N]
Tensor MatMulNT(Tape* tape, const Tensor& a, const Tensor& b);
// x[..., C] + bias[C], broadcast over leading axes.
Tensor AddBias(Tape* tape, const Tensor& x, const Tensor& bias);

Tensor Add(Tape* tape, const Tensor& a, const Tensor& b);
Tensor Sub(Tape* tape, const Tensor& a, const Tensor& b);
Tensor Hadamard(Tape* tape, const Tensor& a, const Tensor& b);
Tensor Scale(Tape* tape, const Tensor& a, double factor);
Tensor AddScalar(Tape* tape, const Tensor& a, double offset);

Tensor Sigmoid(Tape* tape, const Tensor& x);
Tensor Tanh(Tape* tape, const Tensor& x);
Tensor Relu(Tape* tape, const Tensor& x);
// max(0, x + margin), element-wise.
Tensor Hinge(Tape* tape, const Tensor& x, double margin = 0.0);

// Reductions to a scalar.
Tensor Sum(Tape* tape, const Tensor& x);
Tensor Mean(Tape* tape, const Tensor& x);
Tensor FrobeniusSq(Tape* tape, const Tensor& x);

// [B, T, C] -> [B, C]
Tensor MeanOverTime(Tape* tape, const Tensor& x);

// Cross-correlation along time. x[B, T, Cin], kernel[Cout, Cin, K],
// bias[Cout] -> [B, T, Cout]. Stride 1, zero "same" padding with
// (K - 1) / 2 frames on the left.
Tensor Conv1d(Tape* tape, const Tensor& x, const Tensor& kernel,
              const Tensor& bias);

// sum_i weights[i] * -log softmax(logits[i])[targets[i]] for logits[B, C].
// Uses max subtraction. Throws on an out-of-range target.
Tensor SoftmaxXent(Tape* tape, const Tensor& logits,
                   std::span<const std::size_t> targets,
                   std::span<const double> weights);

// x[N, C] -> rows x[index[m]] as [M, C].
Tensor GatherRows(Tape* tape, const Tensor& x,
                  std::span<const std::size_t> index);

// Row-wise cosine similarity of a[M, C] and b[M, C] -> [M]. A zero-norm row
// scores 0 with zero gradient and bumps *degenerate when it is non-null.
Tensor CosineRows(Tape* tape, const Tensor& a, const Tensor& b,
                  std::size_t* degenerate = nullptr);

namespace internal {

// Adds src into t's gradient buffer and marks it touched.
void AccumulateGrad(const Tensor* t, std::span<const double> src);

}  // namespace internal

}  // namespace orthospot

#endif  // ORTHOSPOT_AUTODIFF_OPS_H_
