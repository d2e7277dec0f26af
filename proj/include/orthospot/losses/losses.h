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

#ifndef ORTHOSPOT_LOSSES_LOSSES_H_
#define ORTHOSPOT_LOSSES_LOSSES_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "orthospot/autodiff/tensor.h"
#include "orthospot/model/gru.h"

namespace orthospot {

// kFrobenius: ||W_kws W_sv^T||_F^2. kLiteral: sum of the entries of
// W_kws W_sv^T, which is unbounded below and only useful for comparison.
enum class OrthMode { kFrobenius, kLiteral };

const char* OrthModeName(OrthMode mode);
OrthMode ParseOrthMode(const std::string& text);  // throws ConfigError

// -log softmax(logits)[target], max-subtracted. Throws on a bad target.
double CrossEntropy(std::span<const double> logits, std::size_t target);

// 1 - cos(a, b); a zero vector gives similarity 0.
double CosineDistance(std::span<const double> a, std::span<const double> b);

// max(0, d(a, p) - d(a, n) + margin) with cosine distance.
double TripletLoss(std::span<const double> anchor, std::span<const double> positive,
                   std::span<const double> negative, double margin);

// Per-row triplet hinge for rows of anchor/positive/negative [M, H] -> [M].
Tensor TripletLoss(Tape* tape, const Tensor& anchor, const Tensor& positive,
                   const Tensor& negative, double margin,
                   std::size_t* degenerate = nullptr);

// Cross-branch term for one weight pair. Throws ShapeError on mismatch.
Tensor OrthTerm(Tape* tape, const Tensor& w_kws, const Tensor& w_sv, OrthMode mode);

// Sum of OrthTerm over the six weight pairs of every layer; biases excluded.
Tensor OrthPenalty(Tape* tape, const std::vector<GruLayerParams>& kws,
                   const std::vector<GruLayerParams>& sv, OrthMode mode);

// sum over layers and the six pairs of ||W_kws W_sv^T||_F (not squared).
double CrossBranchNorm(const std::vector<GruLayerParams>& kws,
                       const std::vector<GruLayerParams>& sv);

struct LossBreakdown {
  double l_ckws = 0.0;
  double l_tkws = 0.0;
  double l_csv = 0.0;
  double l_tsv = 0.0;
  double l_orth = 0.0;
  double total = 0.0;
};

// total = ckws + tkws + csv + tsv + lambda * orth.
LossBreakdown TotalLoss(double l_ckws, double l_tkws, double l_csv, double l_tsv,
                        double l_orth, double lambda_orth = 1.0);

// Tape version; fills *breakdown from the component values. An undefined
// orth tensor, or lambda_orth == 0, leaves the penalty out of the graph.
Tensor TotalLoss(Tape* tape, const Tensor& l_ckws, const Tensor& l_tkws,
                 const Tensor& l_csv, const Tensor& l_tsv, const Tensor& l_orth,
                 double lambda_orth, LossBreakdown* breakdown);

}  // namespace orthospot

#endif  // ORTHOSPOT_LOSSES_LOSSES_H_
