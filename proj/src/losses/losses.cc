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

#include "orthospot/losses/losses.h"

#include <algorithm>
#include <cmath>

#include "orthospot/autodiff/ops.h"
#include "orthospot/base/error.h"

namespace orthospot {

const char* OrthModeName(OrthMode mode) {
  return mode == OrthMode::kFrobenius ? "frobenius" : "literal";
}

OrthMode ParseOrthMode(const std::string& text) {
  if (text == "frobenius") return OrthMode::kFrobenius;
  if (text == "literal") return OrthMode::kLiteral;
  throw ConfigError("orth_mode must be 'frobenius' or 'literal', got '" + text + "'");
}

double CrossEntropy(std::span<const double> logits, std::size_t target) {
  if (target >= logits.size()) {
    throw ShapeError("CrossEntropy: target " + std::to_string(target) +
                     " out of range for " + std::to_string(logits.size()) + " classes");
  }
  double peak = *std::max_element(logits.begin(), logits.end());
  double denom = 0.0;
  for (double z : logits) denom += std::exp(z - peak);
  return std::log(denom) - (logits[target] - peak);
}

double CosineDistance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("CosineDistance: length mismatch");
  double dot = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa == 0.0 || bb == 0.0) return 1.0;
  return 1.0 - dot / (std::sqrt(aa) * std::sqrt(bb));
}

double TripletLoss(std::span<const double> anchor, std::span<const double> positive,
                   std::span<const double> negative, double margin) {
  if (margin < 0.0) throw ShapeError("triplet margin must be non-negative");
  return std::max(0.0, CosineDistance(anchor, positive) -
                           CosineDistance(anchor, negative) + margin);
}

Tensor TripletLoss(Tape* tape, const Tensor& anchor, const Tensor& positive,
                   const Tensor& negative, double margin, std::size_t* degenerate) {
  if (margin < 0.0) throw ShapeError("triplet margin must be non-negative");
  // d(a,p) - d(a,n) = cos(a,n) - cos(a,p)
  Tensor sim_pos = CosineRows(tape, anchor, positive, degenerate);
  Tensor sim_neg = CosineRows(tape, anchor, negative, degenerate);
  return Hinge(tape, Sub(tape, sim_neg, sim_pos), margin);
}

Tensor OrthTerm(Tape* tape, const Tensor& w_kws, const Tensor& w_sv, OrthMode mode) {
  if (w_kws.shape() != w_sv.shape()) {
    throw ShapeError("OrthTerm: branch weights " + ShapeString(w_kws.shape()) +
                     " and " + ShapeString(w_sv.shape()) + " differ");
  }
  Tensor product = MatMulNT(tape, w_kws, w_sv);
  return mode == OrthMode::kFrobenius ? FrobeniusSq(tape, product) : Sum(tape, product);
}

Tensor OrthPenalty(Tape* tape, const std::vector<GruLayerParams>& kws,
                   const std::vector<GruLayerParams>& sv, OrthMode mode) {
  if (kws.size() != sv.size()) {
    throw ShapeError("OrthPenalty: " + std::to_string(kws.size()) + " vs " +
                     std::to_string(sv.size()) + " GRU layers");
  }
  Tensor total;
  for (std::size_t l = 0; l < kws.size(); ++l) {
    auto wk = kws[l].weights();
    auto ws = sv[l].weights();
    for (std::size_t i = 0; i < 6; ++i) {
      Tensor term = OrthTerm(tape, wk[i], ws[i], mode);
      total = total.defined() ? Add(tape, total, term) : term;
    }
  }
  return total.defined() ? total : Tensor::Scalar(0.0);
}

double CrossBranchNorm(const std::vector<GruLayerParams>& kws,
                       const std::vector<GruLayerParams>& sv) {
  Tape tape(false);
  double total = 0.0;
  for (std::size_t l = 0; l < std::min(kws.size(), sv.size()); ++l) {
    auto wk = kws[l].weights();
    auto ws = sv[l].weights();
    for (std::size_t i = 0; i < 6; ++i) {
      total += std::sqrt(OrthTerm(&tape, wk[i], ws[i], OrthMode::kFrobenius).item());
    }
  }
  return total;
}

LossBreakdown TotalLoss(double l_ckws, double l_tkws, double l_csv, double l_tsv,
                        double l_orth, double lambda_orth) {
  LossBreakdown b{l_ckws, l_tkws, l_csv, l_tsv, l_orth, 0.0};
  b.total = l_ckws + l_tkws + l_csv + l_tsv + lambda_orth * l_orth;
  return b;
}

Tensor TotalLoss(Tape* tape, const Tensor& l_ckws, const Tensor& l_tkws,
                 const Tensor& l_csv, const Tensor& l_tsv, const Tensor& l_orth,
                 double lambda_orth, LossBreakdown* breakdown) {
  Tensor total = Add(tape, Add(tape, l_ckws, l_tkws), Add(tape, l_csv, l_tsv));
  double orth_value = l_orth.defined() ? l_orth.item() : 0.0;
  if (l_orth.defined() && lambda_orth != 0.0) {
    total = Add(tape, total, Scale(tape, l_orth, lambda_orth));
  }
  if (breakdown) {
    *breakdown = TotalLoss(l_ckws.item(), l_tkws.item(), l_csv.item(), l_tsv.item(),
                           orth_value, lambda_orth);
  }
  return total;
}

}  // namespace orthospot
