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

#include "orthospot/model/gru.h"

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>
#include <string>

#include <Eigen/Core>

#include "orthospot/autodiff/ops.h"
#include "orthospot/base/error.h"

namespace orthospot {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMatMap = Eigen::Map<const RowMat>;
using Idx = Eigen::Index;

ConstMatMap View(const Tensor& t, std::size_t rows, std::size_t cols) {
  return ConstMatMap(t.data().data(), static_cast<Idx>(rows), static_cast<Idx>(cols));
}

void FillGlorot(Tensor* t, std::size_t fan_in, std::size_t fan_out, Rng* rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (double& v : t->data()) v = Uniform(rng, -bound, bound);
}

// Stacks three hidden x k blocks into a 3H x k matrix.
RowMat Stack3(const Tensor& a, const Tensor& b, const Tensor& c) {
  const std::size_t h = a.dim(0), k = a.dim(1);
  RowMat out(static_cast<Idx>(3 * h), static_cast<Idx>(k));
  out.topRows(static_cast<Idx>(h)) = View(a, h, k);
  out.middleRows(static_cast<Idx>(h), static_cast<Idx>(h)) = View(b, h, k);
  out.bottomRows(static_cast<Idx>(h)) = View(c, h, k);
  return out;
}

Eigen::Matrix<double, 1, Eigen::Dynamic> StackBias(const Tensor& a, const Tensor& b,
                                                    const Tensor& c) {
  const std::size_t h = a.size();
  Eigen::Matrix<double, 1, Eigen::Dynamic> out(static_cast<Idx>(3 * h));
  for (std::size_t j = 0; j < h; ++j) {
    out(static_cast<Idx>(j)) = a.data()[j];
    out(static_cast<Idx>(h + j)) = b.data()[j];
    out(static_cast<Idx>(2 * h + j)) = c.data()[j];
  }
  return out;
}

using RowArr = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Written with exp so Eigen can vectorize them.
template <typename Expr>
RowArr Logistic(const Expr& a) {
  return 1.0 / (1.0 + (-a).exp());
}

template <typename Expr>
RowArr TanhOf(const Expr& a) {
  return 1.0 - 2.0 / ((2.0 * a).exp() + 1.0);
}

// [B, T, C] batch-major values -> [T * B, C] time-major matrix.
RowMat ToTimeMajor(std::span<const double> v, std::size_t batch, std::size_t steps,
                   std::size_t cols) {
  RowMat out(static_cast<Idx>(steps * batch), static_cast<Idx>(cols));
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t t = 0; t < steps; ++t) {
      const double* src = v.data() + (b * steps + t) * cols;
      std::copy(src, src + cols, out.data() + (t * batch + b) * cols);
    }
  }
  return out;
}

void FromTimeMajor(const RowMat& m, std::size_t batch, std::size_t steps,
                   std::size_t cols, std::span<double> out) {
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t t = 0; t < steps; ++t) {
      const double* src = m.data() + (t * batch + b) * cols;
      std::copy(src, src + cols, out.data() + (b * steps + t) * cols);
    }
  }
}

}  // namespace

GruLayerParams GruLayerParams::Zeros(std::size_t input, std::size_t hidden,
                                     bool requires_grad) {
  if (input == 0 || hidden == 0) throw ShapeError("GRU sizes must be positive");
  GruLayerParams p;
  for (Tensor* w : {&p.w_ir, &p.w_iz, &p.w_in}) *w = Tensor::Zeros({hidden, input}, requires_grad);
  for (Tensor* w : {&p.w_hr, &p.w_hz, &p.w_hn}) *w = Tensor::Zeros({hidden, hidden}, requires_grad);
  for (Tensor* b : {&p.b_ir, &p.b_iz, &p.b_in, &p.b_hr, &p.b_hz, &p.b_hn}) {
    *b = Tensor::Zeros({hidden}, requires_grad);
  }
  return p;
}

GruLayerParams GruLayerParams::Glorot(std::size_t input, std::size_t hidden, Rng* rng) {
  GruLayerParams p = Zeros(input, hidden);
  for (Tensor* w : {&p.w_ir, &p.w_iz, &p.w_in}) FillGlorot(w, input, hidden, rng);
  for (Tensor* w : {&p.w_hr, &p.w_hz, &p.w_hn}) FillGlorot(w, hidden, hidden, rng);
  return p;
}

std::array<Tensor, 6> GruLayerParams::weights() const {
  return {w_ir, w_iz, w_in, w_hr, w_hz, w_hn};
}

std::array<Tensor, 6> GruLayerParams::biases() const {
  return {b_ir, b_iz, b_in, b_hr, b_hz, b_hn};
}

const std::array<std::string_view, 6>& GruLayerParams::WeightNames() {
  static const std::array<std::string_view, 6> names = {"w_ir", "w_iz", "w_in",
                                                        "w_hr", "w_hz", "w_hn"};
  return names;
}

const std::array<std::string_view, 6>& GruLayerParams::BiasNames() {
  static const std::array<std::string_view, 6> names = {"b_ir", "b_iz", "b_in",
                                                        "b_hr", "b_hz", "b_hn"};
  return names;
}

void GruLayerParams::Validate() const {
  const std::size_t h = w_ir.dim(0), in = w_ir.dim(1);
  for (const Tensor& w : {w_ir, w_iz, w_in}) {
    if (w.shape() != Shape{h, in}) {
      throw ShapeError("GRU input weight " + ShapeString(w.shape()) + " vs " +
                       ShapeString({h, in}));
    }
  }
  for (const Tensor& w : {w_hr, w_hz, w_hn}) {
    if (w.shape() != Shape{h, h}) {
      throw ShapeError("GRU recurrent weight " + ShapeString(w.shape()) + " vs " +
                       ShapeString({h, h}));
    }
  }
  for (const Tensor& b : biases()) {
    if (b.shape() != Shape{h}) {
      throw ShapeError("GRU bias " + ShapeString(b.shape()) + " vs " + ShapeString({h}));
    }
  }
}

Tensor GruStep(Tape* tape, const GruLayerParams& p, const Tensor& x,
               const Tensor& h_prev) {
  p.Validate();
  auto affine = [tape](const Tensor& in, const Tensor& w, const Tensor& b) {
    return AddBias(tape, MatMulNT(tape, in, w), b);
  };
  Tensor r = Sigmoid(tape, Add(tape, affine(x, p.w_ir, p.b_ir), affine(h_prev, p.w_hr, p.b_hr)));
  Tensor z = Sigmoid(tape, Add(tape, affine(x, p.w_iz, p.b_iz), affine(h_prev, p.w_hz, p.b_hz)));
  Tensor n = Tanh(tape, Add(tape, affine(x, p.w_in, p.b_in),
                            Hadamard(tape, r, affine(h_prev, p.w_hn, p.b_hn))));
  Tensor keep = AddScalar(tape, Scale(tape, z, -1.0), 1.0);
  return Add(tape, Hadamard(tape, keep, n), Hadamard(tape, z, h_prev));
}

Tensor GruSequence(Tape* tape, const GruLayerParams& p, const Tensor& x) {
  p.Validate();
  if (x.rank() != 3 || x.dim(2) != p.input_size()) {
    throw ShapeError("GruSequence: input " + ShapeString(x.shape()) +
                     " does not match weights " + ShapeString(p.w_ir.shape()));
  }
  const std::size_t batch = x.dim(0), steps = x.dim(1), in = x.dim(2);
  const std::size_t hid = p.hidden_size();
  if (steps == 0) throw ShapeError("GruSequence over zero frames");
  const Idx B = static_cast<Idx>(batch), H = static_cast<Idx>(hid);
  const Idx TB = static_cast<Idx>(steps * batch);

  bool tracked = tape->recording();
  if (tracked) {
    tracked = x.requires_grad();
    for (const Tensor& t : p.weights()) tracked = tracked || t.requires_grad();
    for (const Tensor& t : p.biases()) tracked = tracked || t.requires_grad();
  }

  const RowMat w_in = Stack3(p.w_ir, p.w_iz, p.w_in);
  const RowMat w_hid = Stack3(p.w_hr, p.w_hz, p.w_hn);
  const auto b_in = StackBias(p.b_ir, p.b_iz, p.b_in);
  const auto b_hid = StackBias(p.b_hr, p.b_hz, p.b_hn);

  // Everything below is time-major: row t * B + b.
  RowMat xt = ToTimeMajor(x.data(), batch, steps, in);
  RowMat gi = xt * w_in.transpose();
  gi.rowwise() += b_in;

  RowMat h_all(TB, H);
  RowMat r_all, z_all, n_all, hn_all;
  if (tracked) {
    r_all.resize(TB, H);
    z_all.resize(TB, H);
    n_all.resize(TB, H);
    hn_all.resize(TB, H);
  }
  RowMat h_prev = RowMat::Zero(B, H);
  RowMat gh(B, 3 * H);
  for (std::size_t t = 0; t < steps; ++t) {
    const Idx row = static_cast<Idx>(t) * B;
    gh.noalias() = h_prev * w_hid.transpose();
    gh.rowwise() += b_hid;
    auto gi_t = gi.middleRows(row, B);
    RowArr r = Logistic(gi_t.leftCols(H).array() + gh.leftCols(H).array());
    RowArr z = Logistic(gi_t.middleCols(H, H).array() + gh.middleCols(H, H).array());
    auto hn = gh.rightCols(H).array();
    RowArr n = TanhOf(gi_t.rightCols(H).array() + r * hn);
    h_all.middleRows(row, B).array() = (1.0 - z) * n + z * h_prev.array();
    if (tracked) {
      r_all.middleRows(row, B) = r.matrix();
      z_all.middleRows(row, B) = z.matrix();
      n_all.middleRows(row, B) = n.matrix();
      hn_all.middleRows(row, B) = hn.matrix();
    }
    h_prev = h_all.middleRows(row, B);
  }

  Tensor out = Tensor::Zeros({batch, steps, hid}, tracked);
  FromTimeMajor(h_all, batch, steps, hid, out.data());

  if (tracked) {
    tape->Record([p, x, out, xt = std::move(xt), h_all = std::move(h_all),
                  r_all = std::move(r_all), z_all = std::move(z_all),
                  n_all = std::move(n_all), hn_all = std::move(hn_all), batch, steps,
                  in, hid]() mutable {
      if (!out.has_grad()) return;
      const Idx B = static_cast<Idx>(batch), H = static_cast<Idx>(hid);
      const Idx TB = static_cast<Idx>(steps * batch);
      const RowMat w_in = Stack3(p.w_ir, p.w_iz, p.w_in);
      const RowMat w_hid = Stack3(p.w_hr, p.w_hz, p.w_hn);
      const RowMat d_out = ToTimeMajor(std::as_const(out).grad(), batch, steps, hid);

      // d_gi holds the pre-activation gradients; the recurrent ones differ
      // only in the candidate block, which is scaled by r.
      RowMat d_gi(TB, 3 * H);
      RowMat d_gh(B, 3 * H);
      RowMat d_next = RowMat::Zero(B, H);
      for (std::size_t tt = steps; tt-- > 0;) {
        const Idx row = static_cast<Idx>(tt) * B;
        auto r = r_all.middleRows(row, B).array();
        auto z = z_all.middleRows(row, B).array();
        auto n = n_all.middleRows(row, B).array();
        auto hn = hn_all.middleRows(row, B).array();
        RowArr hp = tt == 0 ? RowArr::Zero(B, H)
                            : RowArr(h_all.middleRows(row - B, B).array());
        RowArr dh = d_out.middleRows(row, B).array() + d_next.array();
        RowArr da_n = dh * (1.0 - z) * (1.0 - n * n);
        RowArr da_r = da_n * hn * r * (1.0 - r);
        RowArr da_z = dh * (hp - n) * z * (1.0 - z);
        auto gi_t = d_gi.middleRows(row, B);
        gi_t.leftCols(H) = da_r.matrix();
        gi_t.middleCols(H, H) = da_z.matrix();
        gi_t.rightCols(H) = da_n.matrix();
        d_gh.leftCols(2 * H) = gi_t.leftCols(2 * H);
        d_gh.rightCols(H) = (da_n * r).matrix();
        d_next = (dh * z).matrix();
        d_next.noalias() += d_gh * w_hid;
      }

      RowMat d_gh_all = d_gi;
      d_gh_all.rightCols(H).array() *= r_all.array();
      RowMat d_wh = RowMat::Zero(3 * H, H);
      if (steps > 1) {
        d_wh.noalias() = d_gh_all.bottomRows(TB - B).transpose() * h_all.topRows(TB - B);
      }
      Eigen::Matrix<double, 1, Eigen::Dynamic> d_bh = d_gh_all.colwise().sum();
      RowMat d_wi = d_gi.transpose() * xt;
      Eigen::Matrix<double, 1, Eigen::Dynamic> d_bi = d_gi.colwise().sum();

      auto block = [hid](const RowMat& m, std::size_t k, std::size_t cols) {
        return std::span<const double>(m.data() + k * hid * cols, hid * cols);
      };
      internal::AccumulateGrad(&p.w_ir, block(d_wi, 0, in));
      internal::AccumulateGrad(&p.w_iz, block(d_wi, 1, in));
      internal::AccumulateGrad(&p.w_in, block(d_wi, 2, in));
      internal::AccumulateGrad(&p.w_hr, block(d_wh, 0, hid));
      internal::AccumulateGrad(&p.w_hz, block(d_wh, 1, hid));
      internal::AccumulateGrad(&p.w_hn, block(d_wh, 2, hid));
      internal::AccumulateGrad(&p.b_ir, {d_bi.data(), hid});
      internal::AccumulateGrad(&p.b_iz, {d_bi.data() + hid, hid});
      internal::AccumulateGrad(&p.b_in, {d_bi.data() + 2 * hid, hid});
      internal::AccumulateGrad(&p.b_hr, {d_bh.data(), hid});
      internal::AccumulateGrad(&p.b_hz, {d_bh.data() + hid, hid});
      internal::AccumulateGrad(&p.b_hn, {d_bh.data() + 2 * hid, hid});
      if (x.requires_grad()) {
        RowMat dxt = d_gi * w_in;
        std::vector<double> dx(batch * steps * in);
        FromTimeMajor(dxt, batch, steps, in, dx);
        internal::AccumulateGrad(&x, dx);
      }
    });
  }
  return out;
}

}  // namespace orthospot
