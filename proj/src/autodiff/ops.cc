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

#include "orthospot/autodiff/ops.h"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Core>

#include "orthospot/base/error.h"

namespace orthospot {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;

MatMap AsMat(std::span<double> s, std::size_t rows, std::size_t cols) {
  return MatMap(s.data(), static_cast<Eigen::Index>(rows),
                static_cast<Eigen::Index>(cols));
}

ConstMatMap AsMat(std::span<const double> s, std::size_t rows,
                  std::size_t cols) {
  return ConstMatMap(s.data(), static_cast<Eigen::Index>(rows),
                     static_cast<Eigen::Index>(cols));
}

[[noreturn]] void ShapeFail(const char* op, const Tensor& a, const Tensor& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " +
                   ShapeString(a.shape()) + " and " + ShapeString(b.shape()));
}

void RequireRank(const char* op, const Tensor& t, std::size_t rank) {
  if (t.rank() != rank) {
    throw ShapeError(std::string(op) + ": expected rank " +
                     std::to_string(rank) + ", got " + ShapeString(t.shape()));
  }
}

bool Tracks(const Tape* tape, std::initializer_list<const Tensor*> inputs) {
  if (!tape->recording()) return false;
  for (const Tensor* t : inputs) {
    if (t->requires_grad()) return true;
  }
  return false;
}

Tensor NewOutput(Shape shape, bool tracked) {
  return Tensor::Zeros(std::move(shape), tracked);
}

// Element-wise unary op with derivative expressed through input and output.
template <typename Fwd, typename Deriv>
Tensor Unary(Tape* tape, const Tensor& x, Fwd fwd, Deriv deriv) {
  bool tracked = Tracks(tape, {&x});
  Tensor out = NewOutput(x.shape(), tracked);
  auto xs = x.data();
  auto ys = out.data();
  for (std::size_t i = 0; i < xs.size(); ++i) ys[i] = fwd(xs[i]);
  if (tracked) {
    tape->Record([x, out, deriv]() mutable {
      if (!out.has_grad()) return;
      auto g = out.grad();
      auto xs = x.data();
      auto ys = out.data();
      std::vector<double> dx(xs.size());
      for (std::size_t i = 0; i < xs.size(); ++i) dx[i] = g[i] * deriv(xs[i], ys[i]);
      internal::AccumulateGrad(&x, dx);
    });
  }
  return out;
}

}  // namespace

namespace internal {

// Tensors are shared handles, so a copy writes into the same gradient buffer.
void AccumulateGrad(const Tensor* t, std::span<const double> src) {
  if (!t->requires_grad()) return;
  Tensor handle = *t;
  auto g = handle.grad();
  for (std::size_t i = 0; i < g.size(); ++i) g[i] += src[i];
  handle.mark_grad_touched();
}

}  // namespace internal

Tensor MatMul(Tape* tape, const Tensor& a, const Tensor& b) {
  RequireRank("MatMul", a, 2);
  RequireRank("MatMul", b, 2);
  if (a.dim(1) != b.dim(0)) ShapeFail("MatMul", a, b);
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  bool tracked = Tracks(tape, {&a, &b});
  Tensor out = NewOutput({m, n}, tracked);
  AsMat(out.data(), m, n).noalias() = AsMat(a.data(), m, k) * AsMat(b.data(), k, n);
  if (tracked) {
    tape->Record([a, b, out, m, k, n]() mutable {
      if (!out.has_grad()) return;
      auto g = AsMat(std::as_const(out).grad(), m, n);
      if (a.requires_grad()) {
        RowMat da = g * AsMat(std::as_const(b).data(), k, n).transpose();
        internal::AccumulateGrad(&a, {da.data(), static_cast<std::size_t>(da.size())});
      }
      if (b.requires_grad()) {
        RowMat db = AsMat(std::as_const(a).data(), m, k).transpose() * g;
        internal::AccumulateGrad(&b, {db.data(), static_cast<std::size_t>(db.size())});
      }
    });
  }
  return out;
}

Tensor MatMulNT(Tape* tape, const Tensor& a, const Tensor& b) {
  RequireRank("MatMulNT", a, 2);
  RequireRank("MatMulNT", b, 2);
  if (a.dim(1) != b.dim(1)) ShapeFail("MatMulNT", a, b);
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(0);
  bool tracked = Tracks(tape, {&a, &b});
  Tensor out = NewOutput({m, n}, tracked);
  AsMat(out.data(), m, n).noalias() =
      AsMat(a.data(), m, k) * AsMat(b.data(), n, k).transpose();
  if (tracked) {
    tape->Record([a, b, out, m, k, n]() mutable {
      if (!out.has_grad()) return;
      auto g = AsMat(std::as_const(out).grad(), m, n);
      if (a.requires_grad()) {
        RowMat da = g * AsMat(std::as_const(b).data(), n, k);
        internal::AccumulateGrad(&a, {da.data(), static_cast<std::size_t>(da.size())});
      }
      if (b.requires_grad()) {
        RowMat db = g.transpose() * AsMat(std::as_const(a).data(), m, k);
        internal::AccumulateGrad(&b, {db.data(), static_cast<std::size_t>(db.size())});
      }
    });
  }
  return out;
}

Tensor AddBias(Tape* tape, const Tensor& x, const Tensor& bias) {
  RequireRank("AddBias", bias, 1);
  if (x.rank() == 0 || x.shape().back() != bias.dim(0)) ShapeFail("AddBias", x, bias);
  const std::size_t c = bias.dim(0);
  const std::size_t rows = x.size() / c;
  bool tracked = Tracks(tape, {&x, &bias});
  Tensor out = NewOutput(x.shape(), tracked);
  auto xs = x.data();
  auto bs = bias.data();
  auto ys = out.data();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < c; ++j) ys[r * c + j] = xs[r * c + j] + bs[j];
  }
  if (tracked) {
    tape->Record([x, bias, out, rows, c]() mutable {
      if (!out.has_grad()) return;
      auto g = std::as_const(out).grad();
      internal::AccumulateGrad(&x, g);
      if (bias.requires_grad()) {
        std::vector<double> db(c, 0.0);
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t j = 0; j < c; ++j) db[j] += g[r * c + j];
        }
        internal::AccumulateGrad(&bias, db);
      }
    });
  }
  return out;
}

namespace {

template <typename Combine, typename GradA, typename GradB>
Tensor Binary(const char* name, Tape* tape, const Tensor& a, const Tensor& b,
              Combine combine, GradA grad_a, GradB grad_b) {
  if (a.shape() != b.shape()) ShapeFail(name, a, b);
  bool tracked = Tracks(tape, {&a, &b});
  Tensor out = NewOutput(a.shape(), tracked);
  auto as = a.data();
  auto bs = b.data();
  auto ys = out.data();
  for (std::size_t i = 0; i < ys.size(); ++i) ys[i] = combine(as[i], bs[i]);
  if (tracked) {
    tape->Record([a, b, out, grad_a, grad_b]() mutable {
      if (!out.has_grad()) return;
      auto g = std::as_const(out).grad();
      auto as = std::as_const(a).data();
      auto bs = std::as_const(b).data();
      std::vector<double> d(g.size());
      if (a.requires_grad()) {
        for (std::size_t i = 0; i < g.size(); ++i) d[i] = grad_a(g[i], as[i], bs[i]);
        internal::AccumulateGrad(&a, d);
      }
      if (b.requires_grad()) {
        for (std::size_t i = 0; i < g.size(); ++i) d[i] = grad_b(g[i], as[i], bs[i]);
        internal::AccumulateGrad(&b, d);
      }
    });
  }
  return out;
}

}  // namespace

Tensor Add(Tape* tape, const Tensor& a, const Tensor& b) {
  return Binary(
      "Add", tape, a, b, [](double x, double y) { return x + y; },
      [](double g, double, double) { return g; },
      [](double g, double, double) { return g; });
}

Tensor Sub(Tape* tape, const Tensor& a, const Tensor& b) {
  return Binary(
      "Sub", tape, a, b, [](double x, double y) { return x - y; },
      [](double g, double, double) { return g; },
      [](double g, double, double) { return -g; });
}

Tensor Hadamard(Tape* tape, const Tensor& a, const Tensor& b) {
  return Binary(
      "Hadamard", tape, a, b, [](double x, double y) { return x * y; },
      [](double g, double, double y) { return g * y; },
      [](double g, double x, double) { return g * x; });
}

Tensor Scale(Tape* tape, const Tensor& a, double factor) {
  return Unary(
      tape, a, [factor](double x) { return factor * x; },
      [factor](double, double) { return factor; });
}

Tensor AddScalar(Tape* tape, const Tensor& a, double offset) {
  return Unary(
      tape, a, [offset](double x) { return x + offset; },
      [](double, double) { return 1.0; });
}

Tensor Sigmoid(Tape* tape, const Tensor& x) {
  return Unary(
      tape, x, [](double v) { return 1.0 / (1.0 + std::exp(-v)); },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor Tanh(Tape* tape, const Tensor& x) {
  return Unary(
      tape, x, [](double v) { return std::tanh(v); },
      [](double, double y) { return 1.0 - y * y; });
}

Tensor Relu(Tape* tape, const Tensor& x) {
  return Unary(
      tape, x, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor Hinge(Tape* tape, const Tensor& x, double margin) {
  return Unary(
      tape, x, [margin](double v) { return std::max(0.0, v + margin); },
      [margin](double v, double) { return v + margin > 0.0 ? 1.0 : 0.0; });
}

Tensor Sum(Tape* tape, const Tensor& x) {
  bool tracked = Tracks(tape, {&x});
  double total = 0.0;
  for (double v : x.data()) total += v;
  Tensor out = Tensor::Scalar(total, tracked);
  if (tracked) {
    tape->Record([x, out]() mutable {
      if (!out.has_grad()) return;
      std::vector<double> dx(x.size(), std::as_const(out).grad()[0]);
      internal::AccumulateGrad(&x, dx);
    });
  }
  return out;
}

Tensor Mean(Tape* tape, const Tensor& x) {
  if (x.size() == 0) throw ShapeError("Mean of empty tensor");
  return Scale(tape, Sum(tape, x), 1.0 / static_cast<double>(x.size()));
}

Tensor FrobeniusSq(Tape* tape, const Tensor& x) {
  bool tracked = Tracks(tape, {&x});
  double total = 0.0;
  for (double v : x.data()) total += v * v;
  Tensor out = Tensor::Scalar(total, tracked);
  if (tracked) {
    tape->Record([x, out]() mutable {
      if (!out.has_grad()) return;
      double g = std::as_const(out).grad()[0];
      auto xs = std::as_const(x).data();
      std::vector<double> dx(xs.size());
      for (std::size_t i = 0; i < xs.size(); ++i) dx[i] = 2.0 * g * xs[i];
      internal::AccumulateGrad(&x, dx);
    });
  }
  return out;
}

Tensor MeanOverTime(Tape* tape, const Tensor& x) {
  RequireRank("MeanOverTime", x, 3);
  const std::size_t b = x.dim(0), t = x.dim(1), c = x.dim(2);
  if (t == 0) throw ShapeError("MeanOverTime over zero frames");
  bool tracked = Tracks(tape, {&x});
  Tensor out = NewOutput({b, c}, tracked);
  auto xs = x.data();
  auto ys = out.data();
  const double inv = 1.0 / static_cast<double>(t);
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t s = 0; s < t; ++s) {
      const double* row = &xs[(i * t + s) * c];
      for (std::size_t j = 0; j < c; ++j) ys[i * c + j] += row[j];
    }
    for (std::size_t j = 0; j < c; ++j) ys[i * c + j] *= inv;
  }
  if (tracked) {
    tape->Record([x, out, b, t, c, inv]() mutable {
      if (!out.has_grad()) return;
      auto g = std::as_const(out).grad();
      std::vector<double> dx(b * t * c);
      for (std::size_t i = 0; i < b; ++i) {
        for (std::size_t s = 0; s < t; ++s) {
          for (std::size_t j = 0; j < c; ++j) dx[(i * t + s) * c + j] = g[i * c + j] * inv;
        }
      }
      internal::AccumulateGrad(&x, dx);
    });
  }
  return out;
}

namespace {

// Rows are (batch, frame); columns are (in_channel, tap).
RowMat Im2Col(std::span<const double> xs, std::size_t b, std::size_t t,
              std::size_t cin, std::size_t k) {
  const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>((k - 1) / 2);
  RowMat cols = RowMat::Zero(static_cast<Eigen::Index>(b * t),
                             static_cast<Eigen::Index>(cin * k));
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t s = 0; s < t; ++s) {
      double* dst = cols.data() + (i * t + s) * cin * k;
      for (std::size_t tap = 0; tap < k; ++tap) {
        std::ptrdiff_t src = static_cast<std::ptrdiff_t>(s + tap) - pad;
        if (src < 0 || src >= static_cast<std::ptrdiff_t>(t)) continue;
        const double* in = &xs[(i * t + static_cast<std::size_t>(src)) * cin];
        for (std::size_t c = 0; c < cin; ++c) dst[c * k + tap] = in[c];
      }
    }
  }
  return cols;
}

}  // namespace

Tensor Conv1d(Tape* tape, const Tensor& x, const Tensor& kernel,
              const Tensor& bias) {
  RequireRank("Conv1d", x, 3);
  RequireRank("Conv1d", kernel, 3);
  RequireRank("Conv1d", bias, 1);
  if (kernel.dim(1) != x.dim(2)) ShapeFail("Conv1d", x, kernel);
  if (bias.dim(0) != kernel.dim(0)) ShapeFail("Conv1d", kernel, bias);
  const std::size_t b = x.dim(0), t = x.dim(1), cin = x.dim(2);
  const std::size_t cout = kernel.dim(0), k = kernel.dim(2);
  bool tracked = Tracks(tape, {&x, &kernel, &bias});
  Tensor out = NewOutput({b, t, cout}, tracked);
  {
    RowMat cols = Im2Col(x.data(), b, t, cin, k);
    auto y = AsMat(out.data(), b * t, cout);
    y.noalias() = cols * AsMat(kernel.data(), cout, cin * k).transpose();
    auto bs = bias.data();
    for (Eigen::Index r = 0; r < y.rows(); ++r) {
      for (std::size_t j = 0; j < cout; ++j) y(r, static_cast<Eigen::Index>(j)) += bs[j];
    }
  }
  if (tracked) {
    tape->Record([x, kernel, bias, out, b, t, cin, cout, k]() mutable {
      if (!out.has_grad()) return;
      auto g = AsMat(std::as_const(out).grad(), b * t, cout);
      if (kernel.requires_grad()) {
        RowMat cols = Im2Col(std::as_const(x).data(), b, t, cin, k);
        RowMat dk = g.transpose() * cols;
        internal::AccumulateGrad(&kernel, {dk.data(), static_cast<std::size_t>(dk.size())});
      }
      if (bias.requires_grad()) {
        Eigen::Matrix<double, 1, Eigen::Dynamic> db = g.colwise().sum();
        internal::AccumulateGrad(&bias, {db.data(), static_cast<std::size_t>(db.size())});
      }
      if (x.requires_grad()) {
        RowMat dcols = g * AsMat(std::as_const(kernel).data(), cout, cin * k);
        std::vector<double> dx(b * t * cin, 0.0);
        const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>((k - 1) / 2);
        for (std::size_t i = 0; i < b; ++i) {
          for (std::size_t s = 0; s < t; ++s) {
            const double* src = dcols.data() + (i * t + s) * cin * k;
            for (std::size_t tap = 0; tap < k; ++tap) {
              std::ptrdiff_t frame = static_cast<std::ptrdiff_t>(s + tap) - pad;
              if (frame < 0 || frame >= static_cast<std::ptrdiff_t>(t)) continue;
              double* dst = &dx[(i * t + static_cast<std::size_t>(frame)) * cin];
              for (std::size_t c = 0; c < cin; ++c) dst[c] += src[c * k + tap];
            }
          }
        }
        internal::AccumulateGrad(&x, dx);
      }
    });
  }
  return out;
}

Tensor SoftmaxXent(Tape* tape, const Tensor& logits,
                   std::span<const std::size_t> targets,
                   std::span<const double> weights) {
  RequireRank("SoftmaxXent", logits, 2);
  const std::size_t b = logits.dim(0), c = logits.dim(1);
  if (targets.size() != b || weights.size() != b) {
    throw ShapeError("SoftmaxXent: " + std::to_string(targets.size()) +
                     " targets / " + std::to_string(weights.size()) +
                     " weights for logits " + ShapeString(logits.shape()));
  }
  auto zs = logits.data();
  std::vector<double> probs(b * c);
  double total = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    if (targets[i] >= c) {
      throw ShapeError("SoftmaxXent: target " + std::to_string(targets[i]) +
                       " out of range for " + std::to_string(c) + " classes");
    }
    const double* row = &zs[i * c];
    double peak = *std::max_element(row, row + c);
    double denom = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      probs[i * c + j] = std::exp(row[j] - peak);
      denom += probs[i * c + j];
    }
    for (std::size_t j = 0; j < c; ++j) probs[i * c + j] /= denom;
    total += weights[i] * (std::log(denom) - (row[targets[i]] - peak));
  }
  bool tracked = Tracks(tape, {&logits});
  Tensor out = Tensor::Scalar(total, tracked);
  if (tracked) {
    std::vector<std::size_t> tgt(targets.begin(), targets.end());
    std::vector<double> w(weights.begin(), weights.end());
    tape->Record([logits, out, probs = std::move(probs), tgt = std::move(tgt),
                  w = std::move(w), b, c]() mutable {
      if (!out.has_grad()) return;
      double g = std::as_const(out).grad()[0];
      std::vector<double> dz(b * c);
      for (std::size_t i = 0; i < b; ++i) {
        for (std::size_t j = 0; j < c; ++j) {
          double onehot = j == tgt[i] ? 1.0 : 0.0;
          dz[i * c + j] = g * w[i] * (probs[i * c + j] - onehot);
        }
      }
      internal::AccumulateGrad(&logits, dz);
    });
  }
  return out;
}

Tensor GatherRows(Tape* tape, const Tensor& x,
                  std::span<const std::size_t> index) {
  RequireRank("GatherRows", x, 2);
  const std::size_t n = x.dim(0), c = x.dim(1), m = index.size();
  for (std::size_t r : index) {
    if (r >= n) {
      throw ShapeError("GatherRows: row " + std::to_string(r) +
                       " out of range for " + ShapeString(x.shape()));
    }
  }
  bool tracked = Tracks(tape, {&x});
  Tensor out = NewOutput({m, c}, tracked);
  auto xs = x.data();
  auto ys = out.data();
  for (std::size_t i = 0; i < m; ++i) {
    std::copy_n(&xs[index[i] * c], c, &ys[i * c]);
  }
  if (tracked) {
    std::vector<std::size_t> idx(index.begin(), index.end());
    tape->Record([x, out, idx = std::move(idx), n, c]() mutable {
      if (!out.has_grad()) return;
      auto g = std::as_const(out).grad();
      std::vector<double> dx(n * c, 0.0);
      for (std::size_t i = 0; i < idx.size(); ++i) {
        for (std::size_t j = 0; j < c; ++j) dx[idx[i] * c + j] += g[i * c + j];
      }
      internal::AccumulateGrad(&x, dx);
    });
  }
  return out;
}

Tensor CosineRows(Tape* tape, const Tensor& a, const Tensor& b,
                  std::size_t* degenerate) {
  RequireRank("CosineRows", a, 2);
  if (a.shape() != b.shape()) ShapeFail("CosineRows", a, b);
  const std::size_t m = a.dim(0), c = a.dim(1);
  bool tracked = Tracks(tape, {&a, &b});
  Tensor out = NewOutput({m}, tracked);
  auto as = a.data();
  auto bs = b.data();
  auto ys = out.data();
  std::vector<double> norm_a(m), norm_b(m);
  for (std::size_t i = 0; i < m; ++i) {
    double dot = 0.0, aa = 0.0, bb = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      dot += as[i * c + j] * bs[i * c + j];
      aa += as[i * c + j] * as[i * c + j];
      bb += bs[i * c + j] * bs[i * c + j];
    }
    norm_a[i] = std::sqrt(aa);
    norm_b[i] = std::sqrt(bb);
    if (norm_a[i] == 0.0 || norm_b[i] == 0.0) {
      ys[i] = 0.0;
      if (degenerate) ++*degenerate;
    } else {
      ys[i] = dot / (norm_a[i] * norm_b[i]);
    }
  }
  if (tracked) {
    tape->Record([a, b, out, norm_a = std::move(norm_a),
                  norm_b = std::move(norm_b), m, c]() mutable {
      if (!out.has_grad()) return;
      auto g = std::as_const(out).grad();
      auto as = std::as_const(a).data();
      auto bs = std::as_const(b).data();
      auto ys = std::as_const(out).data();
      std::vector<double> da(m * c, 0.0), db(m * c, 0.0);
      for (std::size_t i = 0; i < m; ++i) {
        if (norm_a[i] == 0.0 || norm_b[i] == 0.0) continue;
        const double inv_ab = 1.0 / (norm_a[i] * norm_b[i]);
        const double inv_aa = 1.0 / (norm_a[i] * norm_a[i]);
        const double inv_bb = 1.0 / (norm_b[i] * norm_b[i]);
        for (std::size_t j = 0; j < c; ++j) {
          const std::size_t at = i * c + j;
          da[at] = g[i] * (bs[at] * inv_ab - ys[i] * as[at] * inv_aa);
          db[at] = g[i] * (as[at] * inv_ab - ys[i] * bs[at] * inv_bb);
        }
      }
      internal::AccumulateGrad(&a, da);
      internal::AccumulateGrad(&b, db);
    });
  }
  return out;
}

}  // namespace orthospot
