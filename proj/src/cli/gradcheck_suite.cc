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

#include "orthospot/cli/gradcheck_suite.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>
#include <utility>

#include "orthospot/autodiff/ops.h"
#include "orthospot/base/rng.h"
#include "orthospot/losses/losses.h"
#include "orthospot/model/gru.h"
#include "orthospot/model/model.h"

namespace orthospot {

namespace {

struct Problem {
  ScalarFunction f;
  std::vector<Tensor> inputs;
};

using CaseBuilder = std::function<Problem(Rng*)>;

Tensor RandomTensor(const Shape& shape, Rng* rng, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(NumElements(shape));
  for (double& x : v) x = Uniform(rng, lo, hi);
  return Tensor::FromData(shape, std::move(v), true);
}

// Values with |x - center| >= 0.1, keeping finite differences off a kink.
Tensor AwayFrom(const Shape& shape, double center, Rng* rng) {
  std::vector<double> v(NumElements(shape));
  for (double& x : v) {
    double mag = Uniform(rng, 0.1, 1.0);
    x = center + (UniformUnit(rng) < 0.5 ? -mag : mag);
  }
  return Tensor::FromData(shape, std::move(v), true);
}

// Contracts an output with fixed random weights so every element matters.
Tensor Project(Tape* tape, const Tensor& y, const Tensor& w) {
  return Sum(tape, Hadamard(tape, y, w));
}

template <typename Op>
Problem Unary(Rng* rng, Tensor x, Op op) {
  Tensor w = RandomTensor(x.shape(), rng);
  w.set_requires_grad(false);
  return {[=](Tape* t) { return Project(t, op(t, x), w); }, {x}};
}

template <typename Op>
Problem Binary(Rng* rng, Tensor a, Tensor b, const Shape& out_shape, Op op) {
  Tensor w = RandomTensor(out_shape, rng);
  w.set_requires_grad(false);
  return {[=](Tape* t) { return Project(t, op(t, a, b), w); }, {a, b}};
}

// Sigmoid whose backward drops the (1 - s) factor.
Tensor BrokenSigmoid(Tape* tape, const Tensor& x) {
  Tensor out = Sigmoid(tape, x);
  Tensor y = Tensor::FromData(out.shape(), {out.data().begin(), out.data().end()}, true);
  if (tape->recording()) {
    tape->Record([x, y]() {
      if (!y.has_grad()) return;
      auto g = y.grad();
      auto s = y.data();
      std::vector<double> dx(s.size());
      for (std::size_t i = 0; i < s.size(); ++i) dx[i] = g[i] * s[i];
      internal::AccumulateGrad(&x, dx);
    });
  }
  return y;
}

std::vector<Tensor> LayerTensors(const GruLayerParams& p) {
  std::vector<Tensor> out;
  for (const Tensor& t : p.weights()) out.push_back(t);
  for (const Tensor& t : p.biases()) out.push_back(t);
  return out;
}

GruLayerParams RandomLayer(std::size_t in, std::size_t hid, Rng* rng) {
  GruLayerParams p = GruLayerParams::Zeros(in, hid);
  for (Tensor t : LayerTensors(p)) {
    for (double& v : t.data()) v = Uniform(rng, -0.6, 0.6);
  }
  return p;
}

Problem TinyModel(Rng* rng) {
  ModelConfig config;
  config.input_dim = 4;
  config.tconv_channels = 3;
  config.tconv_width = 3;
  config.hidden = 8;
  config.gru_layers = 2;
  config.num_keywords = 3;
  config.num_speakers = 4;
  ModelParams params = InitParams(config, rng->operator()());
  std::vector<Tensor> inputs;
  for (auto& [name, t] : params.Named()) {
    // Nonzero biases so every path carries signal.
    if (name.find("b_") != std::string::npos || name.find("bias") != std::string::npos) {
      for (double& v : t.data()) v = Uniform(rng, -0.3, 0.3);
    }
    inputs.push_back(t);
  }
  Tensor features = RandomTensor({5, 5, 4}, rng);
  features.set_requires_grad(false);
  // Anchor and its four scenario samples.
  const std::vector<std::size_t> kw = {0, 0, 0, 1, 2};
  const std::vector<std::size_t> spk = {0, 0, 1, 0, 3};
  const std::vector<double> weights(5, 0.2);
  ScalarFunction f = [=](Tape* t) {
    ModelOutput out = Forward(t, params, features);
    std::vector<std::size_t> a = {0, 0}, p_kw = {1, 2}, n_kw = {3, 4};
    std::vector<std::size_t> p_sv = {1, 3}, n_sv = {2, 4};
    auto triplet = [&](const Tensor& emb, const std::vector<std::size_t>& p,
                       const std::vector<std::size_t>& n) {
      return Sum(t, TripletLoss(t, GatherRows(t, emb, a), GatherRows(t, emb, p),
                                GatherRows(t, emb, n), 0.5));
    };
    Tensor orth = OrthPenalty(t, params.gru_kws, params.gru_sv, OrthMode::kFrobenius);
    return TotalLoss(t, SoftmaxXent(t, out.kws.logits, kw, weights),
                     triplet(out.kws.embedding, p_kw, n_kw),
                     SoftmaxXent(t, out.sv.logits, spk, weights),
                     triplet(out.sv.embedding, p_sv, n_sv), orth, 1.0, nullptr);
  };
  return {f, inputs};
}

Problem Orth(Rng* rng, OrthMode mode) {
  std::vector<GruLayerParams> kws = {RandomLayer(4, 3, rng), RandomLayer(3, 3, rng)};
  std::vector<GruLayerParams> sv = {RandomLayer(4, 3, rng), RandomLayer(3, 3, rng)};
  std::vector<Tensor> inputs;
  for (const auto* stack : {&kws, &sv}) {
    for (const auto& layer : *stack) {
      for (const Tensor& w : layer.weights()) inputs.push_back(w);
    }
  }
  return {[=](Tape* t) { return OrthPenalty(t, kws, sv, mode); }, inputs};
}

std::vector<std::pair<std::string, CaseBuilder>> Cases(bool inject_fault) {
  std::vector<std::pair<std::string, CaseBuilder>> cases = {
      {"matmul",
       [](Rng* r) {
         return Binary(r, RandomTensor({3, 4}, r), RandomTensor({4, 2}, r), {3, 2},
                       [](Tape* t, const Tensor& a, const Tensor& b) { return MatMul(t, a, b); });
       }},
      {"matmul_nt",
       [](Rng* r) {
         return Binary(r, RandomTensor({3, 4}, r), RandomTensor({2, 4}, r), {3, 2},
                       [](Tape* t, const Tensor& a, const Tensor& b) { return MatMulNT(t, a, b); });
       }},
      {"add_bias",
       [](Rng* r) {
         return Binary(r, RandomTensor({2, 3, 4}, r), RandomTensor({4}, r), {2, 3, 4},
                       [](Tape* t, const Tensor& a, const Tensor& b) { return AddBias(t, a, b); });
       }},
      {"add",
       [](Rng* r) {
         return Binary(r, RandomTensor({3, 3}, r), RandomTensor({3, 3}, r), {3, 3},
                       [](Tape* t, const Tensor& a, const Tensor& b) { return Add(t, a, b); });
       }},
      {"sub",
       [](Rng* r) {
         return Binary(r, RandomTensor({3, 3}, r), RandomTensor({3, 3}, r), {3, 3},
                       [](Tape* t, const Tensor& a, const Tensor& b) { return Sub(t, a, b); });
       }},
      {"hadamard",
       [](Rng* r) {
         return Binary(r, RandomTensor({3, 3}, r), RandomTensor({3, 3}, r), {3, 3},
                       [](Tape* t, const Tensor& a, const Tensor& b) { return Hadamard(t, a, b); });
       }},
      {"scale",
       [](Rng* r) {
         return Unary(r, RandomTensor({2, 5}, r),
                      [](Tape* t, const Tensor& x) { return Scale(t, x, -1.7); });
       }},
      {"add_scalar",
       [](Rng* r) {
         return Unary(r, RandomTensor({2, 5}, r),
                      [](Tape* t, const Tensor& x) { return AddScalar(t, x, 0.4); });
       }},
      {"sigmoid",
       [](Rng* r) {
         return Unary(r, RandomTensor({2, 5}, r, -3.0, 3.0),
                      [](Tape* t, const Tensor& x) { return Sigmoid(t, x); });
       }},
      {"tanh",
       [](Rng* r) {
         return Unary(r, RandomTensor({2, 5}, r, -2.0, 2.0),
                      [](Tape* t, const Tensor& x) { return Tanh(t, x); });
       }},
      {"relu",
       [](Rng* r) {
         return Unary(r, AwayFrom({2, 5}, 0.0, r),
                      [](Tape* t, const Tensor& x) { return Relu(t, x); });
       }},
      {"hinge",
       [](Rng* r) {
         return Unary(r, AwayFrom({2, 5}, -0.3, r),
                      [](Tape* t, const Tensor& x) { return Hinge(t, x, 0.3); });
       }},
      {"sum",
       [](Rng* r) {
         Tensor x = RandomTensor({3, 4}, r);
         return Problem{[=](Tape* t) { return Sum(t, x); }, {x}};
       }},
      {"mean",
       [](Rng* r) {
         Tensor x = RandomTensor({3, 4}, r);
         return Problem{[=](Tape* t) { return Mean(t, x); }, {x}};
       }},
      {"frobenius_sq",
       [](Rng* r) {
         Tensor x = RandomTensor({3, 4}, r);
         return Problem{[=](Tape* t) { return FrobeniusSq(t, x); }, {x}};
       }},
      {"mean_over_time",
       [](Rng* r) {
         Tensor x = RandomTensor({2, 4, 3}, r);
         Tensor w = RandomTensor({2, 3}, r);
         w.set_requires_grad(false);
         return Problem{[=](Tape* t) { return Project(t, MeanOverTime(t, x), w); }, {x}};
       }},
      {"conv1d",
       [](Rng* r) {
         Tensor x = RandomTensor({2, 6, 3}, r);
         Tensor k = RandomTensor({4, 3, 5}, r);
         Tensor b = RandomTensor({4}, r);
         Tensor w = RandomTensor({2, 6, 4}, r);
         w.set_requires_grad(false);
         return Problem{[=](Tape* t) { return Project(t, Conv1d(t, x, k, b), w); },
                        {x, k, b}};
       }},
      {"softmax_xent",
       [](Rng* r) {
         Tensor logits = RandomTensor({4, 5}, r, -2.0, 2.0);
         std::vector<std::size_t> targets(4);
         std::vector<double> weights(4);
         for (std::size_t i = 0; i < 4; ++i) {
           targets[i] = UniformIndex(r, 5);
           weights[i] = Uniform(r, 0.1, 1.0);
         }
         return Problem{
             [=](Tape* t) { return SoftmaxXent(t, logits, targets, weights); }, {logits}};
       }},
      {"gather_rows",
       [](Rng* r) {
         Tensor x = RandomTensor({4, 3}, r);
         std::vector<std::size_t> index = {2, 0, 2, 3, 2};
         Tensor w = RandomTensor({5, 3}, r);
         w.set_requires_grad(false);
         return Problem{[=](Tape* t) { return Project(t, GatherRows(t, x, index), w); },
                        {x}};
       }},
      {"cosine_rows",
       [](Rng* r) {
         return Binary(r, RandomTensor({3, 4}, r), RandomTensor({3, 4}, r), {3},
                       [](Tape* t, const Tensor& a, const Tensor& b) {
                         return CosineRows(t, a, b);
                       });
       }},
      {"gru_step",
       [](Rng* r) {
         GruLayerParams p = RandomLayer(4, 5, r);
         Tensor x = RandomTensor({3, 4}, r);
         Tensor h = RandomTensor({3, 5}, r);
         Tensor w = RandomTensor({3, 5}, r);
         w.set_requires_grad(false);
         std::vector<Tensor> inputs = LayerTensors(p);
         inputs.push_back(x);
         inputs.push_back(h);
         return Problem{[=](Tape* t) { return Project(t, GruStep(t, p, x, h), w); },
                        inputs};
       }},
      {"gru_sequence",
       [](Rng* r) {
         GruLayerParams p = RandomLayer(4, 5, r);
         Tensor x = RandomTensor({2, 5, 4}, r);
         Tensor w = RandomTensor({2, 5, 5}, r);
         w.set_requires_grad(false);
         std::vector<Tensor> inputs = LayerTensors(p);
         inputs.push_back(x);
         return Problem{[=](Tape* t) { return Project(t, GruSequence(t, p, x), w); },
                        inputs};
       }},
      {"model_tiny", TinyModel},
      {"loss_cross_entropy",
       [](Rng* r) {
         Tensor logits = RandomTensor({5, 3}, r, -2.0, 2.0);
         std::vector<std::size_t> targets = {0, 0, 1, 2, 1};
         std::vector<double> weights(5, 0.2);
         return Problem{
             [=](Tape* t) { return SoftmaxXent(t, logits, targets, weights); }, {logits}};
       }},
      {"loss_triplet",
       [](Rng* r) {
         Tensor a = RandomTensor({4, 6}, r), p = RandomTensor({4, 6}, r),
                n = RandomTensor({4, 6}, r);
         return Problem{[=](Tape* t) { return Sum(t, TripletLoss(t, a, p, n, 0.5)); },
                        {a, p, n}};
       }},
      {"loss_orth_frobenius", [](Rng* r) { return Orth(r, OrthMode::kFrobenius); }},
      {"loss_orth_literal", [](Rng* r) { return Orth(r, OrthMode::kLiteral); }},
  };
  if (inject_fault) {
    cases.push_back({"injected_wrong_backward", [](Rng* r) {
                       return Unary(r, RandomTensor({2, 5}, r, -3.0, 3.0),
                                    [](Tape* t, const Tensor& x) { return BrokenSigmoid(t, x); });
                     }});
  }
  return cases;
}

}  // namespace

bool GradcheckReport::all_passed() const {
  if (cases.empty()) return false;
  for (const auto& c : cases) {
    if (!c.passed) return false;
  }
  return true;
}

std::vector<std::string> GradcheckCaseNames() {
  std::vector<std::string> names;
  for (const auto& [name, builder] : Cases(false)) names.push_back(name);
  return names;
}

GradcheckReport RunGradcheckSuite(const GradcheckSuiteOptions& options, std::ostream* log) {
  auto start = std::chrono::steady_clock::now();
  GradcheckReport report;
  Rng rng = MakeRng(options.seed, "gradcheck");
  for (const auto& [name, builder] : Cases(options.inject_fault)) {
    if (!options.only.empty() &&
        std::find(options.only.begin(), options.only.end(), name) == options.only.end()) {
      continue;
    }
    GradcheckCaseResult result;
    result.name = name;
    for (std::size_t trial = 0; trial < std::max<std::size_t>(1, options.trials); ++trial) {
      Problem problem = builder(&rng);
      GradcheckResult r = Gradcheck(problem.f, problem.inputs, options.step);
      if (trial == 0 || r.max_rel_error > result.result.max_rel_error ||
          std::isnan(r.max_rel_error)) {
        std::size_t checked = result.result.num_checked;
        result.result = r;
        result.result.num_checked += checked;
      } else {
        result.result.num_checked += r.num_checked;
      }
    }
    result.passed = result.result.max_rel_error < options.tolerance;
    if (log) {
      char line[256];
      const GradcheckResult& r = result.result;
      std::snprintf(line, sizeof(line),
                    "%-26s %s  max_rel_error %.3e  (%zu elements; worst input %zu[%zu] "
                    "analytic %.6e numeric %.6e)",
                    name.c_str(), result.passed ? "ok  " : "FAIL", r.max_rel_error,
                    r.num_checked, r.worst_input, r.worst_element, r.worst_analytic,
                    r.worst_numeric);
      *log << line << '\n';
    }
    report.cases.push_back(std::move(result));
  }
  report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace orthospot
