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

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "orthospot/autodiff/gradcheck.h"
#include "orthospot/autodiff/ops.h"
#include "orthospot/autodiff/tensor.h"
#include "orthospot/base/error.h"
#include "orthospot/base/rng.h"
#include "orthospot/cli/gradcheck_suite.h"

namespace orthospot {
namespace {

Tensor Random(const Shape& shape, Rng* rng, bool grad = true) {
  std::vector<double> v(NumElements(shape));
  for (double& x : v) x = Uniform(rng, -1.0, 1.0);
  return Tensor::FromData(shape, std::move(v), grad);
}

TEST(TensorTest, ShapeAndStorage) {
  Tensor t = Tensor::Zeros({2, 3});
  EXPECT_EQ(t.size(), 6u);
  EXPECT_EQ(t.rank(), 2u);
  EXPECT_EQ(ShapeString(t.shape()), "[2, 3]");
  EXPECT_THROW(Tensor::FromData({2, 2}, {1, 2, 3}), ShapeError);
  Tensor c = t.Clone();
  EXPECT_FALSE(c.same_storage(t));
  Tensor alias = t;
  EXPECT_TRUE(alias.same_storage(t));
}

TEST(OpsTest, SigmoidOfZeroIsHalf) {
  Tape tape(false);
  Tensor y = Sigmoid(&tape, Tensor::FromData({1}, {0.0}));
  EXPECT_DOUBLE_EQ(y.data()[0], 0.5);
}

TEST(OpsTest, MeanOverTimeOfConstantSequence) {
  Tape tape(false);
  std::vector<double> v(2 * 7 * 3);
  for (std::size_t b = 0; b < 2; ++b) {
    for (std::size_t t = 0; t < 7; ++t) {
      for (std::size_t c = 0; c < 3; ++c) v[(b * 7 + t) * 3 + c] = 0.25 * c - b;
    }
  }
  Tensor y = MeanOverTime(&tape, Tensor::FromData({2, 7, 3}, v));
  ASSERT_EQ(y.shape(), (Shape{2, 3}));
  for (std::size_t b = 0; b < 2; ++b) {
    for (std::size_t c = 0; c < 3; ++c) {
      EXPECT_NEAR(y.data()[b * 3 + c], 0.25 * c - b, 1e-15);
    }
  }
}

// Cross-correlation of a unit impulse at frame 4 with a width-5 kernel puts
// the reversed kernel around frame 4: y[t] = k[4 - t + 2].
TEST(OpsTest, Conv1dImpulseResponse) {
  Tape tape(false);
  const std::vector<double> k = {1, 2, 3, 4, 5};
  Tensor x = Tensor::Zeros({1, 9, 1});
  x.data()[4] = 1.0;
  Tensor kernel = Tensor::FromData({1, 1, 5}, k);
  Tensor bias = Tensor::Zeros({1});
  Tensor y = Conv1d(&tape, x, kernel, bias);
  ASSERT_EQ(y.shape(), (Shape{1, 9, 1}));
  std::vector<double> expected(9, 0.0);
  for (int t = 0; t < 9; ++t) {
    int tap = 4 - t + 2;
    if (tap >= 0 && tap < 5) expected[t] = k[tap];
  }
  for (int t = 0; t < 9; ++t) EXPECT_DOUBLE_EQ(y.data()[t], expected[t]) << t;
}

// Direct "same" cross-correlation with zero padding.
TEST(OpsTest, Conv1dMatchesDirectSum) {
  Rng rng = MakeRng(3, "conv");
  for (std::size_t width : {1u, 3u, 4u, 5u}) {
    const std::size_t B = 2, T = 6, Cin = 3, Cout = 4;
    Tensor x = Random({B, T, Cin}, &rng, false);
    Tensor k = Random({Cout, Cin, width}, &rng, false);
    Tensor b = Random({Cout}, &rng, false);
    Tape tape(false);
    Tensor y = Conv1d(&tape, x, k, b);
    const long pad = static_cast<long>((width - 1) / 2);
    for (std::size_t bi = 0; bi < B; ++bi) {
      for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t o = 0; o < Cout; ++o) {
          double acc = b.data()[o];
          for (std::size_t c = 0; c < Cin; ++c) {
            for (std::size_t j = 0; j < width; ++j) {
              long src = static_cast<long>(t) + static_cast<long>(j) - pad;
              if (src < 0 || src >= static_cast<long>(T)) continue;
              acc += k.data()[(o * Cin + c) * width + j] * x.data()[(bi * T + src) * Cin + c];
            }
          }
          EXPECT_NEAR(y.data()[(bi * T + t) * Cout + o], acc, 1e-13);
        }
      }
    }
  }
}

TEST(OpsTest, MatMulMatchesTripleLoop) {
  Rng rng = MakeRng(4, "matmul");
  Tensor a = Random({3, 5}, &rng, false), b = Random({5, 4}, &rng, false);
  Tape tape(false);
  Tensor c = MatMul(&tape, a, b);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < 5; ++k) acc += a.data()[i * 5 + k] * b.data()[k * 4 + j];
      EXPECT_NEAR(c.data()[i * 4 + j], acc, 1e-14);
    }
  }
}

TEST(OpsTest, ShapeMismatchNamesBothShapes) {
  Tape tape;
  Tensor a = Tensor::Zeros({2, 3}), b = Tensor::Zeros({4, 2});
  try {
    MatMul(&tape, a, b);
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    std::string msg = e.what();
    EXPECT_NE(msg.find("[2, 3]"), std::string::npos) << msg;
    EXPECT_NE(msg.find("[4, 2]"), std::string::npos) << msg;
  }
}

TEST(BackwardTest, SumGivesOnes) {
  Tensor w = Tensor::FromData({2, 2}, {1, -2, 3, 0.5}, true);
  Tape tape;
  tape.Backward(Sum(&tape, w));
  for (double g : w.grad()) EXPECT_EQ(g, 1.0);
}

TEST(BackwardTest, FrobeniusGivesTwoW) {
  Tensor w = Tensor::FromData({2, 3}, {1, -2, 3, 0.5, 0, -1}, true);
  Tape tape;
  tape.Backward(FrobeniusSq(&tape, w));
  for (std::size_t i = 0; i < w.size(); ++i) EXPECT_EQ(w.grad()[i], 2.0 * w.data()[i]);
}

TEST(BackwardTest, RejectsNonScalarAndReplay) {
  Tensor w = Tensor::FromData({2}, {1, 2}, true);
  Tape tape;
  Tensor y = Scale(&tape, w, 2.0);
  EXPECT_THROW(tape.Backward(y), NumericError);
  Tape once;
  Tensor s = Sum(&once, w);
  once.Backward(s);
  EXPECT_THROW(once.Backward(s), NumericError);
}

TEST(BackwardTest, UnusedParameterKeepsZeroGradient) {
  Tensor used = Tensor::FromData({2}, {1, 2}, true);
  Tensor unused = Tensor::FromData({2}, {3, 4}, true);
  Tape tape;
  tape.Backward(Sum(&tape, used));
  EXPECT_FALSE(unused.grad_touched());
  for (double g : unused.grad()) EXPECT_EQ(g, 0.0);
}

// d(f + g) = df + dg.
TEST(BackwardTest, LinearityOverLosses) {
  Rng rng = MakeRng(5, "linear");
  Tensor x = Random({3, 4}, &rng);
  Tensor w = Random({4, 2}, &rng);
  auto f = [&](Tape* t) { return FrobeniusSq(t, Tanh(t, MatMul(t, x, w))); };
  auto g = [&](Tape* t) { return Sum(t, Sigmoid(t, x)); };

  Tape both;
  both.Backward(Add(&both, f(&both), g(&both)));
  std::vector<double> joint(x.grad().begin(), x.grad().end());

  x.ZeroGrad();
  Tape tf;
  tf.Backward(f(&tf));
  Tape tg;
  tg.Backward(g(&tg));
  for (std::size_t i = 0; i < joint.size(); ++i) EXPECT_NEAR(joint[i], x.grad()[i], 1e-14);
}

TEST(BackwardTest, ForwardIsBitReproducible) {
  Rng rng = MakeRng(6, "repro");
  Tensor x = Random({4, 5, 3}, &rng, false);
  Tensor k = Random({2, 3, 5}, &rng, false);
  Tensor b = Random({2}, &rng, false);
  Tape t1(false), t2(false);
  Tensor y1 = Conv1d(&t1, x, k, b), y2 = Conv1d(&t2, x, k, b);
  for (std::size_t i = 0; i < y1.size(); ++i) EXPECT_EQ(y1.data()[i], y2.data()[i]);
}

TEST(GradcheckTest, SquareAtThree) {
  Tensor x = Tensor::FromData({1}, {3.0}, true);
  GradcheckResult r = Gradcheck([&](Tape* t) { return Sum(t, Hadamard(t, x, x)); }, {x});
  EXPECT_LT(r.max_rel_error, 1e-9);
  EXPECT_EQ(r.num_checked, 1u);
}

TEST(GradcheckTest, SoftmaxXentBelowOneInAMillion) {
  Rng rng = MakeRng(7, "xent");
  Tensor logits = Random({3, 6}, &rng);
  std::vector<std::size_t> targets = {1, 5, 0};
  std::vector<double> weights = {1.0, 1.0, 1.0};
  GradcheckResult r = Gradcheck(
      [&](Tape* t) { return SoftmaxXent(t, logits, targets, weights); }, {logits});
  EXPECT_LT(r.max_rel_error, 1e-6);
}

// A backward that ignores the chain rule must be caught.
TEST(GradcheckTest, DetectsWrongBackward) {
  GradcheckSuiteOptions options;
  options.inject_fault = true;
  options.only = {"injected_wrong_backward"};
  GradcheckReport report = RunGradcheckSuite(options);
  ASSERT_EQ(report.cases.size(), 1u);
  EXPECT_FALSE(report.all_passed());
  EXPECT_GT(report.cases[0].result.max_rel_error, 1e-2);
}

TEST(GradcheckTest, EveryPrimitiveOverHundredDraws) {
  GradcheckSuiteOptions options;
  options.trials = 100;
  options.seed = 11;
  options.only = {"matmul",   "matmul_nt",    "add_bias",     "add",
                  "sub",      "hadamard",     "scale",        "add_scalar",
                  "sigmoid",  "tanh",         "relu",         "hinge",
                  "sum",      "mean",         "frobenius_sq", "mean_over_time",
                  "conv1d",   "softmax_xent", "gather_rows",  "cosine_rows"};
  GradcheckReport report = RunGradcheckSuite(options);
  ASSERT_EQ(report.cases.size(), options.only.size());
  for (const auto& c : report.cases) {
    EXPECT_TRUE(c.passed) << c.name << " " << c.result.max_rel_error;
  }
}

TEST(GradcheckTest, SuiteIsNonEmptyAndCoversTheModel) {
  std::vector<std::string> names = GradcheckCaseNames();
  EXPECT_GE(names.size(), 20u);
  for (const char* required : {"gru_step", "gru_sequence", "model_tiny", "loss_cross_entropy",
                               "loss_triplet", "loss_orth_frobenius", "loss_orth_literal"}) {
    EXPECT_NE(std::find(names.begin(), names.end(), required), names.end()) << required;
  }
  GradcheckSuiteOptions options;
  options.only = {"no_such_case"};
  EXPECT_FALSE(RunGradcheckSuite(options).all_passed());
}

}  // namespace
}  // namespace orthospot
