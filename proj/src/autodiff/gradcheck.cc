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

#include "orthospot/autodiff/gradcheck.h"

#include <algorithm>
#include <cmath>

#include "orthospot/base/error.h"

namespace orthospot {

double RelativeError(double analytic, double numeric) {
  double scale = std::max({std::abs(analytic), std::abs(numeric), kGradcheckFloor});
  return std::abs(analytic - numeric) / scale;
}

GradcheckResult Gradcheck(const ScalarFunction& f, std::vector<Tensor> inputs,
                          double h) {
  for (Tensor& t : inputs) {
    if (!t.requires_grad()) throw NumericError("Gradcheck input without requires_grad");
    t.ZeroGrad();
  }
  {
    Tape tape;
    tape.Backward(f(&tape));
  }
  std::vector<std::vector<double>> analytic;
  analytic.reserve(inputs.size());
  for (const Tensor& t : inputs) {
    analytic.emplace_back(t.grad().begin(), t.grad().end());
  }

  auto evaluate = [&f]() {
    Tape tape(false);
    return f(&tape).item();
  };

  GradcheckResult result;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    auto values = inputs[i].data();
    for (std::size_t e = 0; e < values.size(); ++e) {
      const double saved = values[e];
      values[e] = saved + h;
      const double up = evaluate();
      values[e] = saved - h;
      const double down = evaluate();
      values[e] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double err = RelativeError(analytic[i][e], numeric);
      ++result.num_checked;
      if (err > result.max_rel_error || std::isnan(err)) {
        result.max_rel_error = std::isnan(err) ? INFINITY : err;
        result.worst_input = i;
        result.worst_element = e;
        result.worst_analytic = analytic[i][e];
        result.worst_numeric = numeric;
      }
    }
  }
  return result;
}

}  // namespace orthospot
