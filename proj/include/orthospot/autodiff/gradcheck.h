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

#ifndef ORTHOSPOT_AUTODIFF_GRADCHECK_H_
#define ORTHOSPOT_AUTODIFF_GRADCHECK_H_

#include <functional>
#include <string>
#include <vector>

#include "orthospot/autodiff/tensor.h"

namespace orthospot {

// Builds a scalar loss from tensors it captured; called once per evaluation
// with a fresh tape.
using ScalarFunction = std::function<Tensor(Tape*)>;

struct GradcheckResult {
  double max_rel_error = 0.0;
  std::size_t worst_input = 0;
  std::size_t worst_element = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t num_checked = 0;
};

// Relative error between analytic and numeric derivatives, with |a|, |n|
// below kGradcheckFloor treated as absolute.
constexpr double kGradcheckFloor = 1e-6;
double RelativeError(double analytic, double numeric);

// Compares the tape gradient of f with respect to every element of `inputs`
// against central differences with step h. Inputs must require grad; their
// values are perturbed in place and restored.
GradcheckResult Gradcheck(const ScalarFunction& f, std::vector<Tensor> inputs,
                          double h = 1e-5);

}  // namespace orthospot

#endif  // ORTHOSPOT_AUTODIFF_GRADCHECK_H_
