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

#ifndef ORTHOSPOT_CLI_GRADCHECK_SUITE_H_
#define ORTHOSPOT_CLI_GRADCHECK_SUITE_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "orthospot/autodiff/gradcheck.h"

namespace orthospot {

struct GradcheckSuiteOptions {
  uint64_t seed = 0;
  double tolerance = 1e-4;
  double step = 1e-5;
  std::size_t trials = 3;  // random draws per case
  std::vector<std::string> only;  // case names to run; empty runs all
  // Adds a sigmoid whose backward is deliberately wrong; the suite must fail.
  bool inject_fault = false;
};

struct GradcheckCaseResult {
  std::string name;
  GradcheckResult result;  // worst over trials
  bool passed = false;
};

struct GradcheckReport {
  std::vector<GradcheckCaseResult> cases;
  double seconds = 0.0;
  bool all_passed() const;
};

std::vector<std::string> GradcheckCaseNames();

GradcheckReport RunGradcheckSuite(const GradcheckSuiteOptions& options,
                                  std::ostream* log = nullptr);

}  // namespace orthospot

#endif  // ORTHOSPOT_CLI_GRADCHECK_SUITE_H_
