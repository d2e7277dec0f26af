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

#ifndef ORTHOSPOT_BASE_RNG_H_
#define ORTHOSPOT_BASE_RNG_H_

#include <cstdint>
#include <random>
#include <string_view>

namespace orthospot {

using Rng = std::mt19937_64;

// Derives an independent generator for a named sub-stream ("split", "init",
// "shuffle", "sampler", ...) from the run seed. The name hash is FNV-1a so the
// mapping does not depend on the standard library.
Rng MakeRng(uint64_t seed, std::string_view stream);

// Uniform in [0, 1) with 53 random bits.
double UniformUnit(Rng* rng);

double Uniform(Rng* rng, double lo, double hi);

// Uniform integer in [0, n). n must be positive.
uint64_t UniformIndex(Rng* rng, uint64_t n);

// Standard normal via Box-Muller; library-independent.
double Gaussian(Rng* rng);

// Fisher-Yates shuffle driven by UniformIndex.
template <typename T>
void Shuffle(T* items, Rng* rng) {
  for (std::size_t i = items->size(); i > 1; --i) {
    std::size_t j = UniformIndex(rng, i);
    std::swap((*items)[i - 1], (*items)[j]);
  }
}

}  // namespace orthospot

#endif  // ORTHOSPOT_BASE_RNG_H_
