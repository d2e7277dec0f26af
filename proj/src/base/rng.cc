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

#include "orthospot/base/rng.h"

#include <cmath>
#include <numbers>

namespace orthospot {

namespace {

uint64_t Fnv1a(std::string_view text) {
  uint64_t hash = 1469598103934665603ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  return hash;
}

}  // namespace

Rng MakeRng(uint64_t seed, std::string_view stream) {
  uint64_t name = Fnv1a(stream);
  std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32),
                    static_cast<uint32_t>(name), static_cast<uint32_t>(name >> 32)};
  return Rng(seq);
}

double UniformUnit(Rng* rng) {
  return static_cast<double>((*rng)() >> 11) * 0x1.0p-53;
}

double Uniform(Rng* rng, double lo, double hi) {
  return lo + (hi - lo) * UniformUnit(rng);
}

uint64_t UniformIndex(Rng* rng, uint64_t n) {
  // Rejection sampling removes modulo bias.
  const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  uint64_t draw;
  do {
    draw = (*rng)();
  } while (draw >= limit);
  return draw % n;
}

double Gaussian(Rng* rng) {
  double u1 = UniformUnit(rng);
  double u2 = UniformUnit(rng);
  if (u1 < 1e-300) u1 = 1e-300;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace orthospot
