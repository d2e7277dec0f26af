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

#ifndef ORTHOSPOT_DATASET_SAMPLER_H_
#define ORTHOSPOT_DATASET_SAMPLER_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "orthospot/base/rng.h"
#include "orthospot/dataset/corpus.h"

namespace orthospot {

enum class ScenarioMode { kFour, kTwo };

// Clip indices into CorpusSplit::clips. Relative to the anchor:
// s1 same keyword and speaker, s2 same keyword only, s3 same speaker only,
// s4 neither. In two-scenario mode s2 and s3 are unset.
struct Quadruplet {
  std::size_t anchor = 0;
  std::size_t s1 = 0;
  std::optional<std::size_t> s2;
  std::optional<std::size_t> s3;
  std::size_t s4 = 0;
};

// Draws scenario partners for training anchors. Holds a reference to the
// split, which must outlive the sampler.
class QuadrupletSampler {
 public:
  // Throws DataError when the training part cannot produce any quadruplet
  // (fewer than two speakers or keywords, or no eligible anchor at all).
  explicit QuadrupletSampler(const CorpusSplit& split);

  // std::nullopt when some scenario has no candidate for this anchor; the
  // caller should pick another anchor.
  std::optional<Quadruplet> Sample(std::size_t anchor, Rng* rng) const;
  std::optional<Quadruplet> SampleTwoScenario(std::size_t anchor, Rng* rng) const;
  std::optional<Quadruplet> Sample(std::size_t anchor, ScenarioMode mode,
                                   Rng* rng) const;

  bool Eligible(std::size_t anchor, ScenarioMode mode) const;
  const std::vector<std::size_t>& EligibleAnchors(ScenarioMode mode) const;

 private:
  struct Counts {
    std::size_t pair, keyword, speaker;
  };
  Counts CountsFor(std::size_t anchor) const;
  const std::vector<std::size_t>& PairList(int keyword, int speaker) const;
  int64_t PairKey(int keyword, int speaker) const;

  const CorpusSplit& split_;
  std::size_t num_speakers_;
  std::vector<std::vector<std::size_t>> by_keyword_;
  std::vector<std::vector<std::size_t>> by_speaker_;
  std::unordered_map<int64_t, std::vector<std::size_t>> by_pair_;
  std::vector<std::size_t> eligible_four_;
  std::vector<std::size_t> eligible_two_;
};

}  // namespace orthospot

#endif  // ORTHOSPOT_DATASET_SAMPLER_H_
