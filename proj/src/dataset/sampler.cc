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

#include "orthospot/dataset/sampler.h"

#include "orthospot/base/error.h"

namespace orthospot {

QuadrupletSampler::QuadrupletSampler(const CorpusSplit& split)
    : split_(split),
      num_speakers_(split.speaker_vocab.size()),
      by_keyword_(split.keyword_vocab.size()),
      by_speaker_(split.speaker_vocab.size()) {
  std::size_t keywords = 0, speakers = 0;
  for (std::size_t i : split.train) {
    const ClipInfo& c = split.clips[i];
    keywords += by_keyword_[c.keyword_id].empty();
    speakers += by_speaker_[c.speaker_id].empty();
    by_keyword_[c.keyword_id].push_back(i);
    by_speaker_[c.speaker_id].push_back(i);
    by_pair_[PairKey(c.keyword_id, c.speaker_id)].push_back(i);
  }
  if (keywords < 2 || speakers < 2) {
    throw DataError("training split has " + std::to_string(keywords) +
                    " keywords and " + std::to_string(speakers) +
                    " speakers; quadruplets need at least two of each");
  }
  for (std::size_t i : split.train) {
    if (Eligible(i, ScenarioMode::kFour)) eligible_four_.push_back(i);
    if (Eligible(i, ScenarioMode::kTwo)) eligible_two_.push_back(i);
  }
  if (eligible_two_.empty()) {
    throw DataError("no training clip has a same-keyword same-speaker partner");
  }
}

int64_t QuadrupletSampler::PairKey(int keyword, int speaker) const {
  return static_cast<int64_t>(keyword) * static_cast<int64_t>(num_speakers_) + speaker;
}

const std::vector<std::size_t>& QuadrupletSampler::PairList(int keyword,
                                                            int speaker) const {
  return by_pair_.at(PairKey(keyword, speaker));
}

QuadrupletSampler::Counts QuadrupletSampler::CountsFor(std::size_t anchor) const {
  const ClipInfo& c = split_.clips.at(anchor);
  auto it = by_pair_.find(PairKey(c.keyword_id, c.speaker_id));
  if (it == by_pair_.end()) return {0, 0, 0};  // not a training clip
  return {it->second.size(), by_keyword_[c.keyword_id].size(),
          by_speaker_[c.speaker_id].size()};
}

bool QuadrupletSampler::Eligible(std::size_t anchor, ScenarioMode mode) const {
  Counts n = CountsFor(anchor);
  if (n.pair == 0) return false;
  const std::size_t total = split_.train.size();
  bool s1 = n.pair >= 2;
  bool s4 = total + n.pair > n.keyword + n.speaker;
  if (mode == ScenarioMode::kTwo) return s1 && s4;
  bool s2 = n.keyword > n.pair;
  bool s3 = n.speaker > n.pair;
  return s1 && s2 && s3 && s4;
}

const std::vector<std::size_t>& QuadrupletSampler::EligibleAnchors(
    ScenarioMode mode) const {
  return mode == ScenarioMode::kFour ? eligible_four_ : eligible_two_;
}

std::optional<Quadruplet> QuadrupletSampler::Sample(std::size_t anchor,
                                                    ScenarioMode mode,
                                                    Rng* rng) const {
  if (!Eligible(anchor, mode)) return std::nullopt;
  const ClipInfo& a = split_.clips[anchor];
  Quadruplet q;
  q.anchor = anchor;

  const auto& pair = PairList(a.keyword_id, a.speaker_id);
  std::size_t pick = UniformIndex(rng, pair.size() - 1);
  q.s1 = pair[pick] == anchor ? pair.back() : pair[pick];

  // Rejection draws below terminate because Eligible proved a candidate exists.
  if (mode == ScenarioMode::kFour) {
    const auto& same_kw = by_keyword_[a.keyword_id];
    std::size_t c;
    do {
      c = same_kw[UniformIndex(rng, same_kw.size())];
    } while (split_.clips[c].speaker_id == a.speaker_id);
    q.s2 = c;
    const auto& same_spk = by_speaker_[a.speaker_id];
    do {
      c = same_spk[UniformIndex(rng, same_spk.size())];
    } while (split_.clips[c].keyword_id == a.keyword_id);
    q.s3 = c;
  }
  std::size_t c;
  do {
    c = split_.train[UniformIndex(rng, split_.train.size())];
  } while (split_.clips[c].keyword_id == a.keyword_id ||
           split_.clips[c].speaker_id == a.speaker_id);
  q.s4 = c;
  return q;
}

std::optional<Quadruplet> QuadrupletSampler::Sample(std::size_t anchor,
                                                    Rng* rng) const {
  return Sample(anchor, ScenarioMode::kFour, rng);
}

std::optional<Quadruplet> QuadrupletSampler::SampleTwoScenario(std::size_t anchor,
                                                               Rng* rng) const {
  return Sample(anchor, ScenarioMode::kTwo, rng);
}

}  // namespace orthospot
