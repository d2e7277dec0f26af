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

#ifndef ORTHOSPOT_FRONTEND_FEATURE_BANK_H_
#define ORTHOSPOT_FRONTEND_FEATURE_BANK_H_

#include <cstddef>
#include <span>
#include <vector>

#include "orthospot/autodiff/tensor.h"
#include "orthospot/dataset/corpus.h"
#include "orthospot/frontend/mfcc.h"

namespace orthospot {

// MFCCs for every clip of a split, computed once and stored as float32.
// Read-only after construction.
class FeatureBank {
 public:
  FeatureBank() = default;
  FeatureBank(const CorpusSplit& split, const MfccExtractor& extractor);

  std::size_t num_clips() const { return present_.size(); }
  std::size_t num_frames() const { return frames_; }
  std::size_t dim() const { return dim_; }

  FeatureMatrix Get(std::size_t clip) const;
  // [clips.size(), T, D]
  Tensor Batch(std::span<const std::size_t> clips) const;

 private:
  std::span<const float> Row(std::size_t clip) const;

  std::size_t frames_ = 0;
  std::size_t dim_ = 0;
  std::vector<float> values_;
  std::vector<bool> present_;
};

}  // namespace orthospot

#endif  // ORTHOSPOT_FRONTEND_FEATURE_BANK_H_
