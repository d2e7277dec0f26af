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

#include "orthospot/frontend/feature_bank.h"

#include "orthospot/base/error.h"

namespace orthospot {

FeatureBank::FeatureBank(const CorpusSplit& split, const MfccExtractor& extractor) {
  const MfccOptions& opt = extractor.options();
  frames_ = NumFrames(kClipSamples, opt.window_samples(), opt.stride_samples());
  dim_ = opt.num_ceps;
  const std::size_t stride = frames_ * dim_;
  values_.assign(split.clips.size() * stride, 0.0f);
  present_.assign(split.clips.size(), false);
  for (SplitPart part : {SplitPart::kTrain, SplitPart::kValidation, SplitPart::kTest}) {
    for (std::size_t i : split.part(part)) {
      if (present_[i]) continue;
      AudioClip clip = LoadClip(split, i);
      FeatureMatrix f = extractor.Compute(clip.samples);
      for (std::size_t k = 0; k < stride; ++k) {
        values_[i * stride + k] = static_cast<float>(f.values[k]);
      }
      present_[i] = true;
    }
  }
}

std::span<const float> FeatureBank::Row(std::size_t clip) const {
  if (clip >= present_.size() || !present_[clip]) {
    throw DataError("no features for clip " + std::to_string(clip));
  }
  const std::size_t stride = frames_ * dim_;
  return {values_.data() + clip * stride, stride};
}

FeatureMatrix FeatureBank::Get(std::size_t clip) const {
  FeatureMatrix f;
  f.num_frames = frames_;
  f.dim = dim_;
  auto row = Row(clip);
  f.values.assign(row.begin(), row.end());
  return f;
}

Tensor FeatureBank::Batch(std::span<const std::size_t> clips) const {
  std::vector<double> values;
  values.reserve(clips.size() * frames_ * dim_);
  for (std::size_t c : clips) {
    auto row = Row(c);
    values.insert(values.end(), row.begin(), row.end());
  }
  return Tensor::FromData({clips.size(), frames_, dim_}, std::move(values));
}

}  // namespace orthospot
