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

#ifndef ORTHOSPOT_DATASET_WAV_H_
#define ORTHOSPOT_DATASET_WAV_H_

#include <span>
#include <string>
#include <vector>

namespace orthospot {

constexpr int kSampleRate = 16000;

struct WavData {
  std::vector<float> samples;  // int16 / 32768
  int sample_rate = 0;
};

// Reads RIFF PCM 16-bit mono. Any other encoding, channel count, or a rate
// other than 16 kHz throws DataError.
WavData ReadWav(const std::string& path);

// True when the header parses as a file ReadWav would accept.
bool ProbeWav(const std::string& path);

// Writes 16-bit mono PCM; samples are clamped to [-1, 1) and rounded.
void WriteWav(const std::string& path, std::span<const float> samples,
              int sample_rate = kSampleRate);

}  // namespace orthospot

#endif  // ORTHOSPOT_DATASET_WAV_H_
