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

#ifndef ORTHOSPOT_FRONTEND_MFCC_H_
#define ORTHOSPOT_FRONTEND_MFCC_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "orthospot/dataset/corpus.h"

namespace orthospot {

struct MfccOptions {
  int sample_rate = kSampleRate;
  double frame_length_ms = 20.0;
  double frame_stride_ms = 10.0;
  double preemphasis = 0.97;
  std::size_t fft_size = 512;
  std::size_t num_mel_bins = 40;
  std::size_t num_ceps = 40;
  double low_hz = 0.0;
  double high_hz = 8000.0;
  double log_floor = 1e-10;

  std::size_t window_samples() const;
  std::size_t stride_samples() const;
};

// Row-major frames x coefficients.
struct FeatureMatrix {
  std::vector<double> values;
  std::size_t num_frames = 0;
  std::size_t dim = 0;
  double frame_length_ms = 20.0;
  double frame_stride_ms = 10.0;
  int sample_rate = kSampleRate;

  double at(std::size_t frame, std::size_t coeff) const {
    return values[frame * dim + coeff];
  }
};

// floor((num_samples - window) / stride) + 1, or 0 when shorter than a window.
std::size_t NumFrames(std::size_t num_samples, std::size_t window,
                      std::size_t stride);

std::vector<double> HammingWindow(std::size_t length);

// Hamming-weighted windows without padding. Throws DataError when the signal
// is shorter than one window.
std::vector<std::vector<double>> FrameSignal(std::span<const float> samples,
                                             const MfccOptions& options = {});

// pre-emphasis -> framing -> Hamming -> |FFT| -> mel bank -> log -> DCT-II.
// Immutable after construction; Compute may be called from many threads.
class MfccExtractor {
 public:
  explicit MfccExtractor(const MfccOptions& options = {});
  ~MfccExtractor();
  MfccExtractor(const MfccExtractor&) = delete;
  MfccExtractor& operator=(const MfccExtractor&) = delete;

  FeatureMatrix Compute(std::span<const float> samples) const;
  const MfccOptions& options() const { return options_; }

  // num_mel_bins x (fft_size / 2 + 1), row-major.
  const std::vector<double>& mel_bank() const { return mel_bank_; }

 private:
  MfccOptions options_;
  std::vector<double> window_;
  std::vector<double> mel_bank_;
  std::vector<double> dct_;  // num_ceps x num_mel_bins
  void* plan_ = nullptr;
};

// Uses a process-wide extractor with default options.
FeatureMatrix Mfcc(const AudioClip& clip);

// Debug dump: u32 T, u32 D, then T*D little-endian float32.
void WriteFeatureDump(const FeatureMatrix& features, const std::string& path);
FeatureMatrix ReadFeatureDump(const std::string& path);

}  // namespace orthospot

#endif  // ORTHOSPOT_FRONTEND_MFCC_H_
