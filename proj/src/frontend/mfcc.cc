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

#include "orthospot/frontend/mfcc.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <mutex>
#include <numbers>

#include <fftw3.h>

#include "orthospot/base/error.h"

namespace orthospot {

namespace {

std::mutex& PlannerMutex() {
  static std::mutex mu;
  return mu;
}

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double MelToHz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

}  // namespace

std::size_t MfccOptions::window_samples() const {
  return static_cast<std::size_t>(std::lround(sample_rate * frame_length_ms / 1000.0));
}

std::size_t MfccOptions::stride_samples() const {
  return static_cast<std::size_t>(std::lround(sample_rate * frame_stride_ms / 1000.0));
}

std::size_t NumFrames(std::size_t num_samples, std::size_t window,
                      std::size_t stride) {
  if (num_samples < window) return 0;
  return (num_samples - window) / stride + 1;
}

std::vector<double> HammingWindow(std::size_t length) {
  std::vector<double> w(length);
  if (length == 1) {
    w[0] = 1.0;
    return w;
  }
  for (std::size_t i = 0; i < length; ++i) {
    w[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                  static_cast<double>(length - 1));
  }
  return w;
}

std::vector<std::vector<double>> FrameSignal(std::span<const float> samples,
                                             const MfccOptions& options) {
  if (options.sample_rate != kSampleRate) {
    throw DataError("frontend expects 16000 Hz audio, got " +
                    std::to_string(options.sample_rate));
  }
  const std::size_t window = options.window_samples();
  const std::size_t stride = options.stride_samples();
  const std::size_t frames = NumFrames(samples.size(), window, stride);
  if (frames == 0) {
    throw DataError("clip of " + std::to_string(samples.size()) +
                    " samples is shorter than one " + std::to_string(window) +
                    "-sample window");
  }
  const std::vector<double> hamming = HammingWindow(window);
  std::vector<std::vector<double>> out(frames, std::vector<double>(window));
  for (std::size_t f = 0; f < frames; ++f) {
    for (std::size_t i = 0; i < window; ++i) {
      out[f][i] = static_cast<double>(samples[f * stride + i]) * hamming[i];
    }
  }
  return out;
}

MfccExtractor::MfccExtractor(const MfccOptions& options) : options_(options) {
  const std::size_t window = options_.window_samples();
  if (window == 0 || options_.stride_samples() == 0 || options_.fft_size < window) {
    throw DataError("invalid MFCC framing: window " + std::to_string(window) +
                    ", fft " + std::to_string(options_.fft_size));
  }
  if (options_.num_ceps > options_.num_mel_bins || options_.num_mel_bins == 0) {
    throw DataError("num_ceps must be in [1, num_mel_bins]");
  }
  window_ = HammingWindow(window);

  const std::size_t bins = options_.fft_size / 2 + 1;
  const std::size_t mels = options_.num_mel_bins;
  mel_bank_.assign(mels * bins, 0.0);
  const double mel_lo = HzToMel(options_.low_hz);
  const double mel_hi = HzToMel(options_.high_hz);
  std::vector<double> edges(mels + 2);
  for (std::size_t m = 0; m < mels + 2; ++m) {
    edges[m] = MelToHz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(m) /
                                    static_cast<double>(mels + 1));
  }
  for (std::size_t m = 0; m < mels; ++m) {
    for (std::size_t k = 0; k < bins; ++k) {
      double hz = static_cast<double>(k) * options_.sample_rate /
                  static_cast<double>(options_.fft_size);
      double up = (hz - edges[m]) / (edges[m + 1] - edges[m]);
      double down = (edges[m + 2] - hz) / (edges[m + 2] - edges[m + 1]);
      mel_bank_[m * bins + k] = std::max(0.0, std::min(up, down));
    }
  }

  dct_.assign(options_.num_ceps * mels, 0.0);
  for (std::size_t c = 0; c < options_.num_ceps; ++c) {
    double scale = std::sqrt((c == 0 ? 1.0 : 2.0) / static_cast<double>(mels));
    for (std::size_t m = 0; m < mels; ++m) {
      dct_[c * mels + m] =
          scale * std::cos(std::numbers::pi * static_cast<double>(c) *
                           (static_cast<double>(m) + 0.5) / static_cast<double>(mels));
    }
  }

  std::lock_guard<std::mutex> lock(PlannerMutex());
  double* in = fftw_alloc_real(options_.fft_size);
  fftw_complex* out = fftw_alloc_complex(bins);
  plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(options_.fft_size), in, out,
                               FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(in);
  fftw_free(out);
}

MfccExtractor::~MfccExtractor() {
  std::lock_guard<std::mutex> lock(PlannerMutex());
  fftw_destroy_plan(static_cast<fftw_plan>(plan_));
}

FeatureMatrix MfccExtractor::Compute(std::span<const float> samples) const {
  const std::size_t window = options_.window_samples();
  const std::size_t stride = options_.stride_samples();
  const std::size_t frames = NumFrames(samples.size(), window, stride);
  if (frames == 0) {
    throw DataError("clip of " + std::to_string(samples.size()) +
                    " samples is shorter than one " + std::to_string(window) +
                    "-sample window");
  }
  std::vector<double> emphasized(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    double prev = i == 0 ? 0.0 : static_cast<double>(samples[i - 1]);
    emphasized[i] = static_cast<double>(samples[i]) - options_.preemphasis * prev;
  }

  const std::size_t bins = options_.fft_size / 2 + 1;
  const std::size_t mels = options_.num_mel_bins;
  std::vector<double> buffer(options_.fft_size);
  std::vector<fftw_complex> spectrum(bins);
  std::vector<double> magnitude(bins), log_mel(mels);

  FeatureMatrix out;
  out.num_frames = frames;
  out.dim = options_.num_ceps;
  out.frame_length_ms = options_.frame_length_ms;
  out.frame_stride_ms = options_.frame_stride_ms;
  out.sample_rate = options_.sample_rate;
  out.values.resize(frames * out.dim);
  for (std::size_t f = 0; f < frames; ++f) {
    std::fill(buffer.begin(), buffer.end(), 0.0);
    for (std::size_t i = 0; i < window; ++i) {
      buffer[i] = emphasized[f * stride + i] * window_[i];
    }
    fftw_execute_dft_r2c(static_cast<fftw_plan>(plan_), buffer.data(), spectrum.data());
    for (std::size_t k = 0; k < bins; ++k) {
      magnitude[k] = std::hypot(spectrum[k][0], spectrum[k][1]);
    }
    for (std::size_t m = 0; m < mels; ++m) {
      const double* weights = &mel_bank_[m * bins];
      double energy = 0.0;
      for (std::size_t k = 0; k < bins; ++k) energy += weights[k] * magnitude[k];
      log_mel[m] = std::log(std::max(energy, options_.log_floor));
    }
    for (std::size_t c = 0; c < out.dim; ++c) {
      const double* basis = &dct_[c * mels];
      double acc = 0.0;
      for (std::size_t m = 0; m < mels; ++m) acc += basis[m] * log_mel[m];
      out.values[f * out.dim + c] = acc;
    }
  }
  return out;
}

FeatureMatrix Mfcc(const AudioClip& clip) {
  if (clip.sample_rate != kSampleRate) {
    throw DataError("frontend expects 16000 Hz audio, got " +
                    std::to_string(clip.sample_rate));
  }
  static const MfccExtractor extractor;
  return extractor.Compute(clip.samples);
}

void WriteFeatureDump(const FeatureMatrix& features, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write " + path);
  auto put_u32 = [&os](uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    os.write(reinterpret_cast<const char*>(b), 4);
  };
  put_u32(static_cast<uint32_t>(features.num_frames));
  put_u32(static_cast<uint32_t>(features.dim));
  for (double v : features.values) {
    float f = static_cast<float>(v);
    uint32_t bits;
    std::memcpy(&bits, &f, 4);
    put_u32(bits);
  }
  if (!os) throw DataError("write failed for " + path);
}

FeatureMatrix ReadFeatureDump(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  auto get_u32 = [&in, &path]() {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) throw DataError(path + ": truncated");
    return static_cast<uint32_t>(b[0]) | static_cast<uint32_t>(b[1]) << 8 |
           static_cast<uint32_t>(b[2]) << 16 | static_cast<uint32_t>(b[3]) << 24;
  };
  FeatureMatrix out;
  out.num_frames = get_u32();
  out.dim = get_u32();
  out.values.resize(out.num_frames * out.dim);
  for (double& v : out.values) {
    uint32_t bits = get_u32();
    float f;
    std::memcpy(&f, &bits, 4);
    v = f;
  }
  return out;
}

}  // namespace orthospot
