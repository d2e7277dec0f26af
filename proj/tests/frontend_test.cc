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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <vector>

#include "gtest/gtest.h"
#include "orthospot/base/error.h"
#include "orthospot/base/rng.h"
#include "orthospot/dataset/corpus.h"
#include "orthospot/frontend/feature_bank.h"
#include "orthospot/frontend/mfcc.h"

namespace orthospot {
namespace {

std::vector<float> NoiseClip(uint64_t seed, std::size_t n = kClipSamples) {
  Rng rng = MakeRng(seed, "noise");
  std::vector<float> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = static_cast<float>(0.3 * std::sin(0.05 * static_cast<double>(i)) +
                              0.1 * Gaussian(&rng));
  }
  return x;
}

TEST(FramingTest, FrameCounts) {
  EXPECT_EQ(NumFrames(16000, 320, 160), 99u);
  EXPECT_EQ(NumFrames(320, 320, 160), 1u);
  EXPECT_EQ(NumFrames(480, 320, 160), 2u);
  EXPECT_EQ(NumFrames(479, 320, 160), 1u);
  EXPECT_EQ(NumFrames(319, 320, 160), 0u);
  MfccOptions o;
  EXPECT_EQ(o.window_samples(), 320u);
  EXPECT_EQ(o.stride_samples(), 160u);
}

TEST(FramingTest, ShortClipThrows) {
  std::vector<float> x(319, 0.1f);
  MfccExtractor extractor;
  EXPECT_THROW(extractor.Compute(x), DataError);
  EXPECT_THROW(FrameSignal(x), DataError);
}

TEST(FramingTest, HammingEndpointsAndFrames) {
  auto w = HammingWindow(320);
  EXPECT_NEAR(w.front(), 0.08, 1e-15);
  EXPECT_NEAR(w.back(), 0.08, 1e-15);
  EXPECT_NEAR(w[0] + w[319], 0.16, 1e-15);
  std::vector<float> ones(480, 1.0f);
  auto frames = FrameSignal(ones);
  ASSERT_EQ(frames.size(), 2u);
  for (std::size_t i = 0; i < 320; ++i) EXPECT_EQ(frames[1][i], w[i]);
}

TEST(MfccTest, OneSecondClipGivesNinetyNineByForty) {
  MfccExtractor extractor;
  FeatureMatrix f = extractor.Compute(NoiseClip(1));
  EXPECT_EQ(f.num_frames, 99u);
  EXPECT_EQ(f.dim, 40u);
  EXPECT_EQ(f.values.size(), 99u * 40);
  for (double v : f.values) ASSERT_TRUE(std::isfinite(v));
}

TEST(MfccTest, SilenceIsTheTransformOfTheLogFloor) {
  MfccExtractor extractor;
  std::vector<float> zeros(kClipSamples, 0.0f);
  FeatureMatrix f = extractor.Compute(zeros);
  const double c0 = std::sqrt(1.0 / 40.0) * 40.0 * std::log(1e-10);
  for (std::size_t t = 0; t < f.num_frames; ++t) {
    EXPECT_NEAR(f.at(t, 0), c0, 1e-9);
    for (std::size_t c = 1; c < 40; ++c) EXPECT_NEAR(f.at(t, c), 0.0, 1e-9);
  }
}

TEST(MfccTest, GainOnlyMovesTheZerothCoefficient) {
  MfccExtractor extractor;
  std::vector<float> x = NoiseClip(2);
  std::vector<float> y(x.size());
  const float gain = 2.0f;
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = gain * x[i];
  FeatureMatrix fx = extractor.Compute(x), fy = extractor.Compute(y);
  const double shift = std::sqrt(40.0) * std::log(2.0);
  for (std::size_t t = 0; t < fx.num_frames; ++t) {
    EXPECT_NEAR(fy.at(t, 0) - fx.at(t, 0), shift, 1e-6);
    for (std::size_t c = 1; c < 40; ++c) EXPECT_NEAR(fy.at(t, c), fx.at(t, c), 1e-6);
  }
}

// Straight-line reference with a direct DFT in long double.
std::vector<double> ReferenceMfcc(const std::vector<float>& x) {
  using LD = long double;
  const LD pi = std::numbers::pi_v<long double>;
  const std::size_t win = 320, hop = 160, nfft = 512, bins = 257, mels = 40;
  auto mel = [](LD hz) { return 2595.0L * std::log10(1.0L + hz / 700.0L); };
  auto hz = [](LD m) { return 700.0L * (std::pow(10.0L, m / 2595.0L) - 1.0L); };
  std::vector<LD> edge(mels + 2);
  for (std::size_t m = 0; m < mels + 2; ++m) edge[m] = hz(mel(8000.0L) * m / (mels + 1));
  std::vector<double> out;
  const std::size_t frames = (x.size() - win) / hop + 1;
  for (std::size_t f = 0; f < frames; ++f) {
    std::vector<LD> frame(win);
    for (std::size_t i = 0; i < win; ++i) {
      std::size_t n = f * hop + i;
      LD emph = static_cast<LD>(x[n]) - 0.97L * (n == 0 ? 0.0L : static_cast<LD>(x[n - 1]));
      frame[i] = emph * (0.54L - 0.46L * std::cos(2 * pi * i / (win - 1)));
    }
    std::vector<LD> mag(bins);
    for (std::size_t k = 0; k < bins; ++k) {
      LD re = 0, im = 0;
      for (std::size_t i = 0; i < win; ++i) {
        LD a = -2 * pi * static_cast<LD>((k * i) % nfft) / nfft;
        re += frame[i] * std::cos(a);
        im += frame[i] * std::sin(a);
      }
      mag[k] = std::sqrt(re * re + im * im);
    }
    std::vector<LD> logmel(mels);
    for (std::size_t m = 0; m < mels; ++m) {
      LD e = 0;
      for (std::size_t k = 0; k < bins; ++k) {
        LD f_hz = 16000.0L * k / nfft;
        LD w = 0;
        if (f_hz > edge[m] && f_hz <= edge[m + 1]) {
          w = (f_hz - edge[m]) / (edge[m + 1] - edge[m]);
        } else if (f_hz > edge[m + 1] && f_hz < edge[m + 2]) {
          w = (edge[m + 2] - f_hz) / (edge[m + 2] - edge[m + 1]);
        }
        e += w * mag[k];
      }
      logmel[m] = std::log(std::max<LD>(e, 1e-10L));
    }
    for (std::size_t c = 0; c < 40; ++c) {
      LD acc = 0;
      for (std::size_t m = 0; m < mels; ++m) {
        acc += logmel[m] * std::cos(pi * c * (m + 0.5L) / mels);
      }
      out.push_back(static_cast<double>(acc * std::sqrt((c == 0 ? 1.0L : 2.0L) / mels)));
    }
  }
  return out;
}

TEST(MfccTest, MatchesDirectDftReference) {
  std::vector<float> x = NoiseClip(3, 1600);  // 9 frames
  MfccExtractor extractor;
  FeatureMatrix f = extractor.Compute(x);
  std::vector<double> ref = ReferenceMfcc(x);
  ASSERT_EQ(f.values.size(), ref.size());
  for (std::size_t i = 0; i < ref.size(); ++i) {
    EXPECT_NEAR(f.values[i], ref[i], 1e-8 * std::max(1.0, std::abs(ref[i]))) << i;
  }
}

TEST(MfccTest, MelBankIsNonNegativeTriangles) {
  MfccExtractor extractor;
  const auto& bank = extractor.mel_bank();
  ASSERT_EQ(bank.size(), 40u * 257);
  for (std::size_t m = 0; m < 40; ++m) {
    double peak = 0;
    for (std::size_t k = 0; k < 257; ++k) {
      EXPECT_GE(bank[m * 257 + k], 0.0);
      EXPECT_LE(bank[m * 257 + k], 1.0);
      peak = std::max(peak, bank[m * 257 + k]);
    }
    EXPECT_GT(peak, 0.3) << "filter " << m << " has no support";
  }
}

TEST(MfccTest, InvalidOptionsThrow) {
  MfccOptions o;
  o.num_ceps = 41;
  EXPECT_THROW(MfccExtractor{o}, DataError);
  MfccOptions small_fft;
  small_fft.fft_size = 256;
  EXPECT_THROW(MfccExtractor{small_fft}, DataError);
  AudioClip clip;
  clip.samples.assign(kClipSamples, 0.0f);
  clip.sample_rate = 8000;
  EXPECT_THROW(Mfcc(clip), DataError);
}

TEST(FeatureDumpTest, RoundTripsAtFloatPrecision) {
  MfccExtractor extractor;
  FeatureMatrix f = extractor.Compute(NoiseClip(4));
  auto path = std::filesystem::temp_directory_path() / "orthospot_features.bin";
  WriteFeatureDump(f, path.string());
  EXPECT_EQ(std::filesystem::file_size(path), 8u + 99 * 40 * 4);
  FeatureMatrix back = ReadFeatureDump(path.string());
  EXPECT_EQ(back.num_frames, 99u);
  EXPECT_EQ(back.dim, 40u);
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    EXPECT_EQ(back.values[i], static_cast<double>(static_cast<float>(f.values[i])));
  }
  std::filesystem::remove(path);
}

TEST(FeatureBankTest, BatchStacksClipsInOrder) {
  SyntheticOptions o;
  o.num_keywords = 2;
  o.num_speakers = 4;
  o.clips_per_pair = 1;
  CorpusSplit split = MakeSynthetic(o);
  MfccExtractor extractor;
  FeatureBank bank(split, extractor);
  EXPECT_EQ(bank.num_clips(), 8u);
  EXPECT_EQ(bank.num_frames(), 99u);
  EXPECT_EQ(bank.dim(), 40u);
  std::vector<std::size_t> clips = {5, 2};
  Tensor batch = bank.Batch(clips);
  ASSERT_EQ(batch.shape(), (Shape{2, 99, 40}));
  FeatureMatrix direct = extractor.Compute(split.audio[2].samples);
  for (std::size_t i = 0; i < 99 * 40; ++i) {
    EXPECT_EQ(batch.data()[99 * 40 + i], static_cast<double>(static_cast<float>(direct.values[i])));
  }
}

}  // namespace
}  // namespace orthospot
