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
#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <numbers>

#include "orthospot/base/error.h"
#include "orthospot/base/rng.h"
#include "orthospot/dataset/corpus.h"

namespace orthospot {

namespace {

constexpr int kSegments = 3;
constexpr double kMaxHarmonicHz = 7800.0;
constexpr std::size_t kControlBlock = 80;  // 5 ms

struct Vowel {
  double f1, f2;
};

constexpr Vowel kVowels[] = {{280, 2250}, {400, 2000}, {700, 1250}, {450, 850},
                             {320, 800},  {620, 1700}, {540, 1450}};
constexpr double kPitchSteps[] = {0.88, 1.0, 1.12};

struct KeywordShape {
  std::array<int, kSegments> vowel;
  std::array<int, kSegments> pitch;
};

struct SpeakerVoice {
  double f0, tract_scale, tilt, resonance_hz, resonance_gain, noise;
};

int Distance(const KeywordShape& a, const KeywordShape& b) {
  int d = 0;
  for (int i = 0; i < kSegments; ++i) d += (a.vowel[i] != b.vowel[i]) + (a.pitch[i] != b.pitch[i]);
  return d;
}

std::vector<KeywordShape> DrawKeywords(std::size_t n, Rng* rng) {
  std::vector<KeywordShape> shapes;
  constexpr int kVowelCount = static_cast<int>(std::size(kVowels));
  int attempts = 0;
  while (shapes.size() < n) {
    KeywordShape s;
    for (int i = 0; i < kSegments; ++i) {
      do {
        s.vowel[i] = static_cast<int>(UniformIndex(rng, kVowelCount));
      } while (i > 0 && s.vowel[i] == s.vowel[i - 1]);
      s.pitch[i] = static_cast<int>(UniformIndex(rng, std::size(kPitchSteps)));
    }
    // Prefer shapes at distance >= 3; relax only if the space runs dry.
    int need = attempts < 5000 ? 3 : 1;
    bool ok = std::all_of(shapes.begin(), shapes.end(),
                          [&](const KeywordShape& o) { return Distance(s, o) >= need; });
    ++attempts;
    if (ok) shapes.push_back(s);
  }
  return shapes;
}

SpeakerVoice DrawSpeaker(Rng* rng) {
  SpeakerVoice v;
  v.f0 = Uniform(rng, 90.0, 250.0);
  v.tract_scale = Uniform(rng, 0.85, 1.2);
  v.tilt = Uniform(rng, 0.6, 1.5);
  v.resonance_hz = Uniform(rng, 2500.0, 4500.0);
  v.resonance_gain = Uniform(rng, 0.3, 1.0);
  v.noise = Uniform(rng, 0.003, 0.02);
  return v;
}

double Resonance(double f, double center, double bandwidth) {
  double x = (f - center) / bandwidth;
  return 1.0 / (1.0 + x * x);
}

std::vector<float> Synthesize(const KeywordShape& kw, const SpeakerVoice& voice,
                              Rng* rng) {
  const double sr = kSampleRate;
  const double onset = Uniform(rng, 0.06, 0.2);
  const double duration = Uniform(rng, 0.55, 0.72);
  const double f0_jitter = Uniform(rng, 0.96, 1.04);
  const double formant_jitter = Uniform(rng, 0.97, 1.03);
  const double peak = Uniform(rng, 0.25, 0.6);

  const std::size_t n = kClipSamples;
  const std::size_t blocks = n / kControlBlock + 1;
  const double min_f0 = voice.f0 * f0_jitter * kPitchSteps[0];
  const std::size_t harmonics = static_cast<std::size_t>(kMaxHarmonicHz / min_f0);

  // Control-rate trajectories: f0 and harmonic amplitudes at block starts.
  std::vector<double> f0(blocks + 1);
  std::vector<double> amp((blocks + 1) * harmonics, 0.0);
  for (std::size_t b = 0; b <= blocks; ++b) {
    double t = static_cast<double>(b * kControlBlock) / sr;
    double u = std::clamp((t - onset) / duration, 0.0, 1.0);
    double p = std::clamp(kSegments * u - 0.5, 0.0, kSegments - 1.0);
    int i = std::min(static_cast<int>(p), kSegments - 2);
    double frac = p - i;
    const Vowel& va = kVowels[kw.vowel[i]];
    const Vowel& vb = kVowels[kw.vowel[i + 1]];
    double scale = voice.tract_scale * formant_jitter;
    double f1 = scale * ((1 - frac) * va.f1 + frac * vb.f1);
    double f2 = scale * ((1 - frac) * va.f2 + frac * vb.f2);
    double pitch = (1 - frac) * kPitchSteps[kw.pitch[i]] + frac * kPitchSteps[kw.pitch[i + 1]];
    f0[b] = voice.f0 * f0_jitter * pitch;
    for (std::size_t h = 1; h <= harmonics; ++h) {
      double f = static_cast<double>(h) * f0[b];
      if (f >= kMaxHarmonicHz) break;
      double env = Resonance(f, f1, 80.0) + 0.6 * Resonance(f, f2, 120.0) +
                   voice.resonance_gain * Resonance(f, voice.resonance_hz, 350.0) + 0.02;
      amp[b * harmonics + h - 1] = env * std::pow(static_cast<double>(h), -voice.tilt);
    }
  }

  std::vector<double> voiced(n, 0.0);
  const std::size_t start = static_cast<std::size_t>(onset * sr);
  const std::size_t stop = std::min(n, start + static_cast<std::size_t>(duration * sr));
  const double ramp = 0.025 * sr;
  double phase = 0.0;
  for (std::size_t s = start; s < stop; ++s) {
    std::size_t b = s / kControlBlock;
    double frac = static_cast<double>(s % kControlBlock) / kControlBlock;
    double freq = (1 - frac) * f0[b] + frac * f0[b + 1];
    phase += 2.0 * std::numbers::pi * freq / sr;
    if (phase > 2.0 * std::numbers::pi) phase -= 2.0 * std::numbers::pi;
    const std::complex<double> step(std::cos(phase), std::sin(phase));
    std::complex<double> z = step;
    const double* a0 = &amp[b * harmonics];
    const double* a1 = &amp[(b + 1) * harmonics];
    double acc = 0.0;
    for (std::size_t h = 0; h < harmonics; ++h) {
      acc += ((1 - frac) * a0[h] + frac * a1[h]) * z.imag();
      z *= step;
    }
    double pos = static_cast<double>(s - start);
    double left = static_cast<double>(stop - s);
    double env = 1.0;
    if (pos < ramp) env = 0.5 - 0.5 * std::cos(std::numbers::pi * pos / ramp);
    if (left < ramp) env = std::min(env, 0.5 - 0.5 * std::cos(std::numbers::pi * left / ramp));
    voiced[s] = acc * env;
  }
  double max_abs = 0.0;
  for (double v : voiced) max_abs = std::max(max_abs, std::abs(v));
  const double gain = max_abs > 0.0 ? peak / max_abs : 0.0;

  std::vector<float> out(n);
  for (std::size_t s = 0; s < n; ++s) {
    double v = gain * voiced[s] + voice.noise * peak * Gaussian(rng);
    double q = std::clamp(std::round(v * 32768.0), -32768.0, 32767.0);
    out[s] = static_cast<float>(q / 32768.0);
  }
  return out;
}

}  // namespace

PartitionSizes SyntheticPartition(std::size_t num_speakers) {
  std::size_t held = std::max<std::size_t>(1, (3 * num_speakers + 10) / 20);
  if (num_speakers < 2 * held + 2) {
    throw DataError("synthetic corpus needs at least 4 speakers, got " +
                    std::to_string(num_speakers));
  }
  return {num_speakers - 2 * held, held, held};
}

CorpusSplit MakeSynthetic(const SyntheticOptions& options) {
  if (options.num_keywords < 2) {
    throw DataError("synthetic corpus needs at least 2 keywords, got " +
                    std::to_string(options.num_keywords));
  }
  if (options.num_speakers < 4) {
    throw DataError("synthetic corpus needs at least 4 speakers, got " +
                    std::to_string(options.num_speakers));
  }
  if (options.clips_per_pair < 1) throw DataError("clips_per_pair must be positive");

  Rng keyword_rng = MakeRng(options.seed, "synthetic/keywords");
  Rng speaker_rng = MakeRng(options.seed, "synthetic/speakers");
  Rng clip_rng = MakeRng(options.seed, "synthetic/clips");
  std::vector<KeywordShape> keywords = DrawKeywords(options.num_keywords, &keyword_rng);
  std::vector<SpeakerVoice> voices(options.num_speakers);
  for (auto& v : voices) v = DrawSpeaker(&speaker_rng);

  CorpusIndex index;
  char name[32];
  for (std::size_t k = 0; k < options.num_keywords; ++k) {
    std::snprintf(name, sizeof(name), "kw%03zu", k);
    index.keyword_vocab.push_back(name);
  }
  for (std::size_t s = 0; s < options.num_speakers; ++s) {
    std::snprintf(name, sizeof(name), "spk%04zu", s);
    index.speaker_vocab.push_back(name);
  }

  std::vector<AudioClip> audio;
  for (std::size_t k = 0; k < options.num_keywords; ++k) {
    for (std::size_t s = 0; s < options.num_speakers; ++s) {
      for (std::size_t c = 0; c < options.clips_per_pair; ++c) {
        AudioClip clip;
        clip.samples = Synthesize(keywords[k], voices[s], &clip_rng);
        clip.keyword_id = static_cast<int>(k);
        clip.speaker_id = static_cast<int>(s);
        std::snprintf(name, sizeof(name), "_%02zu", c);
        clip.source_path = "synthetic://" + index.keyword_vocab[k] + "/" +
                           index.speaker_vocab[s] + name;
        index.utterances.push_back({clip.source_path, clip.keyword_id, clip.speaker_id});
        audio.push_back(std::move(clip));
      }
    }
  }

  SplitOptions split_options;
  split_options.partition = SyntheticPartition(options.num_speakers);
  split_options.min_utterances = 0;
  split_options.held_out_words.clear();
  CorpusSplit split = BuildSplit(index, options.seed, split_options);
  // Every speaker is partitioned and nothing is held out, so clips keep the
  // index order.
  if (split.clips.size() != audio.size()) {
    throw DataError("synthetic split lost clips");
  }
  split.audio = std::move(audio);
  return split;
}

}  // namespace orthospot
