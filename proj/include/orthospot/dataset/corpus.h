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

#ifndef ORTHOSPOT_DATASET_CORPUS_H_
#define ORTHOSPOT_DATASET_CORPUS_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "orthospot/dataset/wav.h"

namespace orthospot {

constexpr std::size_t kClipSamples = kSampleRate;  // exactly 1 s

struct AudioClip {
  std::vector<float> samples;  // 16-bit grid, normalized to [-1, 1]
  int sample_rate = kSampleRate;
  int keyword_id = -1;
  int speaker_id = -1;
  std::string source_path;
};

// Zero-pads at the end or truncates to kClipSamples.
void FitToOneSecond(std::vector<float>* samples);

struct ClipInfo {
  std::string source_path;
  int keyword_id = -1;
  int speaker_id = -1;
};

// Raw utterance listing of a GSCD-style tree.
struct CorpusIndex {
  std::vector<ClipInfo> utterances;
  std::vector<std::string> keyword_vocab;  // sorted
  std::vector<std::string> speaker_vocab;  // sorted speaker hashes
  std::size_t skipped_files = 0;           // unreadable or rejected WAVs
};

enum class SplitPart : int { kTrain = 0, kValidation = 1, kTest = 2 };
const char* SplitPartName(SplitPart part);

struct PartitionSizes {
  std::size_t train = 0;
  std::size_t validation = 0;
  std::size_t test = 0;
  std::size_t total() const { return train + validation + test; }
};

// Speaker-disjoint split. Clip lists index into `clips`. `audio` holds the
// waveforms of generated corpora and is empty for on-disk ones.
struct CorpusSplit {
  std::vector<ClipInfo> clips;
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
  std::vector<std::string> keyword_vocab;
  std::vector<std::string> speaker_vocab;
  std::array<std::vector<int>, 3> speaker_partition;  // by SplitPart
  std::vector<AudioClip> audio;

  // Reporting only.
  std::size_t raw_utterances = 0;
  std::size_t raw_speakers = 0;
  std::size_t eligible_speakers = 0;

  const std::vector<std::size_t>& part(SplitPart p) const;
};

// GSCDv2 defaults.
inline constexpr PartitionSizes kGscdPartition{1959, 159, 159};
inline constexpr std::size_t kMinSpeakerUtterances = 11;
const std::vector<std::string>& GscdHeldOutWords();

// Lists <root>/<word>/<speaker>_nohash_<n>.wav. Folders starting with '_'
// are ignored. Throws DataError when root is not a directory.
CorpusIndex ScanGscd(const std::string& root);

struct SplitOptions {
  PartitionSizes partition = kGscdPartition;
  std::size_t min_utterances = kMinSpeakerUtterances;
  std::vector<std::string> held_out_words = GscdHeldOutWords();
};

// Drops speakers with fewer than min_utterances clips, shuffles the rest with
// the "split" stream of `seed`, and deals them into train/validation/test.
// Training loses the held-out words. Pure in (index, seed, options).
CorpusSplit BuildSplit(const CorpusIndex& index, uint64_t seed,
                       const SplitOptions& options = {});

struct SyntheticOptions {
  std::size_t num_keywords = 8;
  std::size_t num_speakers = 20;
  std::size_t clips_per_pair = 10;
  uint64_t seed = 0;
};

// Validation and test each get round(0.15 * speakers), at least one.
PartitionSizes SyntheticPartition(std::size_t num_speakers);

// Procedural corpus: the keyword fixes a three-segment formant and pitch
// contour, the speaker fixes f0, vocal-tract scale, spectral tilt, and an
// extra resonance. Deterministic in the seed.
CorpusSplit MakeSynthetic(const SyntheticOptions& options);

// Returns the 1 s waveform for clips[i], from memory or disk.
AudioClip LoadClip(const CorpusSplit& split, std::size_t i);

// Dense class ids over the keywords and speakers present in training.
struct ClassMap {
  std::vector<int> keyword_class;  // by keyword id, -1 when absent
  std::vector<int> speaker_class;  // by speaker id, -1 when absent
  std::size_t num_keyword_classes = 0;
  std::size_t num_speaker_classes = 0;
};
ClassMap BuildClassMap(const CorpusSplit& split);

// One line per clip: path<TAB>keyword<TAB>speaker<TAB>split.
void WriteManifest(const CorpusSplit& split, const std::string& path);

}  // namespace orthospot

#endif  // ORTHOSPOT_DATASET_CORPUS_H_
