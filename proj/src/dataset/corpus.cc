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

#include "orthospot/dataset/corpus.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include "orthospot/base/error.h"
#include "orthospot/base/rng.h"

namespace orthospot {

namespace fs = std::filesystem;

void FitToOneSecond(std::vector<float>* samples) {
  samples->resize(kClipSamples, 0.0f);
}

const char* SplitPartName(SplitPart part) {
  switch (part) {
    case SplitPart::kTrain:
      return "train";
    case SplitPart::kValidation:
      return "validation";
    case SplitPart::kTest:
      return "test";
  }
  return "?";
}

const std::vector<std::size_t>& CorpusSplit::part(SplitPart p) const {
  switch (p) {
    case SplitPart::kTrain:
      return train;
    case SplitPart::kValidation:
      return validation;
    case SplitPart::kTest:
      return test;
  }
  return train;
}

const std::vector<std::string>& GscdHeldOutWords() {
  static const std::vector<std::string> words = {"happy", "marvin", "sheila"};
  return words;
}

CorpusIndex ScanGscd(const std::string& root) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) {
    throw DataError("dataset root " + root + " is not a directory");
  }
  // word -> (speaker hash, path)
  std::map<std::string, std::vector<std::pair<std::string, std::string>>> found;
  std::size_t skipped = 0;
  for (const auto& word_dir : fs::directory_iterator(root)) {
    if (!word_dir.is_directory()) continue;
    std::string word = word_dir.path().filename().string();
    if (word.empty() || word[0] == '_' || word[0] == '.') continue;
    auto& entries = found[word];
    for (const auto& file : fs::directory_iterator(word_dir.path())) {
      if (!file.is_regular_file() || file.path().extension() != ".wav") continue;
      std::string path = file.path().string();
      if (!ProbeWav(path)) {
        ++skipped;
        continue;
      }
      std::string stem = file.path().stem().string();
      std::string speaker = stem.substr(0, stem.find('_'));
      entries.emplace_back(speaker, path);
    }
  }

  CorpusIndex index;
  index.skipped_files = skipped;
  std::set<std::string> speakers;
  for (auto& [word, entries] : found) {
    if (entries.empty()) continue;
    index.keyword_vocab.push_back(word);
    for (const auto& e : entries) speakers.insert(e.first);
  }
  index.speaker_vocab.assign(speakers.begin(), speakers.end());
  for (std::size_t k = 0; k < index.keyword_vocab.size(); ++k) {
    auto& entries = found[index.keyword_vocab[k]];
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return a.second < b.second; });
    for (const auto& [speaker, path] : entries) {
      auto it = std::lower_bound(index.speaker_vocab.begin(),
                                 index.speaker_vocab.end(), speaker);
      index.utterances.push_back(
          {path, static_cast<int>(k),
           static_cast<int>(it - index.speaker_vocab.begin())});
    }
  }
  if (skipped > 0) {
    std::cerr << "WARNING: skipped " << skipped << " unreadable WAV files under "
              << root << "\n";
  }
  return index;
}

CorpusSplit BuildSplit(const CorpusIndex& index, uint64_t seed,
                       const SplitOptions& options) {
  const std::size_t num_speakers = index.speaker_vocab.size();
  std::vector<std::size_t> counts(num_speakers, 0);
  for (const ClipInfo& u : index.utterances) ++counts[u.speaker_id];

  std::vector<int> eligible;
  for (std::size_t s = 0; s < num_speakers; ++s) {
    if (counts[s] >= options.min_utterances) eligible.push_back(static_cast<int>(s));
  }
  const PartitionSizes& sizes = options.partition;
  if (sizes.train == 0 || sizes.validation == 0 || sizes.test == 0) {
    throw DataError("partition sizes must all be positive");
  }
  if (eligible.size() < sizes.total()) {
    throw DataError("only " + std::to_string(eligible.size()) + " of " +
                    std::to_string(num_speakers) + " speakers have >= " +
                    std::to_string(options.min_utterances) +
                    " utterances; partition needs " +
                    std::to_string(sizes.total()));
  }

  Rng rng = MakeRng(seed, "split");
  Shuffle(&eligible, &rng);

  CorpusSplit split;
  split.keyword_vocab = index.keyword_vocab;
  split.speaker_vocab = index.speaker_vocab;
  split.raw_utterances = index.utterances.size();
  split.raw_speakers = num_speakers;
  split.eligible_speakers = eligible.size();

  std::vector<int> part_of(num_speakers, -1);
  const std::size_t bounds[3] = {sizes.train, sizes.train + sizes.validation,
                                 sizes.total()};
  for (std::size_t i = 0; i < sizes.total(); ++i) {
    int part = i < bounds[0] ? 0 : (i < bounds[1] ? 1 : 2);
    part_of[eligible[i]] = part;
    split.speaker_partition[part].push_back(eligible[i]);
  }
  for (auto& ids : split.speaker_partition) std::sort(ids.begin(), ids.end());

  std::vector<bool> held_out(index.keyword_vocab.size(), false);
  for (std::size_t k = 0; k < index.keyword_vocab.size(); ++k) {
    held_out[k] = std::find(options.held_out_words.begin(),
                            options.held_out_words.end(),
                            index.keyword_vocab[k]) != options.held_out_words.end();
  }

  for (const ClipInfo& u : index.utterances) {
    int part = part_of[u.speaker_id];
    if (part < 0) continue;
    if (part == 0 && held_out[u.keyword_id]) continue;
    std::size_t id = split.clips.size();
    split.clips.push_back(u);
    (part == 0 ? split.train : part == 1 ? split.validation : split.test).push_back(id);
  }
  return split;
}

AudioClip LoadClip(const CorpusSplit& split, std::size_t i) {
  const ClipInfo& info = split.clips.at(i);
  if (!split.audio.empty()) return split.audio.at(i);
  AudioClip clip;
  WavData wav = ReadWav(info.source_path);
  clip.samples = std::move(wav.samples);
  FitToOneSecond(&clip.samples);
  clip.sample_rate = wav.sample_rate;
  clip.keyword_id = info.keyword_id;
  clip.speaker_id = info.speaker_id;
  clip.source_path = info.source_path;
  return clip;
}

ClassMap BuildClassMap(const CorpusSplit& split) {
  ClassMap map;
  map.keyword_class.assign(split.keyword_vocab.size(), -1);
  map.speaker_class.assign(split.speaker_vocab.size(), -1);
  std::vector<bool> kw_seen(split.keyword_vocab.size(), false);
  for (std::size_t i : split.train) kw_seen[split.clips[i].keyword_id] = true;
  for (std::size_t k = 0; k < kw_seen.size(); ++k) {
    if (kw_seen[k]) map.keyword_class[k] = static_cast<int>(map.num_keyword_classes++);
  }
  for (int s : split.speaker_partition[0]) {
    map.speaker_class[s] = static_cast<int>(map.num_speaker_classes++);
  }
  return map;
}

void WriteManifest(const CorpusSplit& split, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot write manifest " + path);
  for (SplitPart part : {SplitPart::kTrain, SplitPart::kValidation, SplitPart::kTest}) {
    for (std::size_t i : split.part(part)) {
      const ClipInfo& c = split.clips[i];
      os << c.source_path << '\t' << split.keyword_vocab[c.keyword_id] << '\t'
         << split.speaker_vocab[c.speaker_id] << '\t' << SplitPartName(part) << '\n';
    }
  }
  if (!os) throw DataError("write failed for manifest " + path);
}

}  // namespace orthospot
