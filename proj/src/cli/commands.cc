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

#include "orthospot/cli/commands.h"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "orthospot/base/error.h"
#include "orthospot/dataset/wav.h"
#include "orthospot/frontend/feature_bank.h"
#include "orthospot/frontend/mfcc.h"
#include "orthospot/model/checkpoint.h"

namespace orthospot {

namespace fs = std::filesystem;

namespace {

ModelConfig ModelFor(const RunConfig& config, const ClassMap& classes) {
  ModelConfig m = config.model;
  m.input_dim = config.features.num_ceps;
  return ResolveModelConfig(m, classes);
}

void PrintReport(const char* title, const EvalReport& r, std::ostream& log) {
  char line[256];
  std::snprintf(line, sizeof(line),
                "%s: %zu clips  EER kws %.4f (%zu trials, %zu targets)  "
                "EER sv %.4f (%zu trials, %zu targets)",
                title, r.num_clips, r.kws.eer, r.kws.trials, r.kws.targets, r.sv.eer,
                r.sv.trials, r.sv.targets);
  log << line << std::endl;
}

void WriteText(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << text;
}

}  // namespace

std::string ResolveDataRoot(const RunConfig& config) {
  if (!config.data_root.empty()) return config.data_root;
  const char* env = std::getenv(kDataEnvVar);
  if (env && *env) return env;
  throw DataError(std::string("no dataset root: set data_root or ") + kDataEnvVar);
}

CorpusSplit LoadCorpus(const RunConfig& config, std::ostream* log) {
  if (config.dataset == DatasetMode::kSynthetic) {
    CorpusSplit split = MakeSynthetic(config.synthetic);
    if (log) {
      *log << "synthetic corpus: " << split.clips.size() << " clips, "
           << split.keyword_vocab.size() << " keywords, " << split.speaker_vocab.size()
           << " speakers" << std::endl;
    }
    return split;
  }
  std::string root = ResolveDataRoot(config);
  CorpusIndex index = ScanGscd(root);
  if (log) {
    *log << "scanned " << root << ": " << index.utterances.size() << " utterances, "
         << index.keyword_vocab.size() << " words, " << index.speaker_vocab.size()
         << " speakers";
    if (index.skipped_files) *log << ", " << index.skipped_files << " unreadable";
    *log << std::endl;
  }
  return BuildSplit(index, config.train.seed, config.split);
}

TrainSummary CommandTrain(const RunConfig& config, std::ostream& log) {
  config.Validate();
  CorpusSplit split = LoadCorpus(config, &log);
  fs::create_directories(config.out_dir);
  WriteText(config.out_dir + "/config.txt", ConfigText(config));
  WriteManifest(split, config.out_dir + "/split.tsv");
  log << "speakers train/validation/test: " << split.speaker_partition[0].size() << "/"
      << split.speaker_partition[1].size() << "/" << split.speaker_partition[2].size()
      << "  clips: " << split.train.size() << "/" << split.validation.size() << "/"
      << split.test.size() << std::endl;

  MfccExtractor extractor(config.features);
  FeatureBank bank(split, extractor);
  ModelConfig model = config.model;
  model.input_dim = config.features.num_ceps;

  TrainSummary summary;
  summary.fit = Fit(config.train, model, split, bank, config.out_dir, &log);
  log << "best epoch " << summary.fit.best_epoch << " of " << summary.fit.history.size()
      << std::endl;
  summary.test = Evaluate(summary.fit.best_params, split, bank, split.test,
                          config.test_max_clips);
  PrintReport("test", summary.test, log);
  WriteEvalReport(summary.test, config.out_dir + "/test_eval.txt");
  return summary;
}

EvalReport CommandEval(const RunConfig& config, const std::string& checkpoint,
                       SplitPart part, const std::string& report_path,
                       const std::string& trials_prefix, std::ostream& log) {
  config.Validate();
  CorpusSplit split = LoadCorpus(config, &log);
  ModelParams params = InitParams(ModelFor(config, BuildClassMap(split)), 0);
  LoadCheckpoint(checkpoint, &params);

  MfccExtractor extractor(config.features);
  FeatureBank bank(split, extractor);
  const std::vector<std::size_t>& clips = split.part(part);
  EvalReport report = Evaluate(params, split, bank, clips, config.test_max_clips);
  PrintReport(SplitPartName(part), report, log);
  if (!report_path.empty()) WriteEvalReport(report, report_path);

  if (!trials_prefix.empty()) {
    Embeddings emb = ExtractEmbeddings(params, bank, clips);
    for (Task task : {Task::kKws, Task::kSv}) {
      std::vector<int> labels;
      for (std::size_t c : clips) {
        labels.push_back(task == Task::kKws ? split.clips[c].keyword_id
                                            : split.clips[c].speaker_id);
      }
      TrialSet trials = BuildTrials(labels);
      ScoreTrials(emb, task, &trials);
      WriteTrialDump(split, clips, trials,
                     trials_prefix + "." + TaskName(task) + ".tsv");
    }
  }
  return report;
}

bool CommandGradcheck(const GradcheckSuiteOptions& options, std::ostream& log) {
  GradcheckReport report = RunGradcheckSuite(options, &log);
  std::size_t failed = 0;
  for (const auto& c : report.cases) failed += c.passed ? 0 : 1;
  char line[128];
  std::snprintf(line, sizeof(line), "%zu cases, %zu failed, tolerance %.0e, %.1f s",
                report.cases.size(), failed, options.tolerance, report.seconds);
  log << line << std::endl;
  return report.all_passed();
}

void CommandMakeSynthetic(const RunConfig& config, const std::string& out_dir,
                          bool write_audio, std::ostream& log) {
  config.Validate();
  CorpusSplit split = MakeSynthetic(config.synthetic);
  fs::create_directories(out_dir);
  WriteManifest(split, out_dir + "/manifest.tsv");
  log << split.clips.size() << " clips, " << split.keyword_vocab.size() << " keywords, "
      << split.speaker_vocab.size() << " speakers; manifest " << out_dir
      << "/manifest.tsv" << std::endl;
  if (!write_audio) return;
  std::vector<std::size_t> serial(split.speaker_vocab.size() * split.keyword_vocab.size());
  for (std::size_t i = 0; i < split.clips.size(); ++i) {
    const ClipInfo& info = split.clips[i];
    const std::string& word = split.keyword_vocab[info.keyword_id];
    const std::string& speaker = split.speaker_vocab[info.speaker_id];
    std::size_t n = serial[info.keyword_id * split.speaker_vocab.size() + info.speaker_id]++;
    fs::path dir = fs::path(out_dir) / "audio" / word;
    fs::create_directories(dir);
    WriteWav((dir / (speaker + "_nohash_" + std::to_string(n) + ".wav")).string(),
             split.audio[i].samples, kSampleRate);
  }
  log << "audio written under " << out_dir << "/audio" << std::endl;
}

void CommandSplits(const RunConfig& config, const std::string& manifest_path,
                   std::ostream& log) {
  config.Validate();
  CorpusSplit split = LoadCorpus(config, &log);
  std::size_t held_out_train = 0;
  for (std::size_t i : split.train) {
    const std::string& word = split.keyword_vocab[split.clips[i].keyword_id];
    for (const auto& h : config.split.held_out_words) held_out_train += word == h;
  }
  log << "raw utterances " << split.raw_utterances << ", words " << split.keyword_vocab.size()
      << ", raw speakers " << split.raw_speakers << ", eligible speakers "
      << split.eligible_speakers << std::endl;
  for (SplitPart p : {SplitPart::kTrain, SplitPart::kValidation, SplitPart::kTest}) {
    log << SplitPartName(p) << ": " << split.speaker_partition[static_cast<int>(p)].size()
        << " speakers, " << split.part(p).size() << " clips" << std::endl;
  }
  log << "training clips with held-out words: " << held_out_train << std::endl;
  if (!manifest_path.empty()) {
    WriteManifest(split, manifest_path);
    log << "manifest " << manifest_path << std::endl;
  }
}

void CommandExtractFeatures(const RunConfig& config, const std::string& wav_path,
                            const std::string& out_path, std::ostream& log) {
  config.Validate();
  WavData wav = ReadWav(wav_path);
  FitToOneSecond(&wav.samples);
  MfccExtractor extractor(config.features);
  FeatureMatrix features = extractor.Compute(wav.samples);
  WriteFeatureDump(features, out_path);
  log << wav_path << ": " << features.num_frames << " x " << features.dim << " -> "
      << out_path << std::endl;
}

int RunWithExitCode(const std::function<int()>& body, std::ostream& err) {
  try {
    return body();
  } catch (const Error& e) {
    err << "error: " << e.what() << std::endl;
    return static_cast<int>(e.code());
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << std::endl;
    return static_cast<int>(ExitCode::kData);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << std::endl;
    return static_cast<int>(ExitCode::kUsage);
  }
}

}  // namespace orthospot
