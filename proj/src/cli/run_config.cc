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

#include "orthospot/cli/run_config.h"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "orthospot/base/error.h"

namespace orthospot {

namespace {

std::string Trim(const std::string& s) {
  const char* ws = " \t\r\n";
  std::size_t begin = s.find_first_not_of(ws);
  if (begin == std::string::npos) return "";
  std::size_t end = s.find_last_not_of(ws);
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> SplitList(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = Trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T>
T ParseNumber(const std::string& text) {
  T value{};
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw ConfigError("cannot parse '" + text + "' as a number");
  }
  return value;
}

bool ParseBool(const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError("cannot parse '" + text + "' as a boolean");
}

std::string FormatDouble(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string JoinList(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ",";
    out += items[i];
  }
  return out;
}

struct Key {
  const char* name;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig*, const std::string&)> set;
};

#define SIZE_KEY(name, field)                                                  \
  Key {                                                                        \
    name, [](const RunConfig& c) { return std::to_string(c.field); },          \
        [](RunConfig* c, const std::string& v) {                               \
          c->field = ParseNumber<std::size_t>(v);                              \
        }                                                                      \
  }
#define DOUBLE_KEY(name, field)                                                \
  Key {                                                                        \
    name, [](const RunConfig& c) { return FormatDouble(c.field); },            \
        [](RunConfig* c, const std::string& v) { c->field = ParseNumber<double>(v); } \
  }

const std::vector<Key>& Keys() {
  static const std::vector<Key> keys = {
      {"dataset",
       [](const RunConfig& c) {
         return std::string(c.dataset == DatasetMode::kGscd ? "gscd" : "synthetic");
       },
       [](RunConfig* c, const std::string& v) {
         if (v == "gscd") {
           c->dataset = DatasetMode::kGscd;
         } else if (v == "synthetic") {
           c->dataset = DatasetMode::kSynthetic;
         } else {
           throw ConfigError("dataset must be gscd or synthetic, got '" + v + "'");
         }
       }},
      {"data_root", [](const RunConfig& c) { return c.data_root; },
       [](RunConfig* c, const std::string& v) { c->data_root = v; }},
      SIZE_KEY("synthetic_keywords", synthetic.num_keywords),
      SIZE_KEY("synthetic_speakers", synthetic.num_speakers),
      SIZE_KEY("synthetic_clips_per_pair", synthetic.clips_per_pair),
      {"synthetic_seed",
       [](const RunConfig& c) { return std::to_string(c.synthetic.seed); },
       [](RunConfig* c, const std::string& v) {
         c->synthetic.seed = ParseNumber<uint64_t>(v);
       }},
      {"partition",
       [](const RunConfig& c) {
         const PartitionSizes& p = c.split.partition;
         return std::to_string(p.train) + "," + std::to_string(p.validation) + "," +
                std::to_string(p.test);
       },
       [](RunConfig* c, const std::string& v) {
         auto parts = SplitList(v);
         if (parts.size() != 3) {
           throw ConfigError("partition needs three speaker counts, got '" + v + "'");
         }
         c->split.partition = {ParseNumber<std::size_t>(parts[0]),
                               ParseNumber<std::size_t>(parts[1]),
                               ParseNumber<std::size_t>(parts[2])};
       }},
      SIZE_KEY("min_speaker_utterances", split.min_utterances),
      {"held_out_words", [](const RunConfig& c) { return JoinList(c.split.held_out_words); },
       [](RunConfig* c, const std::string& v) { c->split.held_out_words = SplitList(v); }},
      {"out_dir", [](const RunConfig& c) { return c.out_dir; },
       [](RunConfig* c, const std::string& v) { c->out_dir = v; }},
      SIZE_KEY("test_max_clips", test_max_clips),

      SIZE_KEY("batch_size", train.batch_size),
      DOUBLE_KEY("lr_init", train.lr_init),
      DOUBLE_KEY("momentum", train.momentum),
      DOUBLE_KEY("weight_decay", train.weight_decay),
      DOUBLE_KEY("lr_decay_factor", train.lr_decay_factor),
      SIZE_KEY("plateau_patience", train.plateau_patience),
      SIZE_KEY("stop_patience", train.stop_patience),
      SIZE_KEY("max_epochs", train.max_epochs),
      DOUBLE_KEY("lambda_orth", train.lambda_orth),
      {"orth_mode", [](const RunConfig& c) { return std::string(OrthModeName(c.train.orth_mode)); },
       [](RunConfig* c, const std::string& v) { c->train.orth_mode = ParseOrthMode(v); }},
      DOUBLE_KEY("triplet_margin", train.triplet_margin),
      {"seed", [](const RunConfig& c) { return std::to_string(c.train.seed); },
       [](RunConfig* c, const std::string& v) { c->train.seed = ParseNumber<uint64_t>(v); }},
      {"scenario_mode",
       [](const RunConfig& c) {
         return std::string(c.train.scenario_mode == ScenarioMode::kFour ? "four" : "two");
       },
       [](RunConfig* c, const std::string& v) {
         if (v == "four") {
           c->train.scenario_mode = ScenarioMode::kFour;
         } else if (v == "two") {
           c->train.scenario_mode = ScenarioMode::kTwo;
         } else {
           throw ConfigError("scenario_mode must be four or two, got '" + v + "'");
         }
       }},
      {"monitor",
       [](const RunConfig& c) {
         return std::string(c.train.monitor == MonitorMode::kMaxEer ? "max" : "min");
       },
       [](RunConfig* c, const std::string& v) {
         if (v == "max") {
           c->train.monitor = MonitorMode::kMaxEer;
         } else if (v == "min") {
           c->train.monitor = MonitorMode::kMinEer;
         } else {
           throw ConfigError("monitor must be max or min, got '" + v + "'");
         }
       }},
      DOUBLE_KEY("grad_clip", train.grad_clip),
      SIZE_KEY("micro_batch", train.micro_batch),
      {"check_grad_coverage",
       [](const RunConfig& c) { return std::string(c.train.check_grad_coverage ? "true" : "false"); },
       [](RunConfig* c, const std::string& v) { c->train.check_grad_coverage = ParseBool(v); }},
      SIZE_KEY("eval_max_clips", train.eval_max_clips),

      SIZE_KEY("tconv_channels", model.tconv_channels),
      SIZE_KEY("tconv_width", model.tconv_width),
      SIZE_KEY("hidden_size", model.hidden),
      SIZE_KEY("gru_layers", model.gru_layers),

      DOUBLE_KEY("frame_length_ms", features.frame_length_ms),
      DOUBLE_KEY("frame_stride_ms", features.frame_stride_ms),
      DOUBLE_KEY("preemphasis", features.preemphasis),
      SIZE_KEY("fft_size", features.fft_size),
      SIZE_KEY("num_mel_bins", features.num_mel_bins),
      SIZE_KEY("num_ceps", features.num_ceps),
      DOUBLE_KEY("low_hz", features.low_hz),
      DOUBLE_KEY("high_hz", features.high_hz),
      DOUBLE_KEY("log_floor", features.log_floor),
  };
  return keys;
}

#undef SIZE_KEY
#undef DOUBLE_KEY

const Key& FindKey(const std::string& name) {
  for (const Key& k : Keys()) {
    if (name == k.name) return k;
  }
  throw ConfigError("unknown key '" + name + "'");
}

void Assign(const std::string& line, RunConfig* config) {
  std::size_t eq = line.find('=');
  if (eq == std::string::npos) throw ConfigError("expected 'key = value'");
  std::string key = Trim(line.substr(0, eq));
  std::string value = Trim(line.substr(eq + 1));
  if (key.empty()) throw ConfigError("missing key before '='");
  FindKey(key).set(config, value);
}

}  // namespace

void RunConfig::Validate() const {
  train.Validate();
  ModelConfig m = model;
  m.input_dim = features.num_ceps;
  try {
    m.Validate();
  } catch (const ShapeError& e) {
    throw ConfigError(e.what());
  }
  if (features.num_ceps > features.num_mel_bins) {
    throw ConfigError("num_ceps cannot exceed num_mel_bins");
  }
  if (features.high_hz <= features.low_hz) throw ConfigError("high_hz must exceed low_hz");
  if (features.frame_stride_ms <= 0.0 || features.frame_length_ms <= 0.0) {
    throw ConfigError("frame length and stride must be positive");
  }
  if (dataset == DatasetMode::kSynthetic) {
    if (synthetic.num_keywords < 2) throw ConfigError("synthetic_keywords must be >= 2");
    if (synthetic.num_speakers < 4) throw ConfigError("synthetic_speakers must be >= 4");
    if (synthetic.clips_per_pair < 1) {
      throw ConfigError("synthetic_clips_per_pair must be positive");
    }
  }
}

void ParseConfigText(const std::string& text, const std::string& source,
                     RunConfig* config) {
  std::istringstream in(text);
  std::string line;
  for (std::size_t number = 1; std::getline(in, line); ++number) {
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    if (Trim(line).empty()) continue;
    try {
      Assign(line, config);
    } catch (const ConfigError& e) {
      throw ConfigError(source + ":" + std::to_string(number) + ": " + e.what());
    }
  }
}

void LoadConfigFile(const std::string& path, RunConfig* config) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  ParseConfigText(buf.str(), path, config);
}

void ApplyOverride(const std::string& assignment, RunConfig* config) {
  try {
    Assign(assignment, config);
  } catch (const ConfigError& e) {
    throw ConfigError("--set " + assignment + ": " + e.what());
  }
}

std::string ConfigText(const RunConfig& config) {
  std::string out;
  for (const Key& k : Keys()) {
    out += k.name;
    out += " = ";
    out += k.get(config);
    out += "\n";
  }
  return out;
}

std::vector<std::string> ConfigKeys() {
  std::vector<std::string> names;
  for (const Key& k : Keys()) names.push_back(k.name);
  return names;
}

}  // namespace orthospot
