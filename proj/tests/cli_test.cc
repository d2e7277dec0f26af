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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "gtest/gtest.h"
#include "orthospot/base/error.h"
#include "orthospot/cli/commands.h"
#include "orthospot/cli/run_config.h"

namespace orthospot {
namespace {

namespace fs = std::filesystem;

TEST(ConfigTest, ParsesKeysCommentsAndBlankLines) {
  RunConfig c;
  ParseConfigText(
      "# comment\n"
      "\n"
      "batch_size = 32   # trailing\n"
      "lambda_orth=0.25\n"
      "scenario_mode = two\n"
      "orth_mode = literal\n"
      "monitor = min\n"
      "held_out_words = a, b\n"
      "partition = 5,2,1\n"
      "hidden_size = 12\n"
      "num_ceps = 20\n",
      "inline", &c);
  EXPECT_EQ(c.train.batch_size, 32u);
  EXPECT_EQ(c.train.lambda_orth, 0.25);
  EXPECT_EQ(c.train.scenario_mode, ScenarioMode::kTwo);
  EXPECT_EQ(c.train.orth_mode, OrthMode::kLiteral);
  EXPECT_EQ(c.train.monitor, MonitorMode::kMinEer);
  EXPECT_EQ(c.split.held_out_words, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(c.split.partition.train, 5u);
  EXPECT_EQ(c.split.partition.test, 1u);
  EXPECT_EQ(c.model.hidden, 12u);
  EXPECT_EQ(c.features.num_ceps, 20u);
}

TEST(ConfigTest, DefaultsFollowTheReferenceRecipe) {
  RunConfig c;
  EXPECT_EQ(c.train.batch_size, 256u);
  EXPECT_EQ(c.train.lr_init, 0.01);
  EXPECT_EQ(c.train.momentum, 0.9);
  EXPECT_EQ(c.train.weight_decay, 0.001);
  EXPECT_EQ(c.train.lr_decay_factor, 2.0);
  EXPECT_EQ(c.train.plateau_patience, 3u);
  EXPECT_EQ(c.train.stop_patience, 10u);
  EXPECT_EQ(c.train.lambda_orth, 1.0);
  EXPECT_EQ(c.model.hidden, 256u);
  EXPECT_EQ(c.model.gru_layers, 2u);
  EXPECT_EQ(c.features.num_ceps, 40u);
  EXPECT_NO_THROW(c.Validate());
}

TEST(ConfigTest, ErrorsNameSourceAndLine) {
  RunConfig c;
  auto message = [&c](const std::string& text) {
    try {
      ParseConfigText(text, "my.cfg", &c);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  EXPECT_EQ(message("batch_size = 4\nbogus_key = 1\n").rfind("my.cfg:2:", 0), 0u);
  EXPECT_EQ(message("\n\nbatch_size = 4x\n").rfind("my.cfg:3:", 0), 0u);
  EXPECT_EQ(message("batch_size\n").rfind("my.cfg:1:", 0), 0u);
  EXPECT_FALSE(message("scenario_mode = three\n").empty());
  EXPECT_FALSE(message("momentum = -\n").empty());
}

TEST(ConfigTest, OverridesWinOverFile) {
  fs::path path = fs::temp_directory_path() / "orthospot_cli_test.cfg";
  std::ofstream(path) << "max_epochs = 7\nseed = 3\n";
  RunConfig c;
  LoadConfigFile(path.string(), &c);
  EXPECT_EQ(c.train.max_epochs, 7u);
  ApplyOverride("max_epochs=2", &c);
  EXPECT_EQ(c.train.max_epochs, 2u);
  EXPECT_EQ(c.train.seed, 3u);
  EXPECT_THROW(ApplyOverride("max_epochs", &c), ConfigError);
  EXPECT_THROW(LoadConfigFile((path.string() + ".missing"), &c), ConfigError);
  fs::remove(path);
}

TEST(ConfigTest, SnapshotRoundTrips) {
  RunConfig a;
  ApplyOverride("lambda_orth=0.1", &a);
  ApplyOverride("grad_clip=5", &a);
  ApplyOverride("dataset=gscd", &a);
  ApplyOverride("data_root=/tmp/x", &a);
  ApplyOverride("frame_stride_ms=12.5", &a);
  std::string text = ConfigText(a);
  RunConfig b;
  ParseConfigText(text, "snapshot", &b);
  EXPECT_EQ(ConfigText(b), text);
  EXPECT_EQ(b.train.lambda_orth, 0.1);
  EXPECT_EQ(b.dataset, DatasetMode::kGscd);
  for (const std::string& key : ConfigKeys()) {
    EXPECT_NE(text.find(key + " = "), std::string::npos) << key;
  }
}

TEST(ConfigTest, ValidateRejectsInconsistentSettings) {
  RunConfig c;
  c.train.batch_size = 0;
  EXPECT_THROW(c.Validate(), ConfigError);
  RunConfig d;
  d.model.hidden = 0;
  EXPECT_THROW(d.Validate(), ConfigError);
}

int ExitCodeOf(const std::function<void()>& body) {
  std::ostringstream err;
  return RunWithExitCode(
      [&body] {
        body();
        return 0;
      },
      err);
}

TEST(ExitCodeTest, MapsErrorFamilies) {
  EXPECT_EQ(ExitCodeOf([] {}), 0);
  EXPECT_EQ(ExitCodeOf([] { throw ConfigError("x"); }), 2);
  EXPECT_EQ(ExitCodeOf([] { throw DataError("x"); }), 3);
  EXPECT_EQ(ExitCodeOf([] { throw CheckpointError("x"); }), 4);
  EXPECT_EQ(ExitCodeOf([] { throw ShapeError("x"); }), 5);
  EXPECT_EQ(ExitCodeOf([] { throw std::runtime_error("x"); }), 1);
}

TEST(ExitCodeTest, MissingDataRootIsADataError) {
  RunConfig c;
  c.dataset = DatasetMode::kGscd;
  c.data_root = "/nonexistent/orthospot/data";
  std::ostringstream log;
  EXPECT_EQ(ExitCodeOf([&] { LoadCorpus(c, &log); }), 3);
  c.data_root.clear();
  unsetenv(kDataEnvVar);
  EXPECT_EQ(ExitCodeOf([&] { ResolveDataRoot(c); }), 3);
}

class TinyRunTest : public ::testing::Test {
 protected:
  static RunConfig Config(const fs::path& out) {
    RunConfig c;
    for (const char* kv : {"synthetic_keywords=3", "synthetic_speakers=14",
                           "synthetic_clips_per_pair=3", "hidden_size=4",
                           "tconv_channels=3", "gru_layers=1", "max_epochs=1",
                           "batch_size=16"}) {
      ApplyOverride(kv, &c);
    }
    c.out_dir = out.string();
    return c;
  }
};

TEST_F(TinyRunTest, TrainWritesArtifactsAndEvalReadsThem) {
  fs::path out = fs::temp_directory_path() / "orthospot_cli_run";
  fs::remove_all(out);
  RunConfig c = Config(out);
  std::ostringstream log;
  TrainSummary s = CommandTrain(c, log);
  for (const char* name : {"config.txt", "split.tsv", "metrics.csv", "best.ckpt",
                           "last.ckpt", "test_eval.txt"}) {
    EXPECT_TRUE(fs::exists(out / name)) << name;
  }
  EvalReport again = CommandEval(c, (out / "best.ckpt").string(), SplitPart::kTest,
                                 (out / "again.txt").string(),
                                 (out / "trials").string(), log);
  EXPECT_EQ(again.kws.eer, s.test.kws.eer);
  EXPECT_EQ(again.sv.eer, s.test.sv.eer);
  EXPECT_TRUE(fs::exists(out / "trials.kws.tsv"));
  EXPECT_TRUE(fs::exists(out / "trials.sv.tsv"));

  // A snapshot reloads into the same run.
  RunConfig reloaded;
  LoadConfigFile((out / "config.txt").string(), &reloaded);
  EXPECT_EQ(ConfigText(reloaded), ConfigText(c));

  std::ofstream(out / "corrupt.ckpt") << "definitely not a checkpoint";
  EXPECT_EQ(ExitCodeOf([&] {
              CommandEval(c, (out / "corrupt.ckpt").string(), SplitPart::kTest, "", "",
                          log);
            }),
            4);
  EXPECT_EQ(ExitCodeOf([&] {
              CommandEval(c, (out / "missing.ckpt").string(), SplitPart::kTest, "", "",
                          log);
            }),
            4);
  fs::remove_all(out);
}

}  // namespace
}  // namespace orthospot
