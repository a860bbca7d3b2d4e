// Copyright 2026 The bcnn-asc Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <fstream>
#include <sstream>

#include "asc/model/serialize.hpp"
#include "asc/util/binary_io.hpp"
#include "reduced_spec.hpp"
#include "toy_corpus.hpp"

namespace {

namespace fs = std::filesystem;

struct Run {
  int code;
  std::string out, err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Run run(const fs::path& dir, const std::string& args) {
  const auto out = dir / "stdout.txt", err = dir / "stderr.txt";
  const std::string cmd = std::string(ASC_CLI_PATH) + " " + args + " >" + out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

// Toy architecture on the default front end, a few epochs, and split
// fractions that leave 2/1/1 clips per class.
void write_toy_config(const fs::path& path, std::size_t epochs) {
  asc::PipelineConfig c;
  c.architecture = testutil::toy_spec(toy::labels());
  c.training.max_epochs = epochs;
  c.training.batch_size = 4;
  c.training.test_fraction = 0.25;
  c.training.validation_fraction = 0.5;
  std::ofstream(path) << asc::to_json(c).dump(2);
}

TEST(Cli, ExtractContract) {
  const auto dir = testutil::scratch_dir("cli_extract");
  const auto specs = toy::clips(1);
  toy::write_corpus(dir, {specs[0], specs[1]});
  write_toy_config(dir / "config.json", 1);

  // Third clip at the wrong sample rate.
  asc::write_wav(dir / "audio/slow.wav", {testutil::sine(440.0, 10.0, 44100).samples}, 44100);
  std::ofstream(dir / "manifest.tsv", std::ios::app) << "audio/slow.wav\ttone\n";

  const std::string args = "extract --manifest " + (dir / "manifest.tsv").string() + " --out-dir " +
                           (dir / "feat").string() + " --config " + (dir / "config.json").string() + " --jobs 2";
  const auto r = run(dir, args);
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.err.find("audio/slow.wav"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("RateMismatch"), std::string::npos) << r.err;
  EXPECT_NE(r.out.find("processed 2, failed 1"), std::string::npos) << r.out;
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir / "feat")) ++files;
  EXPECT_EQ(files, 2u);

  // Re-running over existing outputs gives identical bytes.
  const auto first = asc::bin::read_file(dir / "feat" / "audio__tone_0.feat");
  run(dir, args);
  EXPECT_EQ(asc::bin::read_file(dir / "feat" / "audio__tone_0.feat"), first);

  // All-valid manifest exits cleanly.
  toy::write_corpus(dir, {specs[0], specs[1]});
  const auto ok = run(dir, "extract --manifest " + (dir / "manifest.tsv").string() + " --out-dir " +
                               (dir / "feat2").string() + " --config " + (dir / "config.json").string());
  EXPECT_EQ(ok.code, 0) << ok.err;
  EXPECT_NE(ok.out.find("processed 2, failed 0"), std::string::npos);
  fs::remove_all(dir);
}

TEST(Cli, DefaultsEchoedWithoutConfig) {
  const auto dir = testutil::scratch_dir("cli_defaults");
  fs::create_directories(dir / "audio");
  asc::write_wav(dir / "audio/p.wav", {testutil::noise(1).samples}, 48000);
  std::ofstream(dir / "manifest.tsv") << "audio/p.wav\tpark\n";
  const auto r = run(dir, "extract --manifest " + (dir / "manifest.tsv").string() + " --out-dir " +
                              (dir / "feat").string());
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.err.find("using defaults"), std::string::npos);
  const auto echoed = asc::Json::parse(r.err.substr(r.err.find('{')));
  EXPECT_EQ(echoed, asc::to_json(asc::PipelineConfig{}));
  EXPECT_TRUE(fs::exists(dir / "feat" / "audio__p.feat"));
  fs::remove_all(dir);
}

TEST(Cli, UsageErrors) {
  const auto dir = testutil::scratch_dir("cli_usage");
  EXPECT_NE(run(dir, "").code, 0);
  EXPECT_NE(run(dir, "train --manifest x.tsv").code, 0);
  const auto bad = run(dir, "evaluate --model /nonexistent.bcnn --manifest x --features-dir y");
  EXPECT_NE(bad.code, 0);
  EXPECT_NE(bad.err.find("error:"), std::string::npos);
  fs::remove_all(dir);
}

TEST(Cli, TrainEvaluatePredict) {
  const auto dir = testutil::scratch_dir("cli_pipeline");
  toy::write_corpus(dir, toy::clips(4));
  write_toy_config(dir / "config.json", 3);
  const std::string cfg = " --config " + (dir / "config.json").string();
  const std::string manifest = " --manifest " + (dir / "manifest.tsv").string();
  const std::string feats = " --features-dir " + (dir / "feat").string();

  ASSERT_EQ(run(dir, "extract" + manifest + " --out-dir " + (dir / "feat").string() + cfg).code, 0);

  const auto t1 = run(dir, "train" + manifest + feats + cfg + " --out " + (dir / "a.bcnn").string());
  ASSERT_EQ(t1.code, 0) << t1.err;
  const auto t2 = run(dir, "train" + manifest + feats + cfg + " --out " + (dir / "b.bcnn").string());
  ASSERT_EQ(t2.code, 0) << t2.err;
  EXPECT_EQ(asc::bin::read_file(dir / "a.bcnn"), asc::bin::read_file(dir / "b.bcnn"));
  EXPECT_NO_THROW(asc::load_model<float>(dir / "a.bcnn"));

  const auto history = slurp(dir / "a.bcnn.history.csv");
  EXPECT_EQ(history.substr(0, history.find('\n')), "epoch,train_loss,val_loss,lr");
  EXPECT_EQ(std::count(history.begin(), history.end(), '\n'), 4);
  const auto test_split = asc::load_manifest(dir / "a.bcnn.test.tsv", toy::labels());
  EXPECT_EQ(test_split.size(), 2u);

  const auto ev = run(dir, "evaluate --model " + (dir / "a.bcnn").string() + manifest + feats + " --report " +
                               (dir / "report.json").string());
  ASSERT_EQ(ev.code, 0) << ev.err;
  const auto report = asc::Json::parse(slurp(dir / "report.json"));
  EXPECT_EQ(report["sample_count"], 8);
  std::size_t trace = 0;
  for (std::size_t k = 0; k < 2; ++k) {
    const double acc = report["per_scene"][k]["accuracy"];
    EXPECT_GE(acc, 0.0);
    EXPECT_LE(acc, 1.0);
    trace += report["confusion_matrix"][k][k].get<std::size_t>();
  }
  EXPECT_EQ(report["overall_accuracy"].get<double>(), static_cast<double>(trace) / 8.0);

  const std::string wav = (dir / "audio/tone_1.wav").string();
  const auto p1 = run(dir, "predict --model " + (dir / "a.bcnn").string() + " --wav " + wav);
  ASSERT_EQ(p1.code, 0) << p1.err;
  const auto p2 = run(dir, "predict --model " + (dir / "a.bcnn").string() + " --wav " + wav);
  EXPECT_EQ(p1.out, p2.out);
  std::istringstream lines(p1.out);
  std::string line;
  double total = 0;
  int flagged = 0;
  for (int k = 0; k < 2 && std::getline(lines, line); ++k) {
    flagged += line[0] == '*';
    total += std::stod(line.substr(line.find_last_of(' ') + 1));
  }
  EXPECT_EQ(flagged, 1);
  EXPECT_NEAR(total, 1.0, 1e-5);
  EXPECT_NE(p1.out.find("top-1: "), std::string::npos);

  asc::write_wav(dir / "slow.wav", {testutil::sine(440.0, 10.0, 44100).samples}, 44100);
  const auto slow = run(dir, "predict --model " + (dir / "a.bcnn").string() + " --wav " + (dir / "slow.wav").string());
  EXPECT_NE(slow.code, 0);
  EXPECT_NE(slow.err.find("RateMismatch"), std::string::npos) << slow.err;

  fs::remove(dir / "feat" / "audio__click_2.feat");
  const auto missing = run(dir, "train" + manifest + feats + cfg + " --out " + (dir / "c.bcnn").string());
  EXPECT_NE(missing.code, 0);
  EXPECT_NE(missing.err.find("audio__click_2"), std::string::npos) << missing.err;
  fs::remove_all(dir);
}

}  // namespace
