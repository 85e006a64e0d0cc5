// Copyright 2026 The alphaspike Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Drives the installed binary as a subprocess.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "alphaspike/checkpoint.hpp"

namespace alphaspike {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
};

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / ("alphaspike_cli_" + std::string(info->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  Outcome Run(const std::string& args) const {
    const fs::path out = dir_ / "stdout.txt", err = dir_ / "stderr.txt";
    const std::string cmd = "cd '" + dir_.string() + "' && '" ALPHASPIKE_CLI_PATH "' " + args +
                            " >'" + out.string() + "' 2>'" + err.string() + "'";
    const int status = std::system(cmd.c_str());
    Outcome o;
    o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    o.out = Slurp(out);
    o.err = Slurp(err);
    return o;
  }

  fs::path Path(const std::string& name) const { return dir_ / name; }

  fs::path dir_;
};

TEST_F(CliTest, MissingMnistNamesTheFile) {
  fs::create_directories(Path("empty"));
  const Outcome o = Run("train --task mnist --data-dir empty --epochs 1 --quiet");
  EXPECT_EQ(o.code, 2);
  EXPECT_NE(o.err.find("train-images-idx3-ubyte"), std::string::npos) << o.err;
  EXPECT_EQ(std::count(o.err.begin(), o.err.end(), '\n'), 1);
}

TEST_F(CliTest, BadCheckpointIsExitThree) {
  std::ofstream(Path("bad.json")) << "{\"format\": \"something else\"}";
  EXPECT_EQ(Run("eval --checkpoint bad.json").code, 3);
  std::ofstream(Path("junk.json")) << "not json at all";
  EXPECT_EQ(Run("dream --checkpoint junk.json").code, 3);
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(Run("").code, 2);
  EXPECT_EQ(Run("train --task nand --quiet").code, 2);
  EXPECT_EQ(Run("train --task xor --batch_size 0 --quiet").code, 2);
  EXPECT_EQ(Run("train --task xor --pulse-mode sideways").code, 2);
  EXPECT_EQ(Run("--help").code, 0);
}

TEST_F(CliTest, TrainThenEvalIsDeterministic) {
  const Outcome t = Run("train --task xor --seed 3 --epochs 4 --workers 2 --quiet");
  ASSERT_EQ(t.code, 0) << t.err;
  ASSERT_TRUE(fs::exists(Path("checkpoint.json")));
  const Outcome a = Run("eval --checkpoint checkpoint.json");
  const Outcome b = Run("eval --checkpoint checkpoint.json --workers 1");
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out.find("examples 150\n"), std::string::npos) << a.out;
  EXPECT_NE(a.out.find("accuracy "), std::string::npos);
}

TEST_F(CliTest, FlagsRoundTripIntoCheckpoint) {
  const Outcome o = Run(
      "train --task circles --seed 9 --epochs 2 --n-train 40 --quiet --batch_size 8 "
      "--clip_derivative 50 --decay_constant 1.5 --fire_threshold 0.8 --learning_rate 0.002 "
      "--learning_rate_pulses 0.003 --n_hidden 4,3 --n_pulses 2 --nonpulse_init_multiplier -0.5 "
      "--penalty_no_spike 0.7 --pulse_init_multiplier 2.5 --update-only-on-error false "
      "--pulse-mode per_layer");
  ASSERT_EQ(o.code, 0) << o.err;
  const Checkpoint c = LoadCheckpoint(Path("checkpoint.json"));
  ASSERT_TRUE(c.config.has_value());
  const TrainConfig& cfg = *c.config;
  EXPECT_EQ(cfg.batch_size, 8u);
  EXPECT_EQ(cfg.clip_derivative, 50.0);
  EXPECT_EQ(cfg.decay_constant, 1.5);
  EXPECT_EQ(cfg.fire_threshold, 0.8);
  EXPECT_EQ(cfg.learning_rate, 0.002);
  EXPECT_EQ(cfg.learning_rate_pulses, 0.003);
  EXPECT_EQ(cfg.n_hidden, (std::vector<std::size_t>{4, 3}));
  EXPECT_EQ(cfg.n_pulses, 2u);
  EXPECT_EQ(cfg.nonpulse_init_multiplier, -0.5);
  EXPECT_EQ(cfg.penalty_no_spike, 0.7);
  EXPECT_EQ(cfg.pulse_init_multiplier, 2.5);
  EXPECT_EQ(cfg.epochs, 2u);
  EXPECT_EQ(cfg.seed, 9u);
  EXPECT_FALSE(cfg.update_only_on_error);
  EXPECT_EQ(cfg.pulse_mode, PulseMode::kPerLayer);
  EXPECT_EQ(c.task, "circles");
  EXPECT_EQ(c.epoch, 2u);
  EXPECT_EQ(c.model.tau, 1.5);
  EXPECT_EQ(c.model.theta, 0.8);
}

TEST_F(CliTest, MetricsRowsHaveSevenColumns) {
  ASSERT_EQ(Run("train --task and --epochs 3 --n-train 60 --valid-fraction 0.25 --quiet").code, 0);
  std::ifstream in(Path("metrics.csv"));
  std::string line;
  int rows = 0, valid_rows = 0;
  while (std::getline(in, line)) {
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 6) << line;
    if (rows > 0 && line.find(",valid,") != std::string::npos) ++valid_rows;
    ++rows;
  }
  EXPECT_EQ(rows, 1 + 3 + 3);
  EXPECT_EQ(valid_rows, 3);
}

TEST_F(CliTest, ResumeMatchesUninterruptedRun) {
  const std::string common = "train --task xor --seed 5 --n-train 200 --quiet --workers 3";
  ASSERT_EQ(Run(common + " --epochs 4 --checkpoint full.json --metrics full.csv").code, 0);
  ASSERT_EQ(Run(common + " --epochs 2 --checkpoint part.json --metrics part.csv").code, 0);
  const Outcome r =
      Run(common + " --epochs 4 --resume part.json --checkpoint part.json --metrics part.csv");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(Slurp(Path("part.json")), Slurp(Path("full.json")));
  EXPECT_EQ(Slurp(Path("part.csv")), Slurp(Path("full.csv")));
  // Only the epoch budget may change on resume.
  EXPECT_EQ(Run(common + " --epochs 5 --learning_rate 0.5 --resume part.json").code, 2);
}

TEST_F(CliTest, ApproxDemo) {
  const Outcome box =
      Run("approx-demo --mode box --intervals 0.1:0.5,0.3:0.9 --t 4.5 --epsilon 0.05 --probes 2000");
  ASSERT_EQ(box.code, 0) << box.err << box.out;
  EXPECT_NE(box.out.find("violations 0\n"), std::string::npos) << box.out;

  const Outcome single = Run("approx-demo --mode box --intervals 0.2:0.6 --probes 1000");
  EXPECT_EQ(single.code, 0) << single.out;
  EXPECT_NE(single.out.find("violations 0\n"), std::string::npos);
  EXPECT_NE(single.out.find("neurons 5 (bound 6)"), std::string::npos) << single.out;

  const Outcome gadget = Run("approx-demo --mode gadget --direction above --t0 0.3 --t-out 6");
  EXPECT_EQ(gadget.code, 0) << gadget.out;
  const Outcome early = Run("approx-demo --mode gadget --t0 0.3 --t-out 2.9");
  EXPECT_EQ(early.code, 2);
  EXPECT_NE(early.err.find("2 + 1/tau"), std::string::npos) << early.err;

  const Outcome fn = Run("approx-demo --mode function --offset 4 --slope 1 --epsilon 0.5 "
                         "--probes 200 --export net.json");
  EXPECT_EQ(fn.code, 0) << fn.out;
  EXPECT_NE(fn.out.find("violations 0\n"), std::string::npos);
  EXPECT_NO_THROW(LoadCheckpoint(Path("net.json")));

  const Outcome low = Run("approx-demo --mode box --intervals 0.2:0.6 --t 3.9");
  EXPECT_EQ(low.code, 2);
  EXPECT_NE(low.err.find("infeasible"), std::string::npos) << low.err;
}

TEST_F(CliTest, RasterAndDream) {
  ASSERT_EQ(Run("train --task xor --epochs 2 --n-train 100 --quiet").code, 0);
  const Outcome r = Run("raster --checkpoint checkpoint.json --input 0.4,0.6 --traces tr.csv");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.substr(0, 26), "layer,neuron,is_pulse,time");
  EXPECT_EQ(Slurp(Path("tr.csv")).substr(0, 2), "t,");
  EXPECT_EQ(Run("raster --checkpoint checkpoint.json --input 0.4").code, 2);

  const Outcome d = Run("dream --checkpoint checkpoint.json --target 5");
  EXPECT_EQ(d.code, 2);
}

}  // namespace
}  // namespace alphaspike
