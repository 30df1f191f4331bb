// Copyright 2026 The nmrpulse Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "nmrpulse/cli.hpp"
#include "nmrpulse/errors.hpp"
#include "nmrpulse/io.hpp"

namespace {

namespace fs = std::filesystem;
using namespace nmrpulse;

constexpr const char* kTinyConfig = R"({
  "system": {"t_slices": 8, "dt_ms": 0.2},
  "network": {"width": 8, "hidden_layers": 2, "n_gates": 4, "batch_size": 2, "epochs": 2,
              "validate_every": 1, "validation_gates": 3},
  "robust": {"epochs": 1, "batch_size": 2, "scenarios_per_example": 2, "alpha": 0.5},
  "sweep": {"gate_set_size": 4, "repeats": 2}
})";

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("nmrpulse_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    io::write_file(path("run.json"), kTinyConfig);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  int run(std::vector<std::string> args) {
    out_.str("");
    err_.str("");
    return cli::run(args, out_, err_);
  }

  int train_nominal(const std::string& out, const std::string& workers = "1") {
    return run({"train", "--config", path("run.json"), "--seed", "5", "--out", path(out), "--workers", workers});
  }

  fs::path dir_;
  std::ostringstream out_;
  std::ostringstream err_;
};

TEST_F(CliTest, TrainWritesCheckpointAndCurve) {
  ASSERT_EQ(train_nominal("nom.json"), cli::kExitOk) << err_.str();
  const auto ck = io::parse_checkpoint(io::read_file(path("nom.json")));
  EXPECT_EQ(ck.seed, 5u);
  EXPECT_EQ(ck.stage, "nominal");
  EXPECT_EQ(ck.params.layer_dims.back(), 8u);
  EXPECT_TRUE(ck.optimizer.has_value());
  const auto curve = io::read_file(path("nom_curve.csv"));
  EXPECT_EQ(std::count(curve.begin(), curve.end(), '\n'), 3);
}

TEST_F(CliTest, RerunIsByteIdentical) {
  ASSERT_EQ(train_nominal("a.json", "1"), cli::kExitOk);
  ASSERT_EQ(train_nominal("b.json", "4"), cli::kExitOk);
  EXPECT_EQ(io::read_file(path("a.json")), io::read_file(path("b.json")));
  EXPECT_EQ(io::read_file(path("a_curve.csv")), io::read_file(path("b_curve.csv")));
}

TEST_F(CliTest, RobustStage) {
  EXPECT_EQ(run({"train", "--config", path("run.json"), "--stage", "robust", "--seed", "5"}), cli::kExitConfig);
  ASSERT_EQ(train_nominal("nom.json"), cli::kExitOk);
  ASSERT_EQ(run({"train", "--config", path("run.json"), "--stage", "robust", "--seed", "5", "--init",
                 path("nom.json"), "--out", path("rob.json")}),
            cli::kExitOk)
      << err_.str();
  EXPECT_EQ(io::parse_checkpoint(io::read_file(path("rob.json"))).stage, "robust");
  EXPECT_EQ(run({"train", "--config", path("run.json"), "--stage", "final", "--seed", "5"}), cli::kExitConfig);
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run({"train", "--config", path("run.json")}), cli::kExitConfig);
  EXPECT_EQ(run({"frobnicate"}), cli::kExitConfig);
  EXPECT_EQ(run({"train", "--config", path("missing.json"), "--seed", "1"}), cli::kExitIo);
  io::write_file(path("bad.json"), R"({"network": {"width": -3}})");
  EXPECT_EQ(run({"train", "--config", path("bad.json"), "--seed", "1"}), cli::kExitConfig);
}

TEST_F(CliTest, CompileWritesPulseFiles) {
  ASSERT_EQ(train_nominal("nom.json"), cli::kExitOk);
  ASSERT_EQ(run({"compile", "90", "0", "0", "--model", path("nom.json"), "--config", path("run.json"), "--out",
                 path("x.json")}),
            cli::kExitOk)
      << err_.str();
  const auto pf = io::parse_pulse_file(io::read_file(path("x.json")));
  EXPECT_EQ(pf.t_slices, 8u);
  EXPECT_EQ(pf.gamma_deg, 90.0);
  EXPECT_GE(pf.nominal_fidelity, 0.0);
  EXPECT_LE(pf.nominal_fidelity, 1.0);
  const auto csv = io::read_file(path("x.csv"));
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 9);

  io::write_file(path("junk.json"), "{\"weights\": 3");
  EXPECT_EQ(run({"compile", "1", "2", "3", "--model", path("junk.json"), "--config", path("run.json")}),
            cli::kExitIo);
}

TEST_F(CliTest, EvalMesh) {
  ASSERT_EQ(train_nominal("nom.json"), cli::kExitOk);
  ASSERT_EQ(run({"eval", "--model", path("nom.json"), "--config", path("run.json"), "--mesh-deg", "9", "--out",
                 path("ev")}),
            cli::kExitOk)
      << err_.str();
  const auto csv = io::read_file(path("ev.csv"));
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1332);
  EXPECT_EQ(csv.rfind("gamma_deg,theta_deg,alpha_deg,fidelity\n0,0,0,", 0), 0u);
  EXPECT_NE(io::read_file(path("ev.json")).find("\"median\""), std::string::npos);
  EXPECT_EQ(run({"eval", "--model", path("nom.json"), "--config", path("run.json"), "--mesh-deg", "7"}),
            cli::kExitConfig);
}

TEST_F(CliTest, SweepTwoModels) {
  ASSERT_EQ(train_nominal("nom.json"), cli::kExitOk);
  ASSERT_EQ(run({"train", "--config", path("run.json"), "--stage", "robust", "--seed", "5", "--init",
                 path("nom.json"), "--out", path("rob.json")}),
            cli::kExitOk);
  const std::string models = "nominal=" + path("nom.json") + ",robust=" + path("rob.json");
  ASSERT_EQ(run({"sweep", "--channel", "alpha_g,phi0", "--grid", "0.9:1.1:3", "--models", models, "--config",
                 path("run.json"), "--seed", "2", "--out", path("sw.csv")}),
            cli::kExitOk)
      << err_.str();
  const auto csv = io::read_file(path("sw.csv"));
  EXPECT_EQ(csv.rfind("channel,value,statistic,nominal,robust\n", 0), 0u);
  // Two channels, three values, four statistics.
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 2 * 3 * 4);
  EXPECT_TRUE(fs::exists(path("sw.json")));
  EXPECT_EQ(run({"sweep", "--channel", "gravity", "--grid", "0:1:2", "--models", models, "--seed", "2"}),
            cli::kExitConfig);
}

TEST_F(CliTest, Inspect) {
  ASSERT_EQ(train_nominal("nom.json"), cli::kExitOk);
  ASSERT_EQ(run({"inspect", path("nom.json")}), cli::kExitOk);
  EXPECT_NE(out_.str().find("nominal"), std::string::npos);
  EXPECT_EQ(run({"inspect", path("nothing.json")}), cli::kExitIo);
}

TEST(ParseGrid, Forms) {
  EXPECT_EQ(cli::parse_grid("0:1:3"), (std::vector<double>{0.0, 0.5, 1.0}));
  EXPECT_EQ(cli::parse_grid("2:2:1"), (std::vector<double>{2.0}));
  EXPECT_THROW(cli::parse_grid("0:1"), ConfigError);
  EXPECT_THROW(cli::parse_grid("0:1:0"), ConfigError);
  EXPECT_THROW(cli::parse_grid("a:1:2"), ConfigError);
}

}  // namespace
