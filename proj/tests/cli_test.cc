// Copyright 2026 The RMT Authors
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

#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "rmt/experiment.h"

namespace rmt {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code = -1;
  std::string out;
};

// Runs the CLI through the shell, capturing stdout (and stderr when asked).
Result Cli(const std::string& args, bool merge_stderr = false) {
  const std::string cmd = std::string(RMT_CLI_PATH) + " " + args + (merge_stderr ? " 2>&1" : " 2>/dev/null");
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf;
  while (fgets(buf.data(), buf.size(), pipe)) r.out += buf.data();
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const std::string name = ::testing::UnitTest::GetInstance()->current_test_info()->name();
    dir_ = fs::temp_directory_path() / ("rmt_cli_" + name + "_" + std::to_string(getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path Write(const std::string& name, const std::string& contents) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << contents;
    return p;
  }

  fs::path dir_;
};

double Field(const std::string& out, const std::string& key) {
  const std::size_t at = out.find(key + ": ");
  if (at == std::string::npos) return NAN;
  return std::stod(out.substr(at + key.size() + 2));
}

std::string Line(const std::string& out, const std::string& key) {
  std::istringstream in(out);
  for (std::string line; std::getline(in, line);) {
    if (line.rfind(key + ": ", 0) == 0) return line.substr(key.size() + 2);
  }
  return "";
}

TEST_F(CliTest, SolveMatchingPennies) {
  const Result r = Cli("solve-game " + Write("pennies.csv", "1,-1\n-1,1\n").string());
  EXPECT_EQ(r.code, 0);
  EXPECT_NEAR(Field(r.out, "value"), 0.0, 1e-3);
  EXPECT_EQ(Line(r.out, "w"), "0.5, 0.5");
  EXPECT_NEAR(Field(r.out, "entropy_w"), std::log(2.0), 1e-6);
  EXPECT_LE(Field(r.out, "exploitability"), 1e-3);
}

TEST_F(CliTest, SolveIndependentTasks) {
  const Result r = Cli("solve-game " + Write("independent.csv", "0.9,1.0\n2.0,1.9\n").string());
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(Line(r.out, "w"), "1e-06, 0.999999");
  EXPECT_NEAR(Field(r.out, "value"), 1.9, 1e-5);
}

TEST_F(CliTest, SolveOneByOne) {
  const Result r = Cli("solve-game " + Write("one.csv", "-2.5\n").string());
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(Field(r.out, "value"), -2.5);
  EXPECT_EQ(Line(r.out, "w"), "1");
}

TEST_F(CliTest, SolveRejectsNonSquare) {
  EXPECT_EQ(Cli("solve-game " + Write("rect.csv", "1,2,3\n4,5,6\n").string()).code, kExitConfigError);
  EXPECT_EQ(Cli("solve-game " + Write("text.csv", "1,a\n4,5\n").string()).code, kExitConfigError);
  EXPECT_EQ(Cli("solve-game " + (dir_ / "missing.csv").string()).code, kExitConfigError);
}

TEST_F(CliTest, SolveExitCodeTracksTolerance) {
  // Rock-paper-scissors with a tolerance of 1e-15 cannot be certified by
  // averaged play within the iteration budget unless the polish lands
  // exactly; either way the exit code must agree with the printout.
  const Result r = Cli("solve-game " + Write("rps.csv", "0,1,-1\n-1,0,1\n1,-1,0\n").string() +
                       " --tol 1e-15");
  const double e = Field(r.out, "exploitability");
  EXPECT_EQ(r.code == 0, e <= 1e-15);
}

TEST_F(CliTest, RunSyntheticDefault) {
  const Result r = Cli("run-synthetic --out " + (dir_ / "syn").string());
  ASSERT_EQ(r.code, 0);
  const std::vector<TrajectoryRow> rows = ReadTrajectoryCsv(dir_ / "syn" / "trajectory.csv");
  // N tasks x steps / eval_interval.
  EXPECT_EQ(rows.size(), 10u * 3000 / 10);
  EXPECT_TRUE(fs::exists(dir_ / "syn" / "summary.json"));
}

TEST_F(CliTest, RunSyntheticCompareWithNoise) {
  const Result r = Cli("run-synthetic --compare --noise 0.05 --seed 3 --out " +
                       (dir_ / "cmp").string());
  ASSERT_EQ(r.code, 0);
  for (const char* m : {"uniform", "dro", "ldro"}) {
    EXPECT_TRUE(fs::exists(dir_ / "cmp" / m / "trajectory.csv")) << m;
  }
  EXPECT_TRUE(fs::exists(dir_ / "cmp" / "compare.csv"));
}

TEST_F(CliTest, MalformedConfigLeavesNoOutputs) {
  const fs::path cfg = Write("bad.json", "{\n  \"task\": {\"family\": \"geometric\"\n");
  const fs::path out = dir_ / "never";
  const Result r =
      Cli("run-synthetic --config " + cfg.string() + " --out " + out.string(), true);
  EXPECT_EQ(r.code, kExitConfigError);
  EXPECT_FALSE(fs::exists(out));
  EXPECT_NE(r.out.find("line"), std::string::npos);
}

TEST_F(CliTest, UnknownFieldDiagnosticNamesLine) {
  const fs::path cfg = Write("unknown.json",
                             "{\n"
                             "  \"task\": {\"family\": \"geometric\"},\n"
                             "  \"strategy\": {\"kind\": \"ldro\", \"etaa\": 0.1}\n"
                             "}\n");
  const fs::path out = dir_ / "never";
  const Result r =
      Cli("run-synthetic --config " + cfg.string() + " --out " + out.string(), true);
  EXPECT_EQ(r.code, kExitConfigError);
  EXPECT_NE(r.out.find("line 3"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("/strategy/etaa"), std::string::npos) << r.out;
  EXPECT_FALSE(fs::exists(out));
}

TEST_F(CliTest, DivergenceExitCode) {
  const fs::path cfg = Write("diverge.json", R"({
    "task": {"family": "geometric"},
    "strategy": {"kind": "uniform"},
    "optimizer": {"learning_rate": 50.0, "steps": 100}
  })");
  EXPECT_EQ(Cli("run-synthetic --config " + cfg.string() + " --out " + (dir_ / "d").string()).code,
            kExitDivergence);
}

TEST_F(CliTest, ClassificationSweepAndFrontier) {
  const fs::path cfg = Write("cls.json", R"({
    "task": {"family": "classification", "num_tasks": 3, "num_classes": 3, "input_dim": 4,
             "examples_per_class": 30, "heldout_per_class": 10, "min_examples_per_class": 5},
    "strategy": {"kind": "ldro", "refresh_interval": 5},
    "optimizer": {"learning_rate": 0.1, "momentum": 0.9, "nesterov": true, "steps": 30},
    "eval_interval": 10,
    "seeds": [0],
    "sweep": {"methods": ["uniform", "ldro"], "eta": [0.1, 0.01], "lambda": [0.1]}
  })");
  const fs::path out = dir_ / "cls";
  ASSERT_EQ(Cli("run-classification --jobs 2 --config " + cfg.string() + " --out " + out.string()).code,
            0);
  EXPECT_TRUE(fs::exists(out / "frontier_ldro.csv"));
  EXPECT_TRUE(fs::exists(out / "frontier_uniform.csv"));

  const Result f = Cli("frontier " + (out / "runs" / "ldro_eta0.1_lambda0.1_seed0" / "trajectory.csv").string() +
                       " " + (out / "runs" / "ldro_eta0.01_lambda0.1_seed0" / "trajectory.csv").string());
  ASSERT_EQ(f.code, 0);
  const fs::path printed = Write("printed.csv", f.out);
  EXPECT_EQ(ReadFrontierCsv(printed), ReadFrontierCsv(out / "frontier_ldro.csv"));
}

TEST_F(CliTest, LogLevelFromEnvironment) {
  const std::string cmd = "env RMT_LOG=off " + std::string(RMT_CLI_PATH) +
                          " run-synthetic --out " + (dir_ / "quiet").string() + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  ASSERT_NE(pipe, nullptr);
  std::string out;
  std::array<char, 256> buf;
  while (fgets(buf.data(), buf.size(), pipe)) out += buf.data();
  EXPECT_EQ(pclose(pipe), 0);
  EXPECT_TRUE(out.empty()) << out;
  EXPECT_NE(Cli("run-synthetic --out " + (dir_ / "loud").string(), true).out.find("info"),
            std::string::npos);
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(Cli("").code, kExitConfigError);
  EXPECT_EQ(Cli("run-synthetic --jobs 2").code, kExitConfigError);
  EXPECT_EQ(Cli("--help").code, 0);
}

}  // namespace
}  // namespace rmt
