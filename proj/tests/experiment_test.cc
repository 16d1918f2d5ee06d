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

#include "rmt/experiment.h"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <unistd.h>

namespace rmt {
namespace {

namespace fs = std::filesystem;

class ExperimentTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const std::string name = ::testing::UnitTest::GetInstance()->current_test_info()->name();
    dir_ = fs::temp_directory_path() / ("rmt_experiment_" + name + "_" + std::to_string(getpid()));
    fs::remove_all(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path dir_;
};

std::string Slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig SmallClassification() {
  ExperimentConfig c = DefaultClassificationConfig();
  c.classification.num_tasks = 3;
  c.classification.num_classes = 3;
  c.classification.input_dim = 4;
  c.classification.examples_per_class = 30;
  c.classification.heldout_per_class = 10;
  c.classification.min_examples_per_class = 5;
  c.optimizer.steps = 40;
  c.eval_interval = 10;
  c.seeds = {0, 1};
  c.sweep.eta = {0.1, 0.01};
  c.sweep.lambda = {0.1, 1.0};
  return c;
}

TEST_F(ExperimentTest, TrajectoryCsvRoundTripIsExact) {
  ExperimentConfig c = SmallClassification();
  const auto tasks = BuildTaskSet(c, 0);
  const Trajectory t = Train(*tasks, c.strategy, c.optimizer, c.eval_interval, 0);
  WriteTrajectoryCsv(dir_ / "t.csv", t);
  const std::vector<TrajectoryRow> rows = ReadTrajectoryCsv(dir_ / "t.csv");
  ASSERT_EQ(rows.size(), t.checkpoints.size() * 3);
  for (std::size_t k = 0; k < t.checkpoints.size(); ++k) {
    for (int i = 0; i < 3; ++i) {
      const TrajectoryRow& r = rows[3 * k + i];
      EXPECT_EQ(r.step, t.checkpoints[k].step);
      EXPECT_EQ(r.task_id, i);
      EXPECT_EQ(r.loss, t.checkpoints[k].losses[i]);
      EXPECT_EQ(r.metric, (*t.checkpoints[k].metrics)[i]);
      EXPECT_EQ(r.weight, t.checkpoints[k].weights[i]);
    }
  }
}

TEST_F(ExperimentTest, GeometricTrajectoryHasEmptyMetric) {
  Trajectory t;
  t.checkpoints.push_back({10, Eigen::VectorXd(Eigen::Vector2d(0.1, 0.2)),
                           Eigen::Vector2d(1.0 / 3.0, 2.5), std::nullopt,
                           SimplexWeights::Uniform(2)});
  WriteTrajectoryCsv(dir_ / "t.csv", t);
  EXPECT_EQ(Slurp(dir_ / "t.csv"),
            "step,task_id,loss,metric,weight\n10,0,0.33333333333333331,,0.5\n10,1,2.5,,0.5\n");
  const std::vector<TrajectoryRow> rows = ReadTrajectoryCsv(dir_ / "t.csv");
  EXPECT_FALSE(rows[0].metric.has_value());
  EXPECT_EQ(rows[0].loss, 1.0 / 3.0);
  // Without metrics the frontier works on negated losses.
  const std::vector<MetricPoint> pts = CheckpointPoints(rows, "g");
  ASSERT_EQ(pts.size(), 1u);
  EXPECT_EQ(pts[0].worst, -2.5);
}

TEST_F(ExperimentTest, MalformedCsvReportsLine) {
  fs::create_directories(dir_);
  {
    std::ofstream out(dir_ / "bad.csv");
    out << "step,task_id,loss,metric,weight\n0,0,1,,0.5\n0,1,x,,0.5\n";
  }
  try {
    ReadTrajectoryCsv(dir_ / "bad.csv");
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos);
  }
}

TEST_F(ExperimentTest, FrontierCsvRoundTrip) {
  const std::vector<MetricPoint> pts{{0.123456789012345678, 0.1, {"a_seed0", 20}},
                                     {0.05, 0.2, {"b_seed1", 40}}};
  WriteFrontierCsv(dir_ / "f.csv", pts);
  EXPECT_EQ(ReadFrontierCsv(dir_ / "f.csv"), pts);
}

TEST_F(ExperimentTest, SweepExpansion) {
  ExperimentConfig c = SmallClassification();
  const std::vector<SweepPoint> points = ExpandSweep(c);
  // (1 uniform + 2 dro + 4 ldro) x 2 seeds.
  EXPECT_EQ(points.size(), 14u);
  std::set<std::string> ids;
  for (const SweepPoint& p : points) ids.insert(p.run_id);
  EXPECT_EQ(ids.size(), points.size());
  EXPECT_TRUE(ids.contains("ldro_eta0.01_lambda1_seed1"));
  EXPECT_TRUE(ids.contains("uniform_seed0"));

  c.sweep.methods = {StrategyKind::kLdro};
  c.sweep.eta = {0.01, 0.001, 0.0001};
  c.sweep.lambda = {0.001, 0.01, 0.1};
  c.seeds = {0};
  EXPECT_EQ(ExpandSweep(c).size(), 9u);
}

TEST_F(ExperimentTest, SyntheticRunWritesTrajectoryAndSummary) {
  ExperimentConfig c = DefaultSyntheticConfig();
  c.optimizer.steps = 200;
  SyntheticOptions options;
  options.out = dir_;
  EXPECT_EQ(RunSynthetic(c, options), kExitOk);
  const std::vector<TrajectoryRow> rows = ReadTrajectoryCsv(dir_ / "trajectory.csv");
  EXPECT_EQ(rows.size(), 10u * 200 / 10);
  const std::string summary = Slurp(dir_ / "summary.json");
  EXPECT_NE(summary.find("\"final\""), std::string::npos);
  EXPECT_NE(summary.find("\"best\""), std::string::npos);
}

TEST_F(ExperimentTest, SyntheticCompareWritesAllMethods) {
  ExperimentConfig c = DefaultSyntheticConfig();
  c.optimizer.steps = 100;
  SyntheticOptions options;
  options.out = dir_;
  options.compare = true;
  options.noise = 0.05;
  EXPECT_EQ(RunSynthetic(c, options), kExitOk);
  for (const char* m : {"uniform", "dro", "ldro"}) {
    EXPECT_TRUE(fs::exists(dir_ / m / "trajectory.csv")) << m;
  }
  std::ifstream in(dir_ / "compare.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "method,step,x,y,outlier_loss,mean_cluster_loss");
  int lines = 0;
  for (std::string line; std::getline(in, line);) ++lines;
  EXPECT_EQ(lines, 3 * 10);
}

TEST_F(ExperimentTest, FamilyMismatchIsAConfigError) {
  SyntheticOptions s;
  s.out = dir_;
  EXPECT_EQ(RunSynthetic(DefaultClassificationConfig(), s), kExitConfigError);
  ClassificationRunOptions c;
  c.out = dir_;
  EXPECT_EQ(RunClassification(DefaultSyntheticConfig(), c), kExitConfigError);
  EXPECT_FALSE(fs::exists(dir_));
}

TEST_F(ExperimentTest, ClassificationSweepWritesFrontiers) {
  ClassificationRunOptions options;
  options.out = dir_;
  options.jobs = 3;
  ASSERT_EQ(RunClassification(SmallClassification(), options), kExitOk);
  for (const char* m : {"uniform", "dro", "ldro"}) {
    EXPECT_TRUE(fs::exists(dir_ / (std::string("frontier_") + m + ".csv")));
    EXPECT_TRUE(fs::exists(dir_ / (std::string("frontier_") + m + "_seed1.csv")));
  }
  EXPECT_EQ(std::distance(fs::directory_iterator(dir_ / "runs"), fs::directory_iterator()), 14);
}

TEST_F(ExperimentTest, SinglePointGridFrontierEqualsRunFrontier) {
  ExperimentConfig c = SmallClassification();
  c.sweep.methods = {StrategyKind::kDro};
  c.sweep.eta = {0.1};
  c.seeds = {0};
  ClassificationRunOptions options;
  options.out = dir_;
  ASSERT_EQ(RunClassification(c, options), kExitOk);
  const fs::path run = dir_ / "runs" / "dro_eta0.1_seed0" / "trajectory.csv";
  const std::vector<MetricPoint> expected =
      ParetoFrontier(CheckpointPoints(ReadTrajectoryCsv(run), "dro_eta0.1_seed0"));
  EXPECT_EQ(ReadFrontierCsv(dir_ / "frontier_dro.csv"), expected);
}

TEST_F(ExperimentTest, InterruptedSweepResumes) {
  const ExperimentConfig c = SmallClassification();
  ClassificationRunOptions options;
  options.out = dir_;
  options.jobs = 2;
  ASSERT_EQ(RunClassification(c, options), kExitOk);
  const std::string frontier = Slurp(dir_ / "frontier_ldro.csv");

  // Simulate a crash that lost one run and its manifest entry.
  const std::string lost = "ldro_eta0.1_lambda1_seed1";
  fs::remove_all(dir_ / "runs" / lost);
  std::string manifest = Slurp(dir_ / "manifest.json");
  const std::size_t at = manifest.find("\"" + lost + "\"");
  ASSERT_NE(at, std::string::npos);
  const std::size_t end = manifest.find('}', at);
  manifest.erase(at, end - at + 1);
  // Drop the separator left behind.
  if (manifest[at] == ',') {
    manifest.erase(at, 1);
  } else {
    const std::size_t comma = manifest.rfind(',', at);
    manifest.erase(comma, 1);
  }
  { std::ofstream(dir_ / "manifest.json") << manifest; }

  const fs::path kept = dir_ / "runs" / "dro_eta0.1_seed0" / "trajectory.csv";
  const auto kept_time = fs::last_write_time(kept);
  ASSERT_EQ(RunClassification(c, options), kExitOk);
  EXPECT_EQ(fs::last_write_time(kept), kept_time);
  EXPECT_TRUE(fs::exists(dir_ / "runs" / lost / "trajectory.csv"));
  EXPECT_EQ(Slurp(dir_ / "frontier_ldro.csv"), frontier);
  EXPECT_NE(Slurp(dir_ / "manifest.json").find(lost), std::string::npos);
}

TEST_F(ExperimentTest, ManifestFromAnotherConfigIsRefused) {
  ExperimentConfig c = SmallClassification();
  c.seeds = {0};
  c.sweep.methods = {StrategyKind::kUniform};
  ClassificationRunOptions options;
  options.out = dir_;
  ASSERT_EQ(RunClassification(c, options), kExitOk);
  c.optimizer.steps = 20;
  EXPECT_EQ(RunClassification(c, options), kExitConfigError);
}

TEST_F(ExperimentTest, DivergedRunReportsExitCode) {
  ExperimentConfig c = DefaultSyntheticConfig();
  c.strategy.kind = StrategyKind::kUniform;
  c.optimizer.learning_rate = 50.0;
  c.optimizer.steps = 100;
  SyntheticOptions options;
  options.out = dir_;
  EXPECT_EQ(RunSynthetic(c, options), kExitDivergence);
  EXPECT_NE(Slurp(dir_ / "summary.json").find("\"diverged\": true"), std::string::npos);
}

TEST_F(ExperimentTest, FrontierFromTrajectoriesUsesDirectoryNames) {
  ExperimentConfig c = SmallClassification();
  c.seeds = {0};
  c.sweep.methods = {StrategyKind::kUniform, StrategyKind::kDro};
  ClassificationRunOptions options;
  options.out = dir_;
  ASSERT_EQ(RunClassification(c, options), kExitOk);
  const std::vector<MetricPoint> f = FrontierFromTrajectories(
      {dir_ / "runs" / "uniform_seed0" / "trajectory.csv",
       dir_ / "runs" / "dro_eta0.1_seed0" / "trajectory.csv",
       dir_ / "runs" / "dro_eta0.01_seed0" / "trajectory.csv"});
  ASSERT_FALSE(f.empty());
  for (const MetricPoint& p : f) {
    EXPECT_TRUE(p.provenance.run_id == "uniform_seed0" || p.provenance.run_id.starts_with("dro_"));
  }
}

}  // namespace
}  // namespace rmt
