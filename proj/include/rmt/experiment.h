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

#ifndef RMT_EXPERIMENT_H_
#define RMT_EXPERIMENT_H_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rmt/config.h"
#include "rmt/eval.h"
#include "rmt/tasks.h"
#include "rmt/trainer.h"

namespace rmt {

enum ExitCode : int { kExitOk = 0, kExitConfigError = 1, kExitDivergence = 2 };

// Task set for one seed. For the classification family the seed offsets the
// data seed, so each seed sees a fresh draw of the data. A noise wrapper is
// added when either sigma is positive.
std::shared_ptr<const TaskSet> BuildTaskSet(const ExperimentConfig& config, std::uint64_t seed);

struct TrajectoryRow {
  std::int64_t step = 0;
  int task_id = 0;
  double loss = 0.0;
  std::optional<double> metric;
  double weight = 0.0;

  friend bool operator==(const TrajectoryRow&, const TrajectoryRow&) = default;
};

// Columns step,task_id,loss,metric,weight; one row per (checkpoint, task).
// Reals are written with 17 significant digits so they read back exactly.
void WriteTrajectoryCsv(const std::filesystem::path& path, const Trajectory& trajectory);
std::vector<TrajectoryRow> ReadTrajectoryCsv(const std::filesystem::path& path);

// Per-checkpoint aggregate points of a trajectory file. Uses the metric
// column when present, otherwise negated losses so that larger is better.
std::vector<MetricPoint> CheckpointPoints(const std::vector<TrajectoryRow>& rows,
                                          const std::string& run_id);

void WriteFrontierCsv(const std::filesystem::path& path, const std::vector<MetricPoint>& points);
std::vector<MetricPoint> ReadFrontierCsv(const std::filesystem::path& path);

// Final checkpoint and the checkpoint with the best worst-case value.
std::string SummaryJson(const std::string& run_id, const ExperimentConfig& config,
                        std::uint64_t seed, const Trajectory& trajectory);

struct RunOutcome {
  std::string run_id;
  std::filesystem::path directory;
  Trajectory trajectory;
};

// Trains once and writes trajectory.csv and summary.json into `directory`.
RunOutcome RunOnce(const ExperimentConfig& config, std::uint64_t seed,
                   const std::filesystem::path& directory, const std::string& run_id);

struct SyntheticOptions {
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
  std::optional<double> noise;  // sets both sigmas
  bool compare = false;
};

// With `compare`, trains uniform, dro and ldro under one seed into
// <out>/<method>/ and writes <out>/compare.csv with columns
// method,step,x,y,outlier_loss,mean_cluster_loss.
int RunSynthetic(const ExperimentConfig& config, const SyntheticOptions& options);

struct ClassificationRunOptions {
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
  std::optional<double> noise;
  int jobs = 1;
};

// One grid point of a sweep.
struct SweepPoint {
  std::string run_id;
  StrategyConfig strategy;
  std::uint64_t seed = 0;
};

// Every (method, grid point, seed) combination, in a fixed order.
std::vector<SweepPoint> ExpandSweep(const ExperimentConfig& config);

// Runs the sweep into <out>/runs/<run_id>/, skipping runs already recorded in
// <out>/manifest.json, then writes <out>/frontier_<method>.csv over all seeds
// and <out>/frontier_<method>_seed<s>.csv per seed.
int RunClassification(const ExperimentConfig& config, const ClassificationRunOptions& options);

// Frontier over the checkpoints of the given trajectory files. The run id of
// each point is the name of the file's parent directory.
std::vector<MetricPoint> FrontierFromTrajectories(
    const std::vector<std::filesystem::path>& trajectory_files);

// Writes `contents` to a temporary sibling and renames it over `path`.
void WriteFileAtomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace rmt

#endif  // RMT_EXPERIMENT_H_
