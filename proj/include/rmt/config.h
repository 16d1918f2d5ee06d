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

#ifndef RMT_CONFIG_H_
#define RMT_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rmt/tasks.h"
#include "rmt/trainer.h"
#include "rmt/weighting.h"

namespace rmt {

enum class TaskFamily { kGeometric, kClassification };

struct NoiseConfig {
  double sigma_loss = 0.0;
  double sigma_grad = 0.0;

  friend bool operator==(const NoiseConfig&, const NoiseConfig&) = default;
};

// Hyper-parameter grids. An empty grid means "use the strategy's value";
// empty `methods` means only the strategy's own kind.
struct SweepConfig {
  std::vector<StrategyKind> methods;
  std::vector<double> eta;
  std::vector<double> lambda;
  std::vector<double> alpha;

  friend bool operator==(const SweepConfig&, const SweepConfig&) = default;
};

struct ExperimentConfig {
  TaskFamily family = TaskFamily::kGeometric;
  GeometricOptions geometric;
  ClassificationOptions classification;
  StrategyConfig strategy;
  OptimizerConfig optimizer;
  std::int64_t eval_interval = 10;
  std::vector<std::uint64_t> seeds{0};
  NoiseConfig noise;
  std::string output_dir = "out";
  SweepConfig sweep;
};

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

// Schema or syntax error. `line` is 1-based, 0 when unknown.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& message, std::string path, int line);
  const std::string& path() const { return path_; }
  int line() const { return line_; }

 private:
  std::string path_;
  int line_;
};

// Parses and validates a JSON config. Unknown fields are rejected. Relative
// `baselines_file` paths resolve against `base_dir`.
ExperimentConfig ParseConfig(std::string_view text, const std::filesystem::path& base_dir = {});
ExperimentConfig LoadConfig(const std::filesystem::path& path);

// Canonical JSON: every field spelled out, baselines inlined.
std::string SerializeConfig(const ExperimentConfig& config);

// The geometric benchmark under L-DRO with settings that reach the forbidden
// region boundary within the step budget.
ExperimentConfig DefaultSyntheticConfig();
ExperimentConfig DefaultClassificationConfig();

std::vector<double> ReadNumberList(const std::filesystem::path& path);

}  // namespace rmt

#endif  // RMT_CONFIG_H_
