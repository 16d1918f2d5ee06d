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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "rmt/config.h"
#include "rmt/experiment.h"
#include "rmt/matrix_game.h"
#include "rmt/simplex.h"

namespace {

namespace fs = std::filesystem;

void SetUpLogging() {
  auto logger = spdlog::stderr_color_mt("rmt");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("RMT_LOG")) {
    const spdlog::level::level_enum level = spdlog::level::from_str(env);
    if (level == spdlog::level::off && std::string(env) != "off") {
      spdlog::warn("RMT_LOG='{}' is not a log level; keeping info", env);
    } else {
      spdlog::set_level(level);
    }
  }
}

rmt::PayoffMatrix ReadMatrixCsv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(field, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || field.find_first_not_of(" \t\r", used) != std::string::npos) {
        throw std::runtime_error(fmt::format("{}:{}: invalid number '{}'", path.string(), line_no, field));
      }
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  const int n = static_cast<int>(rows.size());
  if (n == 0) throw std::runtime_error(path.string() + ": empty matrix");
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(rows[i].size()) != n) {
      throw std::runtime_error(fmt::format("{}: matrix is not square ({} rows, row {} has {} entries)",
                                           path.string(), n, i + 1, rows[i].size()));
    }
    for (int j = 0; j < n; ++j) m(i, j) = rows[i][j];
  }
  return rmt::PayoffMatrix(m);
}

std::string Join(const rmt::SimplexWeights& w) {
  std::string out;
  for (int i = 0; i < w.size(); ++i) out += fmt::format("{}{:.6g}", i ? ", " : "", w[i]);
  return out;
}

// Returns the parsed config, or nullopt after logging the diagnostic.
std::optional<rmt::ExperimentConfig> Configure(const std::string& path,
                                               rmt::ExperimentConfig fallback) {
  if (path.empty()) return fallback;
  try {
    return rmt::LoadConfig(path);
  } catch (const rmt::ConfigError& e) {
    spdlog::error("{}: {}", path, e.what());
    return std::nullopt;
  }
}

}  // namespace

int main(int argc, char** argv) {
  SetUpLogging();
  CLI::App app{"Task-weighting strategies for multitask optimization"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  int jobs = 1;
  double noise = 0.0;
  bool compare = false;

  auto* synthetic = app.add_subcommand("run-synthetic", "Train on the geometric task family");
  synthetic->add_option("--config", config_path, "JSON config (default: built-in)");
  synthetic->add_option("--seed", seed, "Run a single seed");
  synthetic->add_option("--noise", noise, "Gaussian noise sigma on losses and gradients")
      ->check(CLI::NonNegativeNumber);
  synthetic->add_flag("--compare", compare, "Train uniform, dro and ldro and write compare.csv");
  synthetic->add_option("--out", out_dir, "Output directory");

  auto* classification =
      app.add_subcommand("run-classification", "Sweep strategies on the classification family");
  classification->add_option("--config", config_path, "JSON config (default: built-in)");
  classification->add_option("--seed", seed, "Run a single seed");
  classification->add_option("--jobs", jobs, "Parallel runs")->check(CLI::PositiveNumber);
  classification->add_option("--noise", noise, "Gaussian noise sigma on losses and gradients")
      ->check(CLI::NonNegativeNumber);
  classification->add_option("--out", out_dir, "Output directory");

  std::string matrix_path;
  double tol = 1e-3;
  auto* solve = app.add_subcommand("solve-game", "Max-entropy equilibrium of a CSV payoff matrix");
  solve->add_option("matrix", matrix_path, "CSV file, rows are adversary tasks")->required();
  solve->add_option("--tol", tol, "Exploitability tolerance")->check(CLI::PositiveNumber);
  solve->add_option("--seed", seed, "Restart seed");

  std::vector<std::string> trajectories;
  std::string frontier_out;
  auto* frontier = app.add_subcommand("frontier", "Pareto frontier of trajectory CSV checkpoints");
  frontier->add_option("trajectories", trajectories, "trajectory.csv files")->required();
  frontier->add_option("--out", frontier_out, "Frontier CSV (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : rmt::kExitConfigError;
  }

  try {
    if (*synthetic) {
      auto config = Configure(config_path, rmt::DefaultSyntheticConfig());
      if (!config) return rmt::kExitConfigError;
      rmt::SyntheticOptions options;
      if (!out_dir.empty()) options.out = out_dir;
      if (synthetic->count("--seed")) options.seed = seed;
      if (synthetic->count("--noise")) options.noise = noise;
      options.compare = compare;
      return rmt::RunSynthetic(*config, options);
    }
    if (*classification) {
      auto config = Configure(config_path, rmt::DefaultClassificationConfig());
      if (!config) return rmt::kExitConfigError;
      rmt::ClassificationRunOptions options;
      if (!out_dir.empty()) options.out = out_dir;
      if (classification->count("--seed")) options.seed = seed;
      if (classification->count("--noise")) options.noise = noise;
      options.jobs = jobs;
      return rmt::RunClassification(*config, options);
    }
    if (*solve) {
      rmt::PayoffMatrix payoff = [&] {
        try {
          return ReadMatrixCsv(matrix_path);
        } catch (const std::exception& e) {
          spdlog::error("{}", e.what());
          std::exit(rmt::kExitConfigError);
        }
      }();
      rmt::NashSolverOptions options;
      options.tol = tol;
      options.seed = seed;
      const rmt::GameSolution s = rmt::SolveNashMaxEnt(payoff, options);
      fmt::print("value: {:.9g}\n", s.value);
      fmt::print("v: {}\n", Join(s.row_strategy));
      fmt::print("w: {}\n", Join(s.col_strategy));
      fmt::print("exploitability: {:.3g}\n", s.exploitability);
      fmt::print("entropy_w: {:.6g}\n", rmt::Entropy(s.col_strategy));
      return s.exploitability <= tol ? rmt::kExitOk : rmt::kExitDivergence;
    }
    if (*frontier) {
      std::vector<fs::path> files(trajectories.begin(), trajectories.end());
      const std::vector<rmt::MetricPoint> points = rmt::FrontierFromTrajectories(files);
      if (frontier_out.empty()) {
        fmt::print("average,worst,run_id,step\n");
        for (const rmt::MetricPoint& p : points) {
          fmt::print("{:.17g},{:.17g},{},{}\n", p.average, p.worst, p.provenance.run_id,
                     p.provenance.step);
        }
      } else {
        rmt::WriteFrontierCsv(frontier_out, points);
      }
      return rmt::kExitOk;
    }
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return rmt::kExitConfigError;
  }
  return rmt::kExitOk;
}
