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

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

namespace rmt {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string Real(double x) { return fmt::format("{:.17g}", x); }

double ParseReal(const std::string& field, const fs::path& path, int line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(field, &used);
    if (used == field.size()) return v;
  } catch (const std::exception&) {
  }
  throw std::runtime_error(fmt::format("{}:{}: invalid number '{}'", path.string(), line, field));
}

std::int64_t ParseInt(const std::string& field, const fs::path& path, int line) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(field, &used);
    if (used == field.size()) return v;
  } catch (const std::exception&) {
  }
  throw std::runtime_error(fmt::format("{}:{}: invalid integer '{}'", path.string(), line, field));
}

std::vector<std::string> SplitCsvLine(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

json VectorJson(const Eigen::VectorXd& v) { return json(std::vector<double>(v.begin(), v.end())); }

// Worst-case value of a checkpoint, oriented so that larger is better.
double WorstScore(const Checkpoint& c) {
  if (c.metrics) return c.metrics->minCoeff();
  return -c.losses.maxCoeff();
}

json CheckpointJson(const Checkpoint& c) {
  json out = {{"step", c.step},
              {"losses", VectorJson(c.losses)},
              {"weights", VectorJson(c.weights.values())},
              {"average_loss", c.losses.mean()},
              {"worst_loss", c.losses.maxCoeff()}};
  out["params"] = c.params ? VectorJson(*c.params) : json(nullptr);
  if (c.metrics) {
    out["metrics"] = VectorJson(*c.metrics);
    out["average_metric"] = c.metrics->mean();
    out["worst_metric"] = c.metrics->minCoeff();
  } else {
    out["metrics"] = nullptr;
  }
  return out;
}

std::string FormatGridValue(double v) { return fmt::format("{}", v); }

bool AnyDiverged(const std::vector<RunOutcome>& outcomes) {
  return std::any_of(outcomes.begin(), outcomes.end(),
                     [](const RunOutcome& o) { return o.trajectory.diverged; });
}

ExperimentConfig ApplyOverrides(ExperimentConfig config, std::optional<std::uint64_t> seed,
                                std::optional<double> noise) {
  if (seed) config.seeds = {*seed};
  if (noise) config.noise = {*noise, *noise};
  return config;
}

void WriteCompareCsv(const fs::path& path, const GeometricTaskSet& geometry,
                     const std::vector<RunOutcome>& outcomes) {
  std::string out = "method,step,x,y,outlier_loss,mean_cluster_loss\n";
  const int outlier = geometry.outlier_index();
  for (const RunOutcome& run : outcomes) {
    for (const Checkpoint& c : run.trajectory.checkpoints) {
      if (!c.params) continue;
      const Eigen::Vector2d p = geometry.Position(PolarParams::FromVector(*c.params));
      double cluster = 0.0;
      for (int i = 0; i < c.losses.size(); ++i) {
        if (i != outlier) cluster += c.losses[i];
      }
      cluster /= static_cast<double>(c.losses.size() - 1);
      out += fmt::format("{},{},{},{},{},{}\n", run.run_id, c.step, Real(p.x()), Real(p.y()),
                         Real(c.losses[outlier]), Real(cluster));
    }
  }
  WriteFileAtomic(path, out);
}

}  // namespace

void WriteFileAtomic(const fs::path& path, const std::string& contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << contents;
    if (!out) throw std::runtime_error("failed writing " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::shared_ptr<const TaskSet> BuildTaskSet(const ExperimentConfig& config, std::uint64_t seed) {
  std::shared_ptr<const TaskSet> tasks;
  if (config.family == TaskFamily::kGeometric) {
    tasks = std::make_shared<GeometricTaskSet>(config.geometric);
  } else {
    ClassificationOptions options = config.classification;
    options.data_seed += seed;
    tasks = std::make_shared<ClassificationTaskSet>(options);
  }
  if (config.noise.sigma_loss > 0.0 || config.noise.sigma_grad > 0.0) {
    tasks = std::make_shared<NoisyTaskSet>(tasks, config.noise.sigma_loss, config.noise.sigma_grad,
                                           seed);
  }
  return tasks;
}

void WriteTrajectoryCsv(const fs::path& path, const Trajectory& trajectory) {
  std::string out = "step,task_id,loss,metric,weight\n";
  for (const Checkpoint& c : trajectory.checkpoints) {
    for (int i = 0; i < c.losses.size(); ++i) {
      out += fmt::format("{},{},{},{},{}\n", c.step, i, Real(c.losses[i]),
                         c.metrics ? Real((*c.metrics)[i]) : std::string(),
                         Real(c.weights[i]));
    }
  }
  WriteFileAtomic(path, out);
}

std::vector<TrajectoryRow> ReadTrajectoryCsv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "step,task_id,loss,metric,weight") {
    throw std::runtime_error(path.string() + ":1: expected header step,task_id,loss,metric,weight");
  }
  std::vector<TrajectoryRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> f = SplitCsvLine(line);
    if (f.size() != 5) {
      throw std::runtime_error(fmt::format("{}:{}: expected 5 fields", path.string(), line_no));
    }
    TrajectoryRow row;
    row.step = ParseInt(f[0], path, line_no);
    row.task_id = static_cast<int>(ParseInt(f[1], path, line_no));
    row.loss = ParseReal(f[2], path, line_no);
    if (!f[3].empty()) row.metric = ParseReal(f[3], path, line_no);
    row.weight = ParseReal(f[4], path, line_no);
    rows.push_back(row);
  }
  return rows;
}

std::vector<MetricPoint> CheckpointPoints(const std::vector<TrajectoryRow>& rows,
                                          const std::string& run_id) {
  std::vector<MetricPoint> points;
  std::size_t begin = 0;
  while (begin < rows.size()) {
    std::size_t end = begin;
    while (end < rows.size() && rows[end].step == rows[begin].step) ++end;
    const bool has_metric = std::all_of(rows.begin() + begin, rows.begin() + end,
                                        [](const TrajectoryRow& r) { return r.metric.has_value(); });
    std::vector<double> values;
    for (std::size_t i = begin; i < end; ++i) {
      values.push_back(has_metric ? *rows[i].metric : -rows[i].loss);
    }
    const bool finite = std::all_of(values.begin(), values.end(),
                                    [](double v) { return std::isfinite(v); });
    // A diverged checkpoint carries non-finite losses and has no place on a frontier.
    if (finite) points.push_back(Aggregate(values, true, {run_id, rows[begin].step}));
    begin = end;
  }
  return points;
}

void WriteFrontierCsv(const fs::path& path, const std::vector<MetricPoint>& points) {
  std::string out = "average,worst,run_id,step\n";
  for (const MetricPoint& p : points) {
    out += fmt::format("{},{},{},{}\n", Real(p.average), Real(p.worst), p.provenance.run_id,
                       p.provenance.step);
  }
  WriteFileAtomic(path, out);
}

std::vector<MetricPoint> ReadFrontierCsv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "average,worst,run_id,step") {
    throw std::runtime_error(path.string() + ":1: expected header average,worst,run_id,step");
  }
  std::vector<MetricPoint> points;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> f = SplitCsvLine(line);
    if (f.size() != 4) {
      throw std::runtime_error(fmt::format("{}:{}: expected 4 fields", path.string(), line_no));
    }
    points.push_back({ParseReal(f[0], path, line_no), ParseReal(f[1], path, line_no),
                      {f[2], ParseInt(f[3], path, line_no)}});
  }
  return points;
}

std::string SummaryJson(const std::string& run_id, const ExperimentConfig& config,
                        std::uint64_t seed, const Trajectory& trajectory) {
  json out = {{"run_id", run_id},
              {"strategy", std::string(ToString(config.strategy.kind))},
              {"eta", config.strategy.eta},
              {"lambda", config.strategy.lambda},
              {"alpha", config.strategy.alpha},
              {"seed", seed},
              {"steps", config.optimizer.steps},
              {"diverged", trajectory.diverged},
              {"diagnostic", trajectory.diagnostic},
              {"interaction_refreshes", trajectory.interaction_refreshes.size()}};
  const std::vector<Checkpoint>& cps = trajectory.checkpoints;
  if (cps.empty()) {
    out["final"] = nullptr;
    out["best"] = nullptr;
  } else {
    out["final"] = CheckpointJson(cps.back());
    std::size_t best = 0;
    for (std::size_t i = 1; i < cps.size(); ++i) {
      const double score = WorstScore(cps[i]);
      if (std::isfinite(score) && !(score <= WorstScore(cps[best]))) best = i;
    }
    out["best"] = CheckpointJson(cps[best]);
  }
  return out.dump(2) + "\n";
}

RunOutcome RunOnce(const ExperimentConfig& config, std::uint64_t seed, const fs::path& directory,
                   const std::string& run_id) {
  const std::shared_ptr<const TaskSet> tasks = BuildTaskSet(config, seed);
  Validate(config.strategy, tasks->num_tasks());
  spdlog::info("run {} ({} tasks, {} steps)", run_id, tasks->num_tasks(), config.optimizer.steps);
  RunOutcome outcome{run_id, directory,
                     Train(*tasks, config.strategy, config.optimizer, config.eval_interval, seed)};
  if (outcome.trajectory.diverged) {
    spdlog::warn("run {} diverged: {}", run_id, outcome.trajectory.diagnostic);
  }
  WriteTrajectoryCsv(directory / "trajectory.csv", outcome.trajectory);
  WriteFileAtomic(directory / "summary.json", SummaryJson(run_id, config, seed, outcome.trajectory));
  return outcome;
}

int RunSynthetic(const ExperimentConfig& base, const SyntheticOptions& options) {
  if (base.family != TaskFamily::kGeometric) {
    spdlog::error("run-synthetic needs task.family = \"geometric\"");
    return kExitConfigError;
  }
  ExperimentConfig config = ApplyOverrides(base, options.seed, options.noise);
  const fs::path out = options.out.value_or(fs::path(config.output_dir));
  std::vector<RunOutcome> outcomes;

  if (options.compare) {
    const std::uint64_t seed = config.seeds.front();
    for (StrategyKind kind : {StrategyKind::kUniform, StrategyKind::kDro, StrategyKind::kLdro}) {
      ExperimentConfig run = config;
      run.strategy.kind = kind;
      const std::string name(ToString(kind));
      outcomes.push_back(RunOnce(run, seed, out / name, name));
    }
    WriteCompareCsv(out / "compare.csv", GeometricTaskSet(config.geometric), outcomes);
  } else {
    for (std::uint64_t seed : config.seeds) {
      const std::string run_id = fmt::format("{}_seed{}", ToString(config.strategy.kind), seed);
      const fs::path dir = config.seeds.size() == 1 ? out : out / fmt::format("seed_{}", seed);
      outcomes.push_back(RunOnce(config, seed, dir, run_id));
    }
  }
  return AnyDiverged(outcomes) ? kExitDivergence : kExitOk;
}

std::vector<SweepPoint> ExpandSweep(const ExperimentConfig& config) {
  const SweepConfig& sweep = config.sweep;
  const std::vector<StrategyKind> methods =
      sweep.methods.empty() ? std::vector<StrategyKind>{config.strategy.kind} : sweep.methods;
  const std::vector<double> etas = sweep.eta.empty() ? std::vector<double>{config.strategy.eta}
                                                     : sweep.eta;
  const std::vector<double> lambdas =
      sweep.lambda.empty() ? std::vector<double>{config.strategy.lambda} : sweep.lambda;
  const std::vector<double> alphas =
      sweep.alpha.empty() ? std::vector<double>{config.strategy.alpha} : sweep.alpha;

  std::vector<std::pair<std::string, StrategyConfig>> grid;
  for (StrategyKind kind : methods) {
    StrategyConfig s = config.strategy;
    s.kind = kind;
    const std::string name(ToString(kind));
    switch (kind) {
      case StrategyKind::kUniform:
        grid.emplace_back(name, s);
        break;
      case StrategyKind::kTemperature:
        for (double a : alphas) {
          s.alpha = a;
          grid.emplace_back(fmt::format("{}_alpha{}", name, FormatGridValue(a)), s);
        }
        break;
      case StrategyKind::kDro:
      case StrategyKind::kBaselinedDro:
        for (double e : etas) {
          s.eta = e;
          grid.emplace_back(fmt::format("{}_eta{}", name, FormatGridValue(e)), s);
        }
        break;
      case StrategyKind::kLdro:
        for (double e : etas) {
          for (double l : lambdas) {
            s.eta = e;
            s.lambda = l;
            grid.emplace_back(
                fmt::format("{}_eta{}_lambda{}", name, FormatGridValue(e), FormatGridValue(l)), s);
          }
        }
        break;
    }
  }

  std::vector<SweepPoint> points;
  for (const auto& [name, strategy] : grid) {
    for (std::uint64_t seed : config.seeds) {
      points.push_back({fmt::format("{}_seed{}", name, seed), strategy, seed});
    }
  }
  return points;
}

int RunClassification(const ExperimentConfig& base, const ClassificationRunOptions& options) {
  if (base.family != TaskFamily::kClassification) {
    spdlog::error("run-classification needs task.family = \"classification\"");
    return kExitConfigError;
  }
  const ExperimentConfig config = ApplyOverrides(base, options.seed, options.noise);
  const fs::path out = options.out.value_or(fs::path(config.output_dir));
  const std::vector<SweepPoint> points = ExpandSweep(config);
  for (const SweepPoint& p : points) {
    try {
      Validate(p.strategy, config.classification.num_tasks);
    } catch (const std::invalid_argument& e) {
      spdlog::error("run {}: {}", p.run_id, e.what());
      return kExitConfigError;
    }
  }

  // The manifest pins the config so a resumed sweep cannot mix settings.
  ExperimentConfig pinned = config;
  pinned.output_dir.clear();
  const json pinned_json = json::parse(SerializeConfig(pinned));
  const fs::path manifest_path = out / "manifest.json";
  json manifest = {{"config", pinned_json}, {"completed", json::object()}};
  if (fs::exists(manifest_path)) {
    std::ifstream in(manifest_path);
    json existing;
    try {
      existing = json::parse(in);
    } catch (const json::parse_error& e) {
      spdlog::error("{}: {}", manifest_path.string(), e.what());
      return kExitConfigError;
    }
    if (!existing.contains("config") || existing["config"] != pinned_json) {
      spdlog::error("{} was written for a different config", manifest_path.string());
      return kExitConfigError;
    }
    manifest["completed"] = existing.value("completed", json::object());
  }

  std::vector<const SweepPoint*> pending;
  for (const SweepPoint& p : points) {
    const bool done = manifest["completed"].contains(p.run_id) &&
                      fs::exists(out / "runs" / p.run_id / "trajectory.csv");
    if (done) {
      spdlog::info("run {} already complete, skipping", p.run_id);
    } else {
      pending.push_back(&p);
    }
  }
  fs::create_directories(out);
  WriteFileAtomic(manifest_path, manifest.dump(2) + "\n");

  std::mutex mutex;
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= pending.size()) return;
      {
        std::lock_guard lock(mutex);
        if (failure) return;
      }
      const SweepPoint& p = *pending[i];
      try {
        ExperimentConfig run = config;
        run.strategy = p.strategy;
        const RunOutcome outcome = RunOnce(run, p.seed, out / "runs" / p.run_id, p.run_id);
        std::lock_guard lock(mutex);
        manifest["completed"][p.run_id] = {{"diverged", outcome.trajectory.diverged}};
        WriteFileAtomic(manifest_path, manifest.dump(2) + "\n");
      } catch (...) {
        std::lock_guard lock(mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  {
    const int jobs = std::max(1, std::min<int>(options.jobs, static_cast<int>(pending.size())));
    std::vector<std::jthread> threads;
    for (int j = 0; j < jobs; ++j) threads.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  std::map<std::string, std::vector<fs::path>> by_method;
  std::map<std::pair<std::string, std::uint64_t>, std::vector<fs::path>> by_method_seed;
  bool diverged = false;
  for (const SweepPoint& p : points) {
    const std::string method(ToString(p.strategy.kind));
    const fs::path file = out / "runs" / p.run_id / "trajectory.csv";
    by_method[method].push_back(file);
    by_method_seed[{method, p.seed}].push_back(file);
    diverged = diverged || manifest["completed"][p.run_id].value("diverged", false);
  }
  for (const auto& [method, files] : by_method) {
    WriteFrontierCsv(out / fmt::format("frontier_{}.csv", method), FrontierFromTrajectories(files));
  }
  for (const auto& [key, files] : by_method_seed) {
    WriteFrontierCsv(out / fmt::format("frontier_{}_seed{}.csv", key.first, key.second),
                     FrontierFromTrajectories(files));
  }
  return diverged ? kExitDivergence : kExitOk;
}

std::vector<MetricPoint> FrontierFromTrajectories(const std::vector<fs::path>& trajectory_files) {
  std::vector<MetricPoint> all;
  for (const fs::path& file : trajectory_files) {
    const std::string run_id = file.parent_path().filename().string();
    const std::vector<MetricPoint> points = CheckpointPoints(ReadTrajectoryCsv(file), run_id);
    all.insert(all.end(), points.begin(), points.end());
  }
  return ParetoFrontier(all);
}

}  // namespace rmt
