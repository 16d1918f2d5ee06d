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

#include "rmt/config.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

namespace rmt {
namespace {

using nlohmann::json;

int LineOfOffset(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + offset, '\n'));
}

// Best-effort source line of a JSON pointer such as /optimizer/steps: each key
// is searched for after the previous one.
int LocatePath(std::string_view text, const std::string& path) {
  std::size_t pos = 0;
  std::size_t found = std::string_view::npos;
  std::stringstream ss(path);
  std::string part;
  while (std::getline(ss, part, '/')) {
    if (part.empty() || std::all_of(part.begin(), part.end(), ::isdigit)) continue;
    const std::string quoted = "\"" + part + "\"";
    const std::size_t hit = text.find(quoted, pos);
    if (hit == std::string_view::npos) break;
    found = hit;
    pos = hit + quoted.size();
  }
  return found == std::string_view::npos ? 0 : LineOfOffset(text, found);
}

// Reads typed fields out of one JSON object and rejects unknown keys.
class ObjectReader {
 public:
  ObjectReader(const json& object, std::string path, std::string_view text)
      : object_(object), path_(std::move(path)), text_(text) {
    if (!object_.is_object()) Fail(path_, "expected an object");
  }

  [[noreturn]] void Fail(const std::string& path, const std::string& message) const {
    throw ConfigError(path + ": " + message, path, LocatePath(text_, path));
  }

  std::string Child(const std::string& key) const { return path_ + "/" + key; }

  bool Has(const std::string& key) {
    seen_.insert(key);
    return object_.contains(key);
  }

  const json& Raw(const std::string& key) {
    seen_.insert(key);
    return object_.at(key);
  }

  double Number(const std::string& key, double fallback) {
    if (!Has(key)) return fallback;
    const json& v = object_.at(key);
    if (!v.is_number()) Fail(Child(key), "expected a number");
    return v.get<double>();
  }

  std::int64_t Integer(const std::string& key, std::int64_t fallback) {
    if (!Has(key)) return fallback;
    const json& v = object_.at(key);
    if (!v.is_number_integer()) Fail(Child(key), "expected an integer");
    return v.get<std::int64_t>();
  }

  std::uint64_t Unsigned(const std::string& key, std::uint64_t fallback) {
    if (!Has(key)) return fallback;
    const json& v = object_.at(key);
    if (!v.is_number_unsigned()) Fail(Child(key), "expected a non-negative integer");
    return v.get<std::uint64_t>();
  }

  bool Boolean(const std::string& key, bool fallback) {
    if (!Has(key)) return fallback;
    const json& v = object_.at(key);
    if (!v.is_boolean()) Fail(Child(key), "expected true or false");
    return v.get<bool>();
  }

  std::string String(const std::string& key, const std::string& fallback) {
    if (!Has(key)) return fallback;
    const json& v = object_.at(key);
    if (!v.is_string()) Fail(Child(key), "expected a string");
    return v.get<std::string>();
  }

  std::vector<double> Numbers(const std::string& key, std::vector<double> fallback) {
    if (!Has(key)) return fallback;
    const json& v = object_.at(key);
    if (!v.is_array()) Fail(Child(key), "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) Fail(Child(key) + "/" + std::to_string(i), "expected a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }

  Eigen::Vector2d Point(const std::string& key, const Eigen::Vector2d& fallback) {
    if (!Has(key)) return fallback;
    const std::vector<double> xy = Numbers(key, {});
    if (xy.size() != 2) Fail(Child(key), "expected [x, y]");
    return Eigen::Vector2d(xy[0], xy[1]);
  }

  // Call after reading every field.
  void RejectUnknown() const {
    for (const auto& [key, value] : object_.items()) {
      if (!seen_.contains(key)) Fail(Child(key), "unknown field");
    }
  }

 private:
  const json& object_;
  std::string path_;
  std::string_view text_;
  std::set<std::string> seen_;
};

int ToInt(ObjectReader& r, const std::string& key, int fallback) {
  const std::int64_t v = r.Integer(key, fallback);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    r.Fail(r.Child(key), "integer out of range");
  }
  return static_cast<int>(v);
}

void ParseGeometric(ObjectReader& r, GeometricOptions& g) {
  g.num_cluster = ToInt(r, "num_cluster", g.num_cluster);
  g.cluster_radius = r.Number("cluster_radius", g.cluster_radius);
  g.cluster_center = r.Point("cluster_center", g.cluster_center);
  g.outlier = r.Point("outlier", g.outlier);
  g.radius = r.Number("radius", g.radius);
  g.seed = r.Unsigned("seed", g.seed);
  g.init.r = r.Number("init_r", g.init.r);
  g.init.phi = r.Number("init_phi", g.init.phi);
  if (g.num_cluster < 1) r.Fail(r.Child("num_cluster"), "must be >= 1");
  if (!(g.cluster_radius >= 0.0)) r.Fail(r.Child("cluster_radius"), "must be >= 0");
  if (!(g.radius > 0.0)) r.Fail(r.Child("radius"), "must be > 0");
  if ((g.cluster_center - g.outlier).norm() <= g.cluster_radius) {
    r.Fail(r.Child("outlier"), "outlier must lie outside the cluster disc");
  }
}

void ParseClassification(ObjectReader& r, ClassificationOptions& c) {
  c.num_tasks = ToInt(r, "num_tasks", c.num_tasks);
  c.num_classes = ToInt(r, "num_classes", c.num_classes);
  c.input_dim = ToInt(r, "input_dim", c.input_dim);
  c.examples_per_class = ToInt(r, "examples_per_class", c.examples_per_class);
  c.heldout_per_class = ToInt(r, "heldout_per_class", c.heldout_per_class);
  c.size_decay = r.Number("size_decay", c.size_decay);
  c.min_examples_per_class = ToInt(r, "min_examples_per_class", c.min_examples_per_class);
  c.conflict = r.Number("conflict", c.conflict);
  c.max_separation = r.Number("max_separation", c.max_separation);
  c.min_separation = r.Number("min_separation", c.min_separation);
  c.data_seed = r.Unsigned("data_seed", c.data_seed);
  if (c.num_tasks < 1) r.Fail(r.Child("num_tasks"), "must be >= 1");
  if (c.num_classes < 2) r.Fail(r.Child("num_classes"), "must be >= 2");
  if (c.input_dim < 1) r.Fail(r.Child("input_dim"), "must be >= 1");
  if (c.examples_per_class < 1) r.Fail(r.Child("examples_per_class"), "must be >= 1");
  if (c.heldout_per_class < 1) r.Fail(r.Child("heldout_per_class"), "must be >= 1");
  if (c.min_examples_per_class < 1) r.Fail(r.Child("min_examples_per_class"), "must be >= 1");
  if (!(c.size_decay > 0.0 && c.size_decay <= 1.0)) r.Fail(r.Child("size_decay"), "must lie in (0, 1]");
  if (!(c.conflict >= 0.0 && c.conflict <= 1.0)) r.Fail(r.Child("conflict"), "must lie in [0, 1]");
}

void ParseStrategy(ObjectReader& r, StrategyConfig& s, const std::filesystem::path& base_dir) {
  const std::string kind = r.String("kind", std::string(ToString(s.kind)));
  try {
    s.kind = ParseStrategyKind(kind);
  } catch (const std::invalid_argument& e) {
    r.Fail(r.Child("kind"), e.what());
  }
  s.alpha = r.Number("alpha", s.alpha);
  s.eta = r.Number("eta", s.eta);
  s.lambda = r.Number("lambda", s.lambda);
  s.refresh_interval = ToInt(r, "refresh_interval", s.refresh_interval);
  const std::string solver = r.String("solver", std::string(ToString(s.solver)));
  try {
    s.solver = ParseLdroSolver(solver);
  } catch (const std::invalid_argument& e) {
    r.Fail(r.Child("solver"), e.what());
  }
  s.nash_tol = r.Number("nash_tol", s.nash_tol);
  const bool inline_baselines = r.Has("baselines");
  const bool file_baselines = r.Has("baselines_file");
  if (inline_baselines && file_baselines) {
    r.Fail(r.Child("baselines_file"), "give either baselines or baselines_file");
  }
  if (inline_baselines) s.baselines = r.Numbers("baselines", {});
  if (file_baselines) {
    std::filesystem::path file = r.String("baselines_file", "");
    if (file.is_relative()) file = base_dir / file;
    try {
      s.baselines = ReadNumberList(file);
    } catch (const std::exception& e) {
      r.Fail(r.Child("baselines_file"), e.what());
    }
  }
  try {
    Validate(s);
  } catch (const std::invalid_argument& e) {
    r.Fail(r.Child("kind"), e.what());
  }
}

void ParseOptimizer(ObjectReader& r, OptimizerConfig& o) {
  o.learning_rate = r.Number("learning_rate", o.learning_rate);
  o.momentum = r.Number("momentum", o.momentum);
  o.nesterov = r.Boolean("nesterov", o.nesterov);
  o.steps = r.Integer("steps", o.steps);
  o.batch_size = ToInt(r, "batch_size", o.batch_size);
  if (!(o.learning_rate > 0.0)) r.Fail(r.Child("learning_rate"), "must be > 0");
  if (!(o.momentum >= 0.0 && o.momentum < 1.0)) r.Fail(r.Child("momentum"), "must lie in [0, 1)");
  if (o.steps < 1) r.Fail(r.Child("steps"), "must be >= 1");
  if (o.batch_size < 0) r.Fail(r.Child("batch_size"), "must be >= 0");
}

json PointJson(const Eigen::Vector2d& p) { return json::array({p.x(), p.y()}); }

}  // namespace

ConfigError::ConfigError(const std::string& message, std::string path, int line)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
      path_(std::move(path)),
      line_(line) {}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
  return SerializeConfig(a) == SerializeConfig(b);
}

std::vector<double> ReadNumberList(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<double> out;
  std::string token;
  char c;
  auto flush = [&] {
    if (token.empty()) return;
    std::size_t used = 0;
    double v = NAN;
    try {
      v = std::stod(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != token.size() || !std::isfinite(v)) {
      throw std::runtime_error("invalid number '" + token + "' in " + path.string());
    }
    out.push_back(v);
    token.clear();
  };
  while (in.get(c)) {
    if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
      flush();
    } else {
      token.push_back(c);
    }
  }
  flush();
  return out;
}

ExperimentConfig ParseConfig(std::string_view text, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what(), "",
                      LineOfOffset(text, e.byte > 0 ? e.byte - 1 : 0));
  }

  ExperimentConfig config;
  ObjectReader top(root, "", text);

  if (!top.Has("task")) top.Fail("/task", "missing required field");
  {
    ObjectReader task(top.Raw("task"), "/task", text);
    const std::string family = task.String("family", "");
    if (family == "geometric") {
      config.family = TaskFamily::kGeometric;
      ParseGeometric(task, config.geometric);
    } else if (family == "classification") {
      config.family = TaskFamily::kClassification;
      ParseClassification(task, config.classification);
    } else {
      task.Fail("/task/family", "expected \"geometric\" or \"classification\"");
    }
    task.RejectUnknown();
  }

  if (!top.Has("strategy")) top.Fail("/strategy", "missing required field");
  {
    ObjectReader strategy(top.Raw("strategy"), "/strategy", text);
    ParseStrategy(strategy, config.strategy, base_dir);
    strategy.RejectUnknown();
    const int n = config.family == TaskFamily::kGeometric ? config.geometric.num_cluster + 1
                                                          : config.classification.num_tasks;
    if (config.strategy.baselines && static_cast<int>(config.strategy.baselines->size()) != n) {
      strategy.Fail("/strategy/baselines", "expected " + std::to_string(n) + " baselines");
    }
  }

  if (top.Has("optimizer")) {
    ObjectReader optimizer(top.Raw("optimizer"), "/optimizer", text);
    ParseOptimizer(optimizer, config.optimizer);
    optimizer.RejectUnknown();
  }

  config.eval_interval = top.Integer("eval_interval", config.eval_interval);
  if (config.eval_interval < 1) top.Fail("/eval_interval", "must be >= 1");

  if (top.Has("seeds")) {
    const json& seeds = top.Raw("seeds");
    if (!seeds.is_array() || seeds.empty()) top.Fail("/seeds", "expected a non-empty array");
    config.seeds.clear();
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      if (!seeds[i].is_number_unsigned()) {
        top.Fail("/seeds/" + std::to_string(i), "expected a non-negative integer");
      }
      config.seeds.push_back(seeds[i].get<std::uint64_t>());
    }
  }

  if (top.Has("noise")) {
    ObjectReader noise(top.Raw("noise"), "/noise", text);
    config.noise.sigma_loss = noise.Number("sigma_loss", 0.0);
    config.noise.sigma_grad = noise.Number("sigma_grad", 0.0);
    if (!(config.noise.sigma_loss >= 0.0)) noise.Fail("/noise/sigma_loss", "must be >= 0");
    if (!(config.noise.sigma_grad >= 0.0)) noise.Fail("/noise/sigma_grad", "must be >= 0");
    noise.RejectUnknown();
  }

  config.output_dir = top.String("output_dir", config.output_dir);

  if (top.Has("sweep")) {
    ObjectReader sweep(top.Raw("sweep"), "/sweep", text);
    if (sweep.Has("methods")) {
      const json& methods = sweep.Raw("methods");
      if (!methods.is_array()) sweep.Fail("/sweep/methods", "expected an array of strategy kinds");
      for (std::size_t i = 0; i < methods.size(); ++i) {
        const std::string where = "/sweep/methods/" + std::to_string(i);
        if (!methods[i].is_string()) sweep.Fail(where, "expected a string");
        try {
          config.sweep.methods.push_back(ParseStrategyKind(methods[i].get<std::string>()));
        } catch (const std::invalid_argument& e) {
          sweep.Fail(where, e.what());
        }
      }
    }
    config.sweep.eta = sweep.Numbers("eta", {});
    config.sweep.lambda = sweep.Numbers("lambda", {});
    config.sweep.alpha = sweep.Numbers("alpha", {});
    for (double v : config.sweep.eta) {
      if (!(v >= 0.0)) sweep.Fail("/sweep/eta", "values must be >= 0");
    }
    for (double v : config.sweep.lambda) {
      if (!(v >= 0.0)) sweep.Fail("/sweep/lambda", "values must be >= 0");
    }
    for (double v : config.sweep.alpha) {
      if (!(v >= 0.0)) sweep.Fail("/sweep/alpha", "values must be >= 0");
    }
    sweep.RejectUnknown();
  }

  top.RejectUnknown();
  return config;
}

ExperimentConfig LoadConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string(), "", 0);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseConfig(buffer.str(), path.parent_path());
}

std::string SerializeConfig(const ExperimentConfig& config) {
  json task;
  if (config.family == TaskFamily::kGeometric) {
    const GeometricOptions& g = config.geometric;
    task = {{"family", "geometric"},
            {"num_cluster", g.num_cluster},
            {"cluster_radius", g.cluster_radius},
            {"cluster_center", PointJson(g.cluster_center)},
            {"outlier", PointJson(g.outlier)},
            {"radius", g.radius},
            {"seed", g.seed},
            {"init_r", g.init.r},
            {"init_phi", g.init.phi}};
  } else {
    const ClassificationOptions& c = config.classification;
    task = {{"family", "classification"},
            {"num_tasks", c.num_tasks},
            {"num_classes", c.num_classes},
            {"input_dim", c.input_dim},
            {"examples_per_class", c.examples_per_class},
            {"heldout_per_class", c.heldout_per_class},
            {"size_decay", c.size_decay},
            {"min_examples_per_class", c.min_examples_per_class},
            {"conflict", c.conflict},
            {"max_separation", c.max_separation},
            {"min_separation", c.min_separation},
            {"data_seed", c.data_seed}};
  }
  const StrategyConfig& s = config.strategy;
  json strategy = {{"kind", std::string(ToString(s.kind))},
                   {"alpha", s.alpha},
                   {"eta", s.eta},
                   {"lambda", s.lambda},
                   {"refresh_interval", s.refresh_interval},
                   {"solver", std::string(ToString(s.solver))},
                   {"nash_tol", s.nash_tol}};
  if (s.baselines) strategy["baselines"] = *s.baselines;
  const OptimizerConfig& o = config.optimizer;
  json optimizer = {{"learning_rate", o.learning_rate},
                    {"momentum", o.momentum},
                    {"nesterov", o.nesterov},
                    {"steps", o.steps},
                    {"batch_size", o.batch_size}};
  json methods = json::array();
  for (StrategyKind kind : config.sweep.methods) methods.push_back(std::string(ToString(kind)));
  json root = {{"task", task},
               {"strategy", strategy},
               {"optimizer", optimizer},
               {"eval_interval", config.eval_interval},
               {"seeds", config.seeds},
               {"noise", {{"sigma_loss", config.noise.sigma_loss},
                          {"sigma_grad", config.noise.sigma_grad}}},
               {"output_dir", config.output_dir},
               {"sweep", {{"methods", methods},
                          {"eta", config.sweep.eta},
                          {"lambda", config.sweep.lambda},
                          {"alpha", config.sweep.alpha}}}};
  return root.dump(2) + "\n";
}

ExperimentConfig DefaultSyntheticConfig() {
  ExperimentConfig config;
  config.family = TaskFamily::kGeometric;
  config.strategy.kind = StrategyKind::kLdro;
  config.strategy.eta = 0.5;
  config.strategy.lambda = 0.1;
  config.strategy.refresh_interval = 1;
  config.optimizer.learning_rate = 0.01;
  config.optimizer.steps = 3000;
  config.eval_interval = 10;
  config.output_dir = "out/synthetic";
  return config;
}

ExperimentConfig DefaultClassificationConfig() {
  ExperimentConfig config;
  config.family = TaskFamily::kClassification;
  config.strategy.kind = StrategyKind::kLdro;
  config.strategy.refresh_interval = 10;
  config.optimizer.learning_rate = 0.1;
  config.optimizer.momentum = 0.9;
  config.optimizer.nesterov = true;
  config.optimizer.steps = 600;
  config.eval_interval = 20;
  config.seeds = {0, 1, 2};
  config.sweep.methods = {StrategyKind::kUniform, StrategyKind::kDro, StrategyKind::kLdro};
  config.sweep.eta = {0.1, 0.01, 0.001};
  config.sweep.lambda = {0.01, 0.1, 1.0};
  config.output_dir = "out/classification";
  return config;
}

}  // namespace rmt
