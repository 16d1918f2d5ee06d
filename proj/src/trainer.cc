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

#include "rmt/trainer.h"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace rmt {
namespace {

Checkpoint MakeCheckpoint(const TaskSet& tasks, const TrainerState& state) {
  const int n = tasks.num_tasks();
  Checkpoint cp{state.step, std::nullopt, Eigen::VectorXd(n), std::nullopt, state.weights};
  if (tasks.SnapshotParams()) cp.params = state.params;
  Eigen::VectorXd metrics(n);
  bool has_metrics = true;
  for (int i = 0; i < n; ++i) {
    cp.losses[i] = tasks.Loss(i, state.params);
    const auto m = tasks.Metric(i, state.params);
    has_metrics = has_metrics && m.has_value();
    metrics[i] = m.value_or(0.0);
  }
  if (has_metrics) cp.metrics = std::move(metrics);
  return cp;
}

}  // namespace

void Validate(const OptimizerConfig& config) {
  if (!(config.learning_rate > 0.0) || !std::isfinite(config.learning_rate)) {
    throw std::invalid_argument("learning_rate must be > 0");
  }
  if (!(config.momentum >= 0.0 && config.momentum < 1.0)) {
    throw std::invalid_argument("momentum must lie in [0, 1)");
  }
  if (config.steps < 1) throw std::invalid_argument("steps must be >= 1");
  if (config.batch_size < 0) throw std::invalid_argument("batch_size must be >= 0");
}

void OptimizerStep(TrainerState& state, const Eigen::VectorXd& gradient,
                   const OptimizerConfig& config) {
  if (gradient.size() != state.params.size()) {
    throw std::invalid_argument("gradient dimension mismatch");
  }
  if (state.velocity.size() != state.params.size()) {
    state.velocity = Eigen::VectorXd::Zero(state.params.size());
  }
  state.velocity = config.momentum * state.velocity + gradient;
  if (config.nesterov) {
    state.params -= config.learning_rate * (gradient + config.momentum * state.velocity);
  } else {
    state.params -= config.learning_rate * state.velocity;
  }
}

Eigen::VectorXd WeightedGradient(const TaskSet& tasks, const Eigen::VectorXd& params,
                                 const SimplexWeights& w, const EvalContext& context) {
  if (w.size() != tasks.num_tasks()) throw std::invalid_argument("weight dimension mismatch");
  Eigen::VectorXd g = Eigen::VectorXd::Zero(tasks.num_params());
  for (int i = 0; i < tasks.num_tasks(); ++i) {
    g += w[i] * tasks.Evaluate(i, params, context).gradient;
  }
  return g;
}

Trajectory Train(const TaskSet& tasks, const StrategyConfig& strategy,
                 const OptimizerConfig& optimizer, std::int64_t eval_interval,
                 std::uint64_t seed) {
  const int n = tasks.num_tasks();
  Validate(strategy, n);
  Validate(optimizer);
  if (eval_interval < 1) throw std::invalid_argument("eval_interval must be >= 1");

  TrainerState state{tasks.InitialParams(seed), Eigen::VectorXd::Zero(tasks.num_params()),
                     SimplexWeights::Uniform(n), InteractionMatrix::Zero(n), 0};
  if (strategy.kind == StrategyKind::kTemperature) {
    const std::vector<double> sizes = tasks.TaskSizes();
    state.weights = StaticTemperatureWeights(sizes, strategy.alpha);
  }
  LossVector baselines;
  if (strategy.kind == StrategyKind::kBaselinedDro) {
    baselines = Eigen::Map<const Eigen::VectorXd>(strategy.baselines->data(), n);
  }

  Trajectory trajectory;
  LossVector losses(n);
  std::vector<Eigen::VectorXd> gradients(n);
  for (std::int64_t step = 0; step < optimizer.steps; ++step) {
    const EvalContext context{step, optimizer.batch_size, seed};
    for (int i = 0; i < n; ++i) {
      TaskEvaluation e = tasks.Evaluate(i, state.params, context);
      losses[i] = e.loss;
      gradients[i] = std::move(e.gradient);
    }
    for (int i = 0; i < n; ++i) {
      if (!std::isfinite(losses[i]) || std::abs(losses[i]) > kDivergenceThreshold ||
          !gradients[i].allFinite()) {
        trajectory.diverged = true;
        trajectory.diagnostic =
            fmt::format("task {} loss {} at step {} exceeds divergence guard", i, losses[i], step);
        Checkpoint cp{step, std::nullopt, losses, std::nullopt, state.weights};
        if (tasks.SnapshotParams()) cp.params = state.params;
        trajectory.checkpoints.push_back(std::move(cp));
        return trajectory;
      }
    }

    switch (strategy.kind) {
      case StrategyKind::kUniform:
      case StrategyKind::kTemperature:
        break;
      case StrategyKind::kDro:
        state.weights = DroOnlineUpdate(state.weights, losses, strategy.eta);
        break;
      case StrategyKind::kBaselinedDro:
        state.weights =
            DroOnlineUpdate(state.weights, ApplyBaselines(losses, baselines), strategy.eta);
        break;
      case StrategyKind::kLdro: {
        if (step % strategy.refresh_interval == 0) {
          state.interaction = ComputeInteractionMatrix(gradients);
          trajectory.interaction_refreshes.push_back(step);
        }
        const PayoffMatrix lookahead =
            LookaheadMatrix(losses, state.interaction, strategy.lambda);
        if (strategy.solver == LdroSolver::kOnline) {
          state.weights = LdroWeightUpdate(state.weights, lookahead, strategy.eta);
        } else {
          NashSolverOptions options;
          options.tol = strategy.nash_tol;
          options.seed = MixSeed(seed, static_cast<std::uint64_t>(step));
          state.weights = SolveNashMaxEnt(lookahead, options).col_strategy;
        }
        break;
      }
    }

    Eigen::VectorXd g = Eigen::VectorXd::Zero(tasks.num_params());
    for (int i = 0; i < n; ++i) g += state.weights[i] * gradients[i];
    OptimizerStep(state, g, optimizer);
    ++state.step;

    if (state.step % eval_interval == 0) {
      trajectory.checkpoints.push_back(MakeCheckpoint(tasks, state));
    }
  }
  return trajectory;
}

}  // namespace rmt
