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

#ifndef RMT_TRAINER_H_
#define RMT_TRAINER_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "rmt/simplex.h"
#include "rmt/tasks.h"
#include "rmt/weighting.h"

namespace rmt {

// Training aborts once any task loss exceeds this value.
inline constexpr double kDivergenceThreshold = 1e6;

struct OptimizerConfig {
  double learning_rate = 0.01;
  double momentum = 0.0;  // in [0, 1)
  bool nesterov = false;
  std::int64_t steps = 1000;
  int batch_size = 0;  // 0 = full batch

  friend bool operator==(const OptimizerConfig&, const OptimizerConfig&) = default;
};

void Validate(const OptimizerConfig& config);

struct TrainerState {
  Eigen::VectorXd params;
  Eigen::VectorXd velocity;
  SimplexWeights weights;
  InteractionMatrix interaction;
  std::int64_t step = 0;
};

struct Checkpoint {
  std::int64_t step = 0;                 // optimizer updates applied so far
  std::optional<Eigen::VectorXd> params;  // geometric family only
  Eigen::VectorXd losses;
  std::optional<Eigen::VectorXd> metrics;
  SimplexWeights weights;
};

struct Trajectory {
  std::vector<Checkpoint> checkpoints;
  // Steps at which the interaction matrix was recomputed (L-DRO only).
  std::vector<std::int64_t> interaction_refreshes;
  bool diverged = false;
  std::string diagnostic;
};

// Momentum SGD, optionally Nesterov:
//   v <- mu v + g;  theta <- theta - lr (nesterov ? g + mu v : v).
void OptimizerStep(TrainerState& state, const Eigen::VectorXd& gradient,
                   const OptimizerConfig& config);

// sum_i w_i grad loss_i(params).
Eigen::VectorXd WeightedGradient(const TaskSet& tasks, const Eigen::VectorXd& params,
                                 const SimplexWeights& w, const EvalContext& context = {});

// Runs the weighted training loop for `optimizer.steps` steps. Each step
// evaluates every task, updates the weights under `strategy` (for L-DRO:
// refresh the interaction matrix every refresh_interval steps, build the
// lookahead matrix, then update the weights), and takes an optimizer step on
// the weighted loss. A checkpoint is recorded after every `eval_interval`
// steps. Deterministic for a given seed.
Trajectory Train(const TaskSet& tasks, const StrategyConfig& strategy,
                 const OptimizerConfig& optimizer, std::int64_t eval_interval,
                 std::uint64_t seed);

}  // namespace rmt

#endif  // RMT_TRAINER_H_
