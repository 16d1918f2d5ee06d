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

#ifndef RMT_WEIGHTING_H_
#define RMT_WEIGHTING_H_

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "rmt/matrix_game.h"
#include "rmt/simplex.h"

namespace rmt {

// Per-task losses (or baseline-adjusted losses).
using LossVector = Eigen::VectorXd;

// Gradients below this norm are treated as converged.
inline constexpr double kGradientNormFloor = 1e-12;

inline constexpr double kDefaultEta = 0.001;
inline constexpr double kDefaultLambda = 0.01;
inline constexpr int kDefaultRefreshInterval = 100;

// A_ij = g_i^T g_j / ||g_j||. Rows and columns of tasks whose gradient norm is
// below kGradientNormFloor are zero.
class InteractionMatrix {
 public:
  explicit InteractionMatrix(Eigen::MatrixXd entries);
  static InteractionMatrix Zero(int n);

  int size() const { return static_cast<int>(entries_.rows()); }
  const Eigen::MatrixXd& entries() const { return entries_; }

 private:
  Eigen::MatrixXd entries_;
};

// w_i proportional to sizes_i^alpha.
SimplexWeights StaticTemperatureWeights(std::span<const double> sizes, double alpha);

// Online DRO: w_i <- w_i exp(eta * loss_i), renormalized and floored.
// eta = 0 leaves w unchanged.
SimplexWeights DroOnlineUpdate(const SimplexWeights& w, const LossVector& losses,
                               double eta);

// losses - baselines, the input to Baselined-DRO.
LossVector ApplyBaselines(const LossVector& losses, const LossVector& baselines);

InteractionMatrix ComputeInteractionMatrix(std::span<const Eigen::VectorXd> gradients);

// L_ij = loss_i - lambda * A_ij.
PayoffMatrix LookaheadMatrix(const LossVector& losses, const InteractionMatrix& interaction,
                             double lambda);

// One exponentiated-gradient step of the trainer against the adversary's best
// response: v* = BestResponseRow(L, w); w_i <- w_i exp(-eta (v*^T L)_i).
SimplexWeights LdroWeightUpdate(const SimplexWeights& w, const PayoffMatrix& payoff,
                                double eta);

enum class StrategyKind { kUniform, kTemperature, kDro, kBaselinedDro, kLdro };

// How L-DRO turns the lookahead matrix into weights.
enum class LdroSolver {
  kOnline,  // exponentiated-gradient update against the best response
  kNash,    // max-entropy Nash equilibrium recomputed every step
};

std::string_view ToString(StrategyKind kind);
StrategyKind ParseStrategyKind(std::string_view name);
std::string_view ToString(LdroSolver solver);
LdroSolver ParseLdroSolver(std::string_view name);

struct StrategyConfig {
  StrategyKind kind = StrategyKind::kUniform;
  double alpha = 0.0;  // temperature
  double eta = kDefaultEta;
  double lambda = kDefaultLambda;
  int refresh_interval = kDefaultRefreshInterval;
  std::optional<std::vector<double>> baselines;
  LdroSolver solver = LdroSolver::kOnline;
  double nash_tol = 1e-3;

  friend bool operator==(const StrategyConfig&, const StrategyConfig&) = default;
};

// Throws std::invalid_argument when a field needed by `kind` is missing or out
// of range. `num_tasks` < 0 skips the baseline length check.
void Validate(const StrategyConfig& config, int num_tasks = -1);

}  // namespace rmt

#endif  // RMT_WEIGHTING_H_
