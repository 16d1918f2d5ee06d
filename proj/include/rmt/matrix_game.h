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

#ifndef RMT_MATRIX_GAME_H_
#define RMT_MATRIX_GAME_H_

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "rmt/simplex.h"

// Bilinear zero-sum games min_w max_v v^T L w. The row player (v) is the
// adversary picking which task losses to report, the column player (w) is the
// trainer picking task weights.

namespace rmt {

// Relative tolerance used when comparing payoffs for ties.
inline constexpr double kTieRelativeTolerance = 1e-9;

// Hard cap on fictitious-play iterations when none is given.
inline constexpr std::int64_t kMaxFictitiousPlayIterations = 1'000'000;

// Square payoff matrix with finite entries.
class PayoffMatrix {
 public:
  explicit PayoffMatrix(Eigen::MatrixXd entries);

  int size() const { return static_cast<int>(entries_.rows()); }
  const Eigen::MatrixXd& entries() const { return entries_; }
  double operator()(int row, int col) const { return entries_(row, col); }

 private:
  Eigen::MatrixXd entries_;
};

struct GameSolution {
  SimplexWeights row_strategy;  // v*
  SimplexWeights col_strategy;  // w*
  double value = 0.0;           // v*^T L w*
  double exploitability = 0.0;  // max_i (L w*)_i - min_j (v*^T L)_j
  // False when the iteration budget ran out before exploitability <= tol.
  // The strategies are then the best found so far.
  bool converged = false;
  std::int64_t iterations = 0;
};

// Indices within kTieRelativeTolerance of the maximum (minimum) entry.
std::vector<int> ArgMaxSet(const Eigen::VectorXd& x);
std::vector<int> ArgMinSet(const Eigen::VectorXd& x);

// Uniform distribution over argmax_i (L w)_i.
SimplexWeights BestResponseRow(const PayoffMatrix& payoff, const SimplexWeights& w);
// Uniform distribution over argmin_j (v^T L)_j.
SimplexWeights BestResponseColumn(const PayoffMatrix& payoff, const SimplexWeights& v);

double Exploitability(const PayoffMatrix& payoff, const SimplexWeights& v,
                      const SimplexWeights& w);

// 10 * n * ceil(1 / tol), capped at kMaxFictitiousPlayIterations.
std::int64_t DefaultFictitiousPlayIterations(int n, double tol);

// Simultaneous fictitious play with uniform tie-splitting. Both players best
// respond to the opponent's running average. The initial strategies only seed
// the first best responses; they are not part of the averages.
class FictitiousPlay {
 public:
  FictitiousPlay(const PayoffMatrix& payoff, const SimplexWeights& row_init,
                 const SimplexWeights& col_init);
  explicit FictitiousPlay(const PayoffMatrix& payoff);

  // Runs at most `iterations` more steps, stopping once the exploitability of
  // the averages is <= tol. Returns true on convergence.
  bool Run(std::int64_t iterations, double tol);

  std::int64_t iterations() const { return t_; }
  SimplexWeights AverageRow() const;
  SimplexWeights AverageColumn() const;
  double AverageExploitability() const;

  // Lowest-exploitability averages seen so far.
  const SimplexWeights& best_row() const { return best_row_; }
  const SimplexWeights& best_col() const { return best_col_; }
  double best_exploitability() const { return best_exploitability_; }

 private:
  void Step();

  PayoffMatrix payoff_;
  std::int64_t t_ = 0;
  Eigen::VectorXd row_sum_;      // sum of row best responses
  Eigen::VectorXd col_sum_;      // sum of column best responses
  Eigen::VectorXd row_payoffs_;  // L * col_sum_
  Eigen::VectorXd col_payoffs_;  // row_sum_^T L
  std::vector<int> next_rows_;
  std::vector<int> next_cols_;
  SimplexWeights best_row_;
  SimplexWeights best_col_;
  double best_exploitability_;
};

// Time-averaged fictitious play from uniform starts. `max_iters` <= 0 picks
// DefaultFictitiousPlayIterations.
GameSolution SolveFictitiousPlay(const PayoffMatrix& payoff, std::int64_t max_iters,
                                 double tol);

// Exact equalizing solution on the supports suggested by (v, w): for every k
// the k best rows against w and k best columns against v are solved as a
// square indifference system. Returns the valid candidate with the lowest
// exploitability, if any beats `v, w`.
std::optional<GameSolution> PolishSupport(const PayoffMatrix& payoff,
                                          const SimplexWeights& v,
                                          const SimplexWeights& w);

// Exact equilibrium by simplex pivoting on the shifted game, with Bland's
// rule against cycling. Returns a vertex of the equilibrium set.
GameSolution SolveByPivoting(const PayoffMatrix& payoff);

// Highest-entropy column strategy on the segment from uniform to `w` whose
// worst-case payoff max_i (L w)_i does not exceed that of `w` (up to ties).
SimplexWeights ShrinkTowardUniform(const PayoffMatrix& payoff, const SimplexWeights& w);

struct NashSolverOptions {
  double tol = 1e-3;
  int restarts = 3;
  std::uint64_t seed = 0;
  std::int64_t max_iters = 0;  // per restart; <= 0 picks the default
};

// Fictitious play restarted from perturbed strategies; every restart is
// polished (falling back to SolveByPivoting when the support guess fails),
// shrunk toward uniform and floored at kWeightFloor. Among restarts whose
// exploitability is <= tol, returns the one whose column strategy has the
// highest entropy. Otherwise returns the least exploitable one with
// converged = false.
GameSolution SolveNashMaxEnt(const PayoffMatrix& payoff, const NashSolverOptions& options);
GameSolution SolveNashMaxEnt(const PayoffMatrix& payoff, double tol);

}  // namespace rmt

#endif  // RMT_MATRIX_GAME_H_
