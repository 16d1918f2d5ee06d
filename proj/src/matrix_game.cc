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

#include "rmt/matrix_game.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include <Eigen/LU>

namespace rmt {
namespace {

void CheckDimension(const PayoffMatrix& payoff, const SimplexWeights& s) {
  if (s.size() != payoff.size()) {
    throw std::invalid_argument("strategy dimension does not match payoff matrix");
  }
}

double TieThreshold(const Eigen::VectorXd& x) {
  return kTieRelativeTolerance * x.cwiseAbs().maxCoeff();
}

SimplexWeights UniformOver(int n, const std::vector<int>& support) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
  for (int i : support) v[i] = 1.0 / static_cast<double>(support.size());
  return SimplexWeights::Normalize(v, 0.0);
}

// Half uniform, half a Dirichlet(1) draw.
SimplexWeights PerturbedStart(int n, std::mt19937_64& rng) {
  std::exponential_distribution<double> draw(1.0);
  Eigen::VectorXd g(n);
  for (int i = 0; i < n; ++i) g[i] = draw(rng);
  Eigen::VectorXd mass = 0.5 * Eigen::VectorXd::Constant(n, 1.0 / n) + 0.5 * g / g.sum();
  return SimplexWeights::Normalize(mass, 0.0);
}

GameSolution MakeSolution(const PayoffMatrix& payoff, SimplexWeights v, SimplexWeights w,
                          double tol, std::int64_t iterations) {
  const double exploitability = Exploitability(payoff, v, w);
  const double value = v.values().dot(payoff.entries() * w.values());
  return GameSolution{std::move(v), std::move(w), value, exploitability,
                      exploitability <= tol, iterations};
}

// Indices 0..n-1 ordered by `key`, stable on ties.
std::vector<int> OrderBy(const Eigen::VectorXd& key, bool descending) {
  std::vector<int> idx(key.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    return descending ? key[a] > key[b] : key[a] < key[b];
  });
  return idx;
}

// Solves [M -1; 1^T 0][x; value] = [0; 1] for a distribution x that makes
// every row of M pay the same value.
std::optional<Eigen::VectorXd> Equalize(const Eigen::MatrixXd& m) {
  const Eigen::Index k = m.rows();
  Eigen::MatrixXd system = Eigen::MatrixXd::Zero(k + 1, k + 1);
  system.topLeftCorner(k, k) = m;
  system.topRightCorner(k, 1).setConstant(-1.0);
  system.bottomLeftCorner(1, k).setConstant(1.0);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k + 1);
  rhs[k] = 1.0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(system);
  if (!lu.isInvertible()) return std::nullopt;
  Eigen::VectorXd x = lu.solve(rhs).head(k);
  if (!x.allFinite() || x.minCoeff() < -1e-10) return std::nullopt;
  return x.cwiseMax(0.0);
}

}  // namespace

PayoffMatrix::PayoffMatrix(Eigen::MatrixXd entries) : entries_(std::move(entries)) {
  if (entries_.rows() == 0 || entries_.rows() != entries_.cols()) {
    throw std::invalid_argument("payoff matrix must be square and non-empty");
  }
  if (!entries_.allFinite()) {
    throw std::invalid_argument("payoff matrix has non-finite entries");
  }
}

std::vector<int> ArgMaxSet(const Eigen::VectorXd& x) {
  const double threshold = x.maxCoeff() - TieThreshold(x);
  std::vector<int> out;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x[i] >= threshold) out.push_back(static_cast<int>(i));
  }
  return out;
}

std::vector<int> ArgMinSet(const Eigen::VectorXd& x) {
  const double threshold = x.minCoeff() + TieThreshold(x);
  std::vector<int> out;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x[i] <= threshold) out.push_back(static_cast<int>(i));
  }
  return out;
}

SimplexWeights BestResponseRow(const PayoffMatrix& payoff, const SimplexWeights& w) {
  CheckDimension(payoff, w);
  return UniformOver(payoff.size(), ArgMaxSet(payoff.entries() * w.values()));
}

SimplexWeights BestResponseColumn(const PayoffMatrix& payoff, const SimplexWeights& v) {
  CheckDimension(payoff, v);
  return UniformOver(payoff.size(),
                     ArgMinSet(payoff.entries().transpose() * v.values()));
}

double Exploitability(const PayoffMatrix& payoff, const SimplexWeights& v,
                      const SimplexWeights& w) {
  CheckDimension(payoff, v);
  CheckDimension(payoff, w);
  const double upper = (payoff.entries() * w.values()).maxCoeff();
  const double lower = (payoff.entries().transpose() * v.values()).minCoeff();
  return std::max(0.0, upper - lower);
}

std::int64_t DefaultFictitiousPlayIterations(int n, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  const double iters = 10.0 * n * std::ceil(1.0 / tol);
  return static_cast<std::int64_t>(
      std::min(iters, static_cast<double>(kMaxFictitiousPlayIterations)));
}

FictitiousPlay::FictitiousPlay(const PayoffMatrix& payoff, const SimplexWeights& row_init,
                               const SimplexWeights& col_init)
    : payoff_(payoff),
      row_sum_(Eigen::VectorXd::Zero(payoff.size())),
      col_sum_(Eigen::VectorXd::Zero(payoff.size())),
      row_payoffs_(Eigen::VectorXd::Zero(payoff.size())),
      col_payoffs_(Eigen::VectorXd::Zero(payoff.size())),
      best_row_(row_init),
      best_col_(col_init),
      best_exploitability_(Exploitability(payoff, row_init, col_init)) {
  next_rows_ = ArgMaxSet(payoff.entries() * col_init.values());
  next_cols_ = ArgMinSet(payoff.entries().transpose() * row_init.values());
}

FictitiousPlay::FictitiousPlay(const PayoffMatrix& payoff)
    : FictitiousPlay(payoff, SimplexWeights::Uniform(payoff.size()),
                     SimplexWeights::Uniform(payoff.size())) {}

void FictitiousPlay::Step() {
  const Eigen::MatrixXd& l = payoff_.entries();
  const double row_share = 1.0 / static_cast<double>(next_rows_.size());
  for (int i : next_rows_) {
    row_sum_[i] += row_share;
    col_payoffs_ += row_share * l.row(i).transpose();
  }
  const double col_share = 1.0 / static_cast<double>(next_cols_.size());
  for (int j : next_cols_) {
    col_sum_[j] += col_share;
    row_payoffs_ += col_share * l.col(j);
  }
  ++t_;
  next_rows_ = ArgMaxSet(row_payoffs_);
  next_cols_ = ArgMinSet(col_payoffs_);

  const double gap = (row_payoffs_.maxCoeff() - col_payoffs_.minCoeff()) /
                     static_cast<double>(t_);
  if (gap < best_exploitability_) {
    best_row_ = AverageRow();
    best_col_ = AverageColumn();
    best_exploitability_ = Exploitability(payoff_, best_row_, best_col_);
  }
}

bool FictitiousPlay::Run(std::int64_t iterations, double tol) {
  for (std::int64_t i = 0; i < iterations; ++i) {
    Step();
    if (best_exploitability_ <= tol) return true;
  }
  return best_exploitability_ <= tol;
}

SimplexWeights FictitiousPlay::AverageRow() const {
  if (t_ == 0) return best_row_;
  return SimplexWeights::Normalize(row_sum_, 0.0);
}

SimplexWeights FictitiousPlay::AverageColumn() const {
  if (t_ == 0) return best_col_;
  return SimplexWeights::Normalize(col_sum_, 0.0);
}

double FictitiousPlay::AverageExploitability() const {
  return Exploitability(payoff_, AverageRow(), AverageColumn());
}

GameSolution SolveFictitiousPlay(const PayoffMatrix& payoff, std::int64_t max_iters,
                                 double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (max_iters <= 0) max_iters = DefaultFictitiousPlayIterations(payoff.size(), tol);
  FictitiousPlay fp(payoff);
  fp.Run(max_iters, tol);
  return MakeSolution(payoff, fp.best_row(), fp.best_col(), tol, fp.iterations());
}

std::optional<GameSolution> PolishSupport(const PayoffMatrix& payoff,
                                          const SimplexWeights& v,
                                          const SimplexWeights& w) {
  CheckDimension(payoff, v);
  CheckDimension(payoff, w);
  const Eigen::MatrixXd& l = payoff.entries();
  const int n = payoff.size();
  const std::vector<int> rows = OrderBy(l * w.values(), /*descending=*/true);
  const std::vector<int> cols = OrderBy(l.transpose() * v.values(), /*descending=*/false);

  std::optional<GameSolution> best;
  double best_exploitability = Exploitability(payoff, v, w);
  Eigen::MatrixXd sub;
  for (int k = 1; k <= n; ++k) {
    sub.resize(k, k);
    for (int a = 0; a < k; ++a) {
      for (int b = 0; b < k; ++b) sub(a, b) = l(rows[a], cols[b]);
    }
    const auto col_part = Equalize(sub);
    if (!col_part) continue;
    const auto row_part = Equalize(sub.transpose());
    if (!row_part) continue;
    Eigen::VectorXd full_v = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd full_w = Eigen::VectorXd::Zero(n);
    for (int a = 0; a < k; ++a) {
      full_v[rows[a]] = (*row_part)[a];
      full_w[cols[a]] = (*col_part)[a];
    }
    if (!(full_v.sum() > 0.0) || !(full_w.sum() > 0.0)) continue;
    SimplexWeights cand_v = SimplexWeights::Normalize(full_v, 0.0);
    SimplexWeights cand_w = SimplexWeights::Normalize(full_w, 0.0);
    const double e = Exploitability(payoff, cand_v, cand_w);
    if (e < best_exploitability) {
      best_exploitability = e;
      best = MakeSolution(payoff, std::move(cand_v), std::move(cand_w),
                          std::numeric_limits<double>::infinity(), 0);
    }
  }
  return best;
}

GameSolution SolveByPivoting(const PayoffMatrix& payoff) {
  const Eigen::MatrixXd& l = payoff.entries();
  const int n = payoff.size();
  // Shifted so every entry is >= 1: max 1^T x s.t. (L - c) x <= 1, x >= 0 has
  // optimum 1 / value, w = x * value, and the row player's strategy in the
  // slack reduced costs. The slack basis is feasible from the start.
  const double shift = l.minCoeff() - 1.0;
  const int cols = 2 * n;
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(n + 1, cols + 1);
  t.topLeftCorner(n, n) = l.array() - shift;
  t.block(0, n, n, n).setIdentity();
  t.col(cols).head(n).setOnes();
  t.row(n).head(n).setConstant(-1.0);
  std::vector<int> basis(n);
  std::iota(basis.begin(), basis.end(), n);

  const double eps = 1e-12 * (1.0 + l.cwiseAbs().maxCoeff());
  // Bland's rule: lowest-index entering and leaving variables, so degenerate
  // games cannot cycle.
  for (;;) {
    int enter = -1;
    for (int j = 0; j < cols; ++j) {
      if (t(n, j) < -eps) {
        enter = j;
        break;
      }
    }
    if (enter < 0) break;
    int leave = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      if (t(i, enter) <= eps) continue;
      const double ratio = t(i, cols) / t(i, enter);
      if (ratio < best_ratio - eps ||
          (ratio <= best_ratio + eps && leave >= 0 && basis[i] < basis[leave])) {
        best_ratio = std::min(best_ratio, ratio);
        leave = i;
      }
    }
    // Unbounded is impossible with positive entries.
    if (leave < 0) throw std::logic_error("pivoting found an unbounded direction");
    t.row(leave) /= t(leave, enter);
    for (int i = 0; i <= n; ++i) {
      if (i != leave && t(i, enter) != 0.0) t.row(i) -= t(i, enter) * t.row(leave);
    }
    basis[leave] = enter;
  }

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    if (basis[i] < n) x[basis[i]] = std::max(t(i, cols), 0.0);
  }
  const Eigen::VectorXd y = t.row(n).segment(n, n).transpose().cwiseMax(0.0);
  return MakeSolution(payoff, SimplexWeights::Normalize(y, 0.0),
                      SimplexWeights::Normalize(x, 0.0), 0.0, 0);
}

SimplexWeights ShrinkTowardUniform(const PayoffMatrix& payoff, const SimplexWeights& w) {
  CheckDimension(payoff, w);
  const int n = payoff.size();
  const Eigen::VectorXd uniform = Eigen::VectorXd::Constant(n, 1.0 / n);
  const Eigen::VectorXd a = payoff.entries() * uniform;
  const Eigen::VectorXd b = payoff.entries() * w.values();
  const double scale = std::max(a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff());
  const double bound = b.maxCoeff() + kTieRelativeTolerance * scale;

  // Row i stays within the bound for every s >= (a_i - bound) / (a_i - b_i).
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    if (a[i] > bound) s = std::max(s, (a[i] - bound) / (a[i] - b[i]));
  }
  s = std::min(s, 1.0);
  return SimplexWeights::Normalize((1.0 - s) * uniform + s * w.values(), 0.0);
}

GameSolution SolveNashMaxEnt(const PayoffMatrix& payoff, const NashSolverOptions& options) {
  if (!(options.tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (options.restarts < 1) throw std::invalid_argument("need at least one restart");
  const int n = payoff.size();
  if (n == 1) {
    return GameSolution{SimplexWeights::Uniform(1), SimplexWeights::Uniform(1),
                        payoff(0, 0), 0.0, true, 0};
  }
  const std::int64_t max_iters = options.max_iters > 0
                                     ? options.max_iters
                                     : DefaultFictitiousPlayIterations(n, options.tol);

  std::mt19937_64 rng(options.seed);
  std::optional<GameSolution> chosen;
  std::optional<GameSolution> exact;
  for (int restart = 0; restart < options.restarts; ++restart) {
    const SimplexWeights row_init =
        restart == 0 ? SimplexWeights::Uniform(n) : PerturbedStart(n, rng);
    const SimplexWeights col_init =
        restart == 0 ? SimplexWeights::Uniform(n) : PerturbedStart(n, rng);
    FictitiousPlay fp(payoff, row_init, col_init);

    SimplexWeights v = row_init;
    SimplexWeights w = col_init;
    double e = Exploitability(payoff, v, w);
    std::int64_t chunk = 32;
    while (fp.iterations() < max_iters) {
      fp.Run(std::min(chunk, max_iters - fp.iterations()), options.tol);
      v = fp.best_row();
      w = fp.best_col();
      e = fp.best_exploitability();
      if (auto polished = PolishSupport(payoff, v, w)) {
        v = polished->row_strategy;
        w = polished->col_strategy;
        e = polished->exploitability;
      }
      if (e <= options.tol) break;
      // Fictitious play closes the gap at roughly 1/sqrt(t); once the support
      // guess fails, the exact solution is far cheaper than more iterations.
      if (!exact) exact = SolveByPivoting(payoff);
      if (exact->exploitability < e) {
        v = exact->row_strategy;
        w = exact->col_strategy;
        e = exact->exploitability;
      }
      if (e <= options.tol) break;
      chunk *= 2;
    }

    GameSolution candidate =
        MakeSolution(payoff, v.Floored(), ShrinkTowardUniform(payoff, w).Floored(),
                     options.tol, fp.iterations());
    if (!chosen) {
      chosen = std::move(candidate);
      continue;
    }
    if (candidate.converged && chosen->converged) {
      if (Entropy(candidate.col_strategy) > Entropy(chosen->col_strategy)) {
        chosen = std::move(candidate);
      }
    } else if (candidate.converged ||
               (!chosen->converged && candidate.exploitability < chosen->exploitability)) {
      chosen = std::move(candidate);
    }
  }
  return *chosen;
}

GameSolution SolveNashMaxEnt(const PayoffMatrix& payoff, double tol) {
  NashSolverOptions options;
  options.tol = tol;
  return SolveNashMaxEnt(payoff, options);
}

}  // namespace rmt
