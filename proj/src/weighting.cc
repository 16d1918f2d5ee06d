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

#include "rmt/weighting.h"

#include <cmath>
#include <stdexcept>

namespace rmt {

InteractionMatrix::InteractionMatrix(Eigen::MatrixXd entries) : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols()) {
    throw std::invalid_argument("interaction matrix must be square");
  }
  if (!entries_.allFinite()) {
    throw std::invalid_argument("interaction matrix has non-finite entries");
  }
}

InteractionMatrix InteractionMatrix::Zero(int n) {
  return InteractionMatrix(Eigen::MatrixXd::Zero(n, n));
}

SimplexWeights StaticTemperatureWeights(std::span<const double> sizes, double alpha) {
  if (sizes.empty()) throw std::invalid_argument("need at least one task size");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("alpha must be >= 0");
  // sizes^alpha / max^alpha keeps the mass bounded for any alpha.
  double largest = 0.0;
  for (double s : sizes) {
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw std::invalid_argument("task sizes must be positive");
    }
    largest = std::max(largest, s);
  }
  Eigen::VectorXd mass(static_cast<Eigen::Index>(sizes.size()));
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    mass[static_cast<Eigen::Index>(i)] = alpha == 0.0 ? 1.0 : std::pow(sizes[i] / largest, alpha);
  }
  return SimplexWeights::Normalize(mass, 0.0);
}

SimplexWeights DroOnlineUpdate(const SimplexWeights& w, const LossVector& losses,
                               double eta) {
  if (losses.size() != w.size()) throw std::invalid_argument("loss dimension mismatch");
  if (!losses.allFinite()) throw std::invalid_argument("non-finite loss");
  if (!(eta >= 0.0) || !std::isfinite(eta)) {
    throw std::invalid_argument("eta must be non-negative");
  }
  return w.Exponentiated(eta * losses);
}

LossVector ApplyBaselines(const LossVector& losses, const LossVector& baselines) {
  if (losses.size() != baselines.size()) {
    throw std::invalid_argument("baseline length does not match task count");
  }
  return losses - baselines;
}

InteractionMatrix ComputeInteractionMatrix(std::span<const Eigen::VectorXd> gradients) {
  const auto n = static_cast<Eigen::Index>(gradients.size());
  if (n == 0) return InteractionMatrix::Zero(0);
  const Eigen::Index dim = gradients[0].size();
  Eigen::MatrixXd g(n, dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (gradients[i].size() != dim) {
      throw std::invalid_argument("gradient dimension mismatch");
    }
    if (!gradients[i].allFinite()) throw std::invalid_argument("non-finite gradient");
    g.row(i) = gradients[i].transpose();
  }
  const Eigen::VectorXd norms = g.rowwise().norm();
  Eigen::MatrixXd a = g * g.transpose();
  for (Eigen::Index j = 0; j < n; ++j) {
    if (norms[j] < kGradientNormFloor) {
      a.col(j).setZero();
      a.row(j).setZero();
    } else {
      a.col(j) /= norms[j];
    }
  }
  return InteractionMatrix(std::move(a));
}

PayoffMatrix LookaheadMatrix(const LossVector& losses, const InteractionMatrix& interaction,
                             double lambda) {
  if (losses.size() != interaction.size()) {
    throw std::invalid_argument("loss and interaction dimensions differ");
  }
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be non-negative");
  Eigen::MatrixXd l = -lambda * interaction.entries();
  l.colwise() += losses;
  return PayoffMatrix(std::move(l));
}

SimplexWeights LdroWeightUpdate(const SimplexWeights& w, const PayoffMatrix& payoff,
                                double eta) {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw std::invalid_argument("eta must be positive");
  const SimplexWeights adversary = BestResponseRow(payoff, w);
  const Eigen::VectorXd penalties = payoff.entries().transpose() * adversary.values();
  return w.Exponentiated(-eta * penalties);
}

std::string_view ToString(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::kUniform: return "uniform";
    case StrategyKind::kTemperature: return "temperature";
    case StrategyKind::kDro: return "dro";
    case StrategyKind::kBaselinedDro: return "baselined_dro";
    case StrategyKind::kLdro: return "ldro";
  }
  return "unknown";
}

StrategyKind ParseStrategyKind(std::string_view name) {
  for (StrategyKind k : {StrategyKind::kUniform, StrategyKind::kTemperature,
                         StrategyKind::kDro, StrategyKind::kBaselinedDro, StrategyKind::kLdro}) {
    if (ToString(k) == name) return k;
  }
  throw std::invalid_argument("unknown strategy kind '" + std::string(name) + "'");
}

std::string_view ToString(LdroSolver solver) {
  return solver == LdroSolver::kOnline ? "online" : "nash";
}

LdroSolver ParseLdroSolver(std::string_view name) {
  if (name == "online") return LdroSolver::kOnline;
  if (name == "nash") return LdroSolver::kNash;
  throw std::invalid_argument("unknown L-DRO solver '" + std::string(name) + "'");
}

void Validate(const StrategyConfig& config, int num_tasks) {
  auto fail = [](const std::string& msg) { throw std::invalid_argument(msg); };
  switch (config.kind) {
    case StrategyKind::kUniform:
      break;
    case StrategyKind::kTemperature:
      if (!(config.alpha >= 0.0) || !std::isfinite(config.alpha)) fail("alpha must be >= 0");
      break;
    case StrategyKind::kBaselinedDro:
      if (!config.baselines) fail("baselined_dro requires baselines");
      for (double b : *config.baselines) {
        if (!std::isfinite(b)) fail("baselines must be finite");
      }
      if (num_tasks >= 0 && static_cast<int>(config.baselines->size()) != num_tasks) {
        fail("baselines length does not match task count");
      }
      [[fallthrough]];
    case StrategyKind::kDro:
      if (!(config.eta >= 0.0) || !std::isfinite(config.eta)) fail("eta must be >= 0");
      break;
    case StrategyKind::kLdro:
      if (config.solver == LdroSolver::kOnline &&
          (!(config.eta > 0.0) || !std::isfinite(config.eta))) {
        fail("eta must be > 0");
      }
      if (!(config.lambda >= 0.0) || !std::isfinite(config.lambda)) fail("lambda must be >= 0");
      if (config.refresh_interval < 1) fail("refresh_interval must be >= 1");
      if (config.solver == LdroSolver::kNash && !(config.nash_tol > 0.0)) {
        fail("nash_tol must be > 0");
      }
      break;
  }
}

}  // namespace rmt
