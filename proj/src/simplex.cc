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

#include "rmt/simplex.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace rmt {

SimplexWeights::SimplexWeights(Eigen::VectorXd values) : values_(std::move(values)) {
  if (values_.size() == 0) {
    throw std::invalid_argument("simplex weights must be non-empty");
  }
  for (Eigen::Index i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i]) || values_[i] < 0.0) {
      throw std::invalid_argument("simplex weight " + std::to_string(i) +
                                  " is negative or non-finite");
    }
  }
  if (std::abs(values_.sum() - 1.0) > kSimplexSumTolerance) {
    throw std::invalid_argument("simplex weights must sum to one");
  }
}

SimplexWeights SimplexWeights::Uniform(int n) {
  if (n <= 0) throw std::invalid_argument("simplex dimension must be positive");
  return SimplexWeights(Eigen::VectorXd::Constant(n, 1.0 / n), Unchecked{});
}

SimplexWeights SimplexWeights::OneHot(int n, int index) {
  if (n <= 0 || index < 0 || index >= n) {
    throw std::invalid_argument("one-hot index out of range");
  }
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
  v[index] = 1.0;
  return SimplexWeights(std::move(v), Unchecked{});
}

SimplexWeights SimplexWeights::Normalize(const Eigen::VectorXd& mass, double floor) {
  const Eigen::Index n = mass.size();
  if (n == 0) throw std::invalid_argument("simplex weights must be non-empty");
  if (floor < 0.0 || floor * static_cast<double>(n) > 1.0) {
    throw std::invalid_argument("weight floor incompatible with dimension");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::isfinite(mass[i]) || mass[i] < 0.0) {
      throw std::invalid_argument("weight mass must be finite and non-negative");
    }
  }
  const double total = mass.sum();
  if (!(total > 0.0)) throw std::invalid_argument("weight mass sums to zero");

  Eigen::VectorXd p = mass / total;
  if (floor == 0.0) return SimplexWeights(std::move(p), Unchecked{});

  // Entries pinned at the floor grow monotonically; at most n passes.
  std::vector<bool> pinned(n, false);
  Eigen::Index num_pinned = 0;
  Eigen::VectorXd out(n);
  for (;;) {
    double free_mass = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!pinned[i]) free_mass += p[i];
    }
    const double target = 1.0 - floor * static_cast<double>(num_pinned);
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (pinned[i]) {
        out[i] = floor;
        continue;
      }
      out[i] = free_mass > 0.0 ? p[i] * target / free_mass
                               : target / static_cast<double>(n - num_pinned);
      if (out[i] < floor) {
        pinned[i] = true;
        ++num_pinned;
        changed = true;
      }
    }
    if (!changed) break;
  }
  return SimplexWeights(std::move(out), Unchecked{});
}

SimplexWeights SimplexWeights::Exponentiated(const Eigen::VectorXd& log_multipliers,
                                             double floor) const {
  if (log_multipliers.size() != values_.size()) {
    throw std::invalid_argument("multiplier dimension mismatch");
  }
  if (!log_multipliers.allFinite()) {
    throw std::invalid_argument("non-finite weight update");
  }
  Eigen::VectorXd logits(values_.size());
  double max_logit = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < values_.size(); ++i) {
    logits[i] = values_[i] > 0.0 ? std::log(values_[i]) + log_multipliers[i]
                                 : -std::numeric_limits<double>::infinity();
    max_logit = std::max(max_logit, logits[i]);
  }
  Eigen::VectorXd mass = (logits.array() - max_logit).exp().matrix();
  return Normalize(mass, floor);
}

SimplexWeights SimplexWeights::Floored(double floor) const {
  return Normalize(values_, floor);
}

double Entropy(const SimplexWeights& w) {
  double h = 0.0;
  for (int i = 0; i < w.size(); ++i) {
    if (w[i] > 0.0) h -= w[i] * std::log(w[i]);
  }
  return h;
}

double TotalVariation(const SimplexWeights& a, const SimplexWeights& b) {
  if (a.size() != b.size()) throw std::invalid_argument("dimension mismatch");
  return 0.5 * (a.values() - b.values()).lpNorm<1>();
}

}  // namespace rmt
