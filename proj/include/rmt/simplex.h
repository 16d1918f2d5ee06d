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

#ifndef RMT_SIMPLEX_H_
#define RMT_SIMPLEX_H_

#include <Eigen/Core>

namespace rmt {

// Lower bound applied to every task weight handed to training. Keeps weights
// in the open simplex (w_i > 0).
inline constexpr double kWeightFloor = 1e-6;

// Sum-to-one tolerance for a valid simplex point.
inline constexpr double kSimplexSumTolerance = 1e-9;

// A point on the probability simplex: non-negative entries summing to one.
// Used both for the trainer's task weights and for the adversary's weights.
class SimplexWeights {
 public:
  // Throws std::invalid_argument unless `values` is non-empty, finite,
  // non-negative and sums to one within kSimplexSumTolerance.
  explicit SimplexWeights(Eigen::VectorXd values);

  static SimplexWeights Uniform(int n);
  static SimplexWeights OneHot(int n, int index);

  // Normalizes non-negative `mass` onto the simplex, then raises every entry
  // to at least `floor` while keeping the sum at one. The result is the
  // exact floored projection: entries at the floor stay there and the rest
  // keep their relative proportions.
  static SimplexWeights Normalize(const Eigen::VectorXd& mass,
                                  double floor = kWeightFloor);

  // Multiplicative update w_i * exp(log_multipliers_i), renormalized and
  // floored. Computed in log space so large exponents cannot overflow.
  SimplexWeights Exponentiated(const Eigen::VectorXd& log_multipliers,
                               double floor = kWeightFloor) const;

  SimplexWeights Floored(double floor = kWeightFloor) const;

  int size() const { return static_cast<int>(values_.size()); }
  double operator[](int i) const { return values_[i]; }
  const Eigen::VectorXd& values() const { return values_; }

  friend bool operator==(const SimplexWeights& a, const SimplexWeights& b) {
    return a.values_.size() == b.values_.size() && a.values_ == b.values_;
  }

 private:
  struct Unchecked {};
  SimplexWeights(Eigen::VectorXd values, Unchecked) : values_(std::move(values)) {}

  Eigen::VectorXd values_;
};

// Shannon entropy -sum w_i ln w_i, with 0 ln 0 = 0.
double Entropy(const SimplexWeights& w);

// Total-variation distance 0.5 * ||a - b||_1.
double TotalVariation(const SimplexWeights& a, const SimplexWeights& b);

}  // namespace rmt

#endif  // RMT_SIMPLEX_H_
