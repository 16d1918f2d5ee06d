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

// Independent reference computations shared by the tests.

#ifndef RMT_TESTS_ORACLES_H_
#define RMT_TESTS_ORACLES_H_

#include <cmath>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace rmt::testing {

// Pure saddle points (i, j) of min_w max_v v^T L w: L(i, j) is the largest
// entry of column j and the smallest entry of row i.
inline std::vector<std::pair<int, int>> PureSaddlePoints(const Eigen::MatrixXd& m) {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) {
      if (m(i, j) >= m.col(j).maxCoeff() && m(i, j) <= m.row(i).minCoeff()) out.emplace_back(i, j);
    }
  }
  return out;
}

// Strict saddle: the entry beats every other entry of its column and row.
inline bool IsStrictSaddle(const Eigen::MatrixXd& m, int i, int j) {
  for (int k = 0; k < m.rows(); ++k) {
    if (k != i && !(m(k, j) < m(i, j))) return false;
  }
  for (int k = 0; k < m.cols(); ++k) {
    if (k != j && !(m(i, k) > m(i, j))) return false;
  }
  return true;
}

// min_w max_i (L w)_i by enumerating the vertices of
// {(w, t) : L w <= t, w >= 0, sum w = 1}.
inline double LpGameValue(const Eigen::MatrixXd& m) {
  const int n = static_cast<int>(m.rows());
  double best = std::numeric_limits<double>::infinity();
  // Bitmask over 2n inequalities: bit i < n is row i of L w <= t, bit n + j is w_j >= 0.
  for (unsigned mask = 0; mask < (1u << (2 * n)); ++mask) {
    if (__builtin_popcount(mask) != n) continue;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n + 1, n + 1);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n + 1);
    int r = 0;
    for (int k = 0; k < 2 * n; ++k) {
      if (!(mask & (1u << k))) continue;
      if (k < n) {
        a.row(r).head(n) = m.row(k);
        a(r, n) = -1.0;
      } else {
        a(r, k - n) = 1.0;
      }
      ++r;
    }
    a.row(n).head(n).setOnes();
    b[n] = 1.0;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (lu.rank() < n + 1) continue;
    const Eigen::VectorXd x = lu.solve(b);
    const Eigen::VectorXd w = x.head(n);
    if (w.minCoeff() < -1e-12) continue;
    if ((m * w).maxCoeff() > x[n] + 1e-12) continue;
    best = std::min(best, x[n]);
  }
  return best;
}

// Central-difference gradient of f at x.
inline Eigen::VectorXd CentralDifference(const std::function<double(const Eigen::VectorXd&)>& f,
                                         const Eigen::VectorXd& x, double h) {
  Eigen::VectorXd g(x.size());
  for (int i = 0; i < x.size(); ++i) {
    Eigen::VectorXd plus = x;
    Eigen::VectorXd minus = x;
    plus[i] += h;
    minus[i] -= h;
    g[i] = (f(plus) - f(minus)) / (2.0 * h);
  }
  return g;
}

// ||a - b|| / max(||a||, ||b||), or 0 when both vanish.
inline double RelativeError(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double scale = std::max(a.norm(), b.norm());
  return scale == 0.0 ? 0.0 : (a - b).norm() / scale;
}

// Every matrix of size n x n with entries drawn from `values`.
inline std::vector<Eigen::MatrixXd> AllMatrices(int n, const std::vector<double>& values) {
  std::vector<Eigen::MatrixXd> out;
  const int cells = n * n;
  const int base = static_cast<int>(values.size());
  long total = 1;
  for (int c = 0; c < cells; ++c) total *= base;
  for (long code = 0; code < total; ++code) {
    Eigen::MatrixXd m(n, n);
    long rest = code;
    for (int c = 0; c < cells; ++c) {
      m(c / n, c % n) = values[rest % base];
      rest /= base;
    }
    out.push_back(m);
  }
  return out;
}

}  // namespace rmt::testing

#endif  // RMT_TESTS_ORACLES_H_
