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

#include "rmt/eval.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace rmt {

MetricPoint Aggregate(std::span<const double> per_task, bool higher_is_better,
                      Provenance provenance) {
  if (per_task.empty()) throw std::invalid_argument("cannot aggregate an empty vector");
  const double mean = std::accumulate(per_task.begin(), per_task.end(), 0.0) /
                      static_cast<double>(per_task.size());
  const double worst = higher_is_better ? *std::min_element(per_task.begin(), per_task.end())
                                        : *std::max_element(per_task.begin(), per_task.end());
  return MetricPoint{mean, worst, std::move(provenance)};
}

bool Dominates(const MetricPoint& a, const MetricPoint& b) {
  return a.average >= b.average && a.worst >= b.worst &&
         (a.average > b.average || a.worst > b.worst);
}

std::vector<MetricPoint> ParetoFrontier(std::span<const MetricPoint> points) {
  std::vector<MetricPoint> sorted(points.begin(), points.end());
  for (const MetricPoint& p : sorted) {
    if (!std::isfinite(p.average) || !std::isfinite(p.worst)) {
      throw std::invalid_argument("frontier points must be finite");
    }
  }
  std::sort(sorted.begin(), sorted.end(), [](const MetricPoint& a, const MetricPoint& b) {
    if (a.average != b.average) return a.average > b.average;
    if (a.worst != b.worst) return a.worst > b.worst;
    return a.provenance < b.provenance;
  });
  // Sweep by decreasing average; keep a point only if it raises the best worst.
  std::vector<MetricPoint> frontier;
  double best_worst = -std::numeric_limits<double>::infinity();
  for (MetricPoint& p : sorted) {
    if (p.worst > best_worst) {
      best_worst = p.worst;
      frontier.push_back(std::move(p));
    }
  }
  return frontier;
}

double FrontierAverageAt(std::span<const MetricPoint> frontier, double worst) {
  double best = std::numeric_limits<double>::quiet_NaN();
  for (const MetricPoint& p : frontier) {
    if (p.worst >= worst && !(p.average <= best)) best = p.average;
  }
  return best;
}

double RelativeRegret(double metric, double reference) {
  if (!(reference > 0.0)) throw std::invalid_argument("reference must be positive");
  return 100.0 * (metric - reference) / reference;
}

}  // namespace rmt
