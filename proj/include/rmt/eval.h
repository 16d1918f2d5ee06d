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

#ifndef RMT_EVAL_H_
#define RMT_EVAL_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace rmt {

struct Provenance {
  std::string run_id;
  std::int64_t step = 0;

  friend auto operator<=>(const Provenance&, const Provenance&) = default;
};

// Average and worst-case value of a per-task metric.
struct MetricPoint {
  double average = 0.0;
  double worst = 0.0;
  Provenance provenance;

  friend bool operator==(const MetricPoint&, const MetricPoint&) = default;
};

// average = mean; worst = min if higher_is_better else max.
// Throws std::invalid_argument on empty input.
MetricPoint Aggregate(std::span<const double> per_task, bool higher_is_better,
                      Provenance provenance = {});

// True when a is at least as good as b in both coordinates and strictly better
// in one (larger is better).
bool Dominates(const MetricPoint& a, const MetricPoint& b);

// Non-dominated subset, ordered by decreasing average. Of exact duplicates only
// the one with the smallest provenance is kept.
std::vector<MetricPoint> ParetoFrontier(std::span<const MetricPoint> points);

// Best average among frontier points whose worst value is >= `worst`; NaN if
// none reaches that level.
double FrontierAverageAt(std::span<const MetricPoint> frontier, double worst);

// 100 * (metric - reference) / reference. Throws if reference <= 0.
double RelativeRegret(double metric, double reference);

}  // namespace rmt

#endif  // RMT_EVAL_H_
