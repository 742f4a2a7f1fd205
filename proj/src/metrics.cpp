// Copyright 2026 The m2nav Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "m2n/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace m2n::metrics {

namespace {

std::vector<EpisodeRecord> sorted_by_step(std::vector<EpisodeRecord> episodes) {
  std::stable_sort(episodes.begin(), episodes.end(),
                   [](const EpisodeRecord& a, const EpisodeRecord& b) {
                     return a.end_step < b.end_step;
                   });
  return episodes;
}

template <typename ValueFn>
Curve windowed_curve(const std::vector<EpisodeRecord>& unordered, int window,
                     ValueFn value) {
  if (window <= 0) throw std::invalid_argument("window must be positive");
  const std::vector<EpisodeRecord> episodes = sorted_by_step(unordered);
  Curve curve;
  curve.reserve(episodes.size());
  double running = 0.0;
  for (std::size_t i = 0; i < episodes.size(); ++i) {
    running += value(episodes[i]);
    if (i >= static_cast<std::size_t>(window)) {
      running -= value(episodes[i - window]);
    }
    const int n = static_cast<int>(std::min<std::size_t>(i + 1, window));
    curve.emplace_back(episodes[i].end_step, running / n);
  }
  return curve;
}

}  // namespace

Curve success_rate_curve(const std::vector<EpisodeRecord>& episodes, int window) {
  return windowed_curve(episodes, window,
                        [](const EpisodeRecord& e) { return e.success ? 1.0 : 0.0; });
}

Curve move_distance_curve(const std::vector<EpisodeRecord>& episodes, int window) {
  return windowed_curve(episodes, window,
                        [](const EpisodeRecord& e) { return e.move_distance; });
}

std::optional<std::int64_t> steps_to_threshold(
    const std::vector<EpisodeRecord>& unordered, int window, double threshold) {
  if (window <= 0) throw std::invalid_argument("window must be positive");
  if (unordered.size() < static_cast<std::size_t>(window)) return std::nullopt;
  const std::vector<EpisodeRecord> episodes = sorted_by_step(unordered);
  int successes = 0;
  for (std::size_t i = 0; i < episodes.size(); ++i) {
    successes += episodes[i].success ? 1 : 0;
    if (i >= static_cast<std::size_t>(window)) {
      successes -= episodes[i - window].success ? 1 : 0;
    }
    if (i + 1 >= static_cast<std::size_t>(window) &&
        static_cast<double>(successes) / window >= threshold) {
      return episodes[i].end_step;
    }
  }
  return std::nullopt;
}

double mean_of(const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("mean of empty set");
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

double sample_std(const std::vector<double>& values) {
  if (values.size() < 2) return 0.0;
  const double m = mean_of(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

std::vector<CurvePoint> aggregate_curves(const std::vector<Curve>& per_seed,
                                         std::int64_t bin_width,
                                         std::int64_t max_step) {
  if (bin_width <= 0) throw std::invalid_argument("bin_width must be positive");
  std::vector<CurvePoint> out;
  for (std::int64_t edge = bin_width; edge <= max_step; edge += bin_width) {
    std::vector<double> vals;
    for (const Curve& curve : per_seed) {
      // Last observed value at or before the bin edge.
      const double* last = nullptr;
      for (const auto& [step, v] : curve) {
        if (step > edge) break;
        last = &v;
      }
      if (last) vals.push_back(*last);
    }
    if (vals.empty()) continue;
    CurvePoint p;
    p.step = edge;
    p.mean = mean_of(vals);
    p.stderr_mean = sample_std(vals) / std::sqrt(static_cast<double>(vals.size()));
    p.count = static_cast<int>(vals.size());
    out.push_back(p);
  }
  return out;
}

}  // namespace m2n::metrics
