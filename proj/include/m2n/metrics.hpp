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

#ifndef M2N_METRICS_HPP_
#define M2N_METRICS_HPP_

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace m2n::metrics {

struct EpisodeRecord {
  int episode = 0;
  std::int64_t end_step = 0;  // global environment step at episode end
  bool success = false;
  double move_distance = 0.0;  // 0 when the episode failed
  double reward = 0.0;         // undiscounted episode return
};

// One point of a cross-seed curve: mean and standard error over seeds.
struct CurvePoint {
  std::int64_t step = 0;
  double mean = 0.0;
  double stderr_mean = 0.0;
  int count = 0;
};

using Curve = std::vector<std::pair<std::int64_t, double>>;

// Trailing-window success fraction, one point per episode end. Points before
// the window fills use the partial window.
Curve success_rate_curve(const std::vector<EpisodeRecord>& episodes, int window);

// Trailing-window mean of move distance over all episodes (failures count 0).
Curve move_distance_curve(const std::vector<EpisodeRecord>& episodes, int window);

// First global step at which a full trailing window meets the threshold.
// Partial windows never qualify.
std::optional<std::int64_t> steps_to_threshold(
    const std::vector<EpisodeRecord>& episodes, int window, double threshold);

// Resamples per-seed curves onto shared step bins (carrying the last value
// forward) and reports mean with standard error (sample std over sqrt(n)).
std::vector<CurvePoint> aggregate_curves(const std::vector<Curve>& per_seed,
                                         std::int64_t bin_width,
                                         std::int64_t max_step);

double mean_of(const std::vector<double>& values);
double sample_std(const std::vector<double>& values);

}  // namespace m2n::metrics

#endif  // M2N_METRICS_HPP_
