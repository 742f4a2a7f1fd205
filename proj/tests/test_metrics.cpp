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

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "m2n/metrics.hpp"

namespace m2n {
namespace {

using metrics::Curve;
using metrics::EpisodeRecord;

EpisodeRecord rec(int episode, std::int64_t end_step, bool success,
                  double move = 0.0) {
  EpisodeRecord r;
  r.episode = episode;
  r.end_step = end_step;
  r.success = success;
  r.move_distance = move;
  return r;
}

/// Reference trailing-window mean computed the slow way: re-sort, then
/// average the last up-to-`window` values at every index.
std::vector<double> brute_window_means(std::vector<EpisodeRecord> eps,
                                       int window, bool use_move) {
  std::stable_sort(eps.begin(), eps.end(),
                   [](const EpisodeRecord& a, const EpisodeRecord& b) {
                     return a.end_step < b.end_step;
                   });
  std::vector<double> out;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    const std::size_t lo = i + 1 >= static_cast<std::size_t>(window)
                               ? i + 1 - window
                               : 0;
    double s = 0.0;
    for (std::size_t j = lo; j <= i; ++j) {
      s += use_move ? eps[j].move_distance : (eps[j].success ? 1.0 : 0.0);
    }
    out.push_back(s / static_cast<double>(i - lo + 1));
  }
  return out;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("mean and sample standard deviation") {
  const std::vector<double> v = {0.0, 0.25, 0.5, 0.75, 1.0};
  CHECK(metrics::mean_of(v) == doctest::Approx(0.5).epsilon(1e-15));

  // Two-pass reference: sum of squared deviations over n - 1.
  double ss = 0.0;
  for (double x : v) ss += (x - 0.5) * (x - 0.5);
  const double want = std::sqrt(ss / 4.0);
  CHECK(metrics::sample_std(v) == doctest::Approx(want).epsilon(1e-15));
  CHECK(want == doctest::Approx(std::sqrt(0.15625)).epsilon(1e-15));

  CHECK_THROWS_AS(metrics::mean_of({}), std::invalid_argument);
  CHECK(metrics::sample_std({}) == 0.0);
  CHECK(metrics::sample_std({3.0}) == 0.0);
  CHECK(metrics::sample_std({2.0, 2.0, 2.0}) == 0.0);
}

TEST_CASE("success curve over alternating outcomes") {
  std::vector<EpisodeRecord> eps;
  for (int i = 0; i < 8; ++i) eps.push_back(rec(i, 3 * (i + 1), i % 2 == 0));

  const Curve c = metrics::success_rate_curve(eps, 2);
  REQUIRE(c.size() == 8);
  CHECK(c[0].first == 3);
  CHECK(c[0].second == 1.0);  // partial window of one
  for (std::size_t i = 1; i < c.size(); ++i) {
    CHECK(c[i].first == 3 * static_cast<std::int64_t>(i + 1));
    CHECK(c[i].second == doctest::Approx(0.5).epsilon(1e-15));
  }
}

TEST_CASE("curves use partial windows but threshold detection does not") {
  std::vector<EpisodeRecord> eps = {rec(0, 5, true), rec(1, 9, true),
                                    rec(2, 14, true)};
  const Curve c = metrics::success_rate_curve(eps, 5);
  REQUIRE(c.size() == 3);
  for (const auto& [step, v] : c) CHECK(v == 1.0);
  CHECK_FALSE(metrics::steps_to_threshold(eps, 5, 0.8).has_value());
  CHECK_FALSE(metrics::steps_to_threshold({}, 5, 0.8).has_value());
}

TEST_CASE("threshold crossing happens at the first qualifying window") {
  // Four failures then successes; window 4 at 0.75 first holds when three of
  // the last four succeeded.
  std::vector<EpisodeRecord> eps;
  for (int i = 0; i < 8; ++i) eps.push_back(rec(i, 10 * (i + 1), i >= 4));
  const auto at = metrics::steps_to_threshold(eps, 4, 0.75);
  REQUIRE(at.has_value());
  CHECK(*at == 70);  // episode index 6, end_step 70

  // Inclusive comparison: exactly meeting the threshold counts.
  const auto exact = metrics::steps_to_threshold(eps, 4, 1.0);
  REQUIRE(exact.has_value());
  CHECK(*exact == 80);

  std::vector<EpisodeRecord> all;
  for (int i = 0; i < 6; ++i) all.push_back(rec(i, 7 * (i + 1), true));
  const auto first_full = metrics::steps_to_threshold(all, 4, 1.0);
  REQUIRE(first_full.has_value());
  CHECK(*first_full == 28);  // the window first fills at episode 3

  CHECK_FALSE(metrics::steps_to_threshold(eps, 4, 1.01).has_value());
  CHECK_THROWS_AS(metrics::steps_to_threshold(eps, 0, 0.5), std::invalid_argument);
}

TEST_CASE("record order does not matter") {
  std::vector<EpisodeRecord> eps;
  std::mt19937 gen(99);
  std::bernoulli_distribution coin(0.6);
  std::uniform_real_distribution<double> move(0.0, 2.0);
  for (int i = 0; i < 60; ++i) {
    const bool s = coin(gen);
    eps.push_back(rec(i, 4 * (i + 1), s, s ? move(gen) : 0.0));
  }
  std::vector<EpisodeRecord> shuffled = eps;
  std::shuffle(shuffled.begin(), shuffled.end(), gen);

  CHECK(metrics::success_rate_curve(eps, 7) ==
        metrics::success_rate_curve(shuffled, 7));
  CHECK(metrics::move_distance_curve(eps, 7) ==
        metrics::move_distance_curve(shuffled, 7));
  CHECK(metrics::steps_to_threshold(eps, 7, 0.6) ==
        metrics::steps_to_threshold(shuffled, 7, 0.6));

  // And both agree with the brute-force window means.
  const auto want_s = brute_window_means(eps, 7, false);
  const auto want_m = brute_window_means(eps, 7, true);
  const Curve got_s = metrics::success_rate_curve(shuffled, 7);
  const Curve got_m = metrics::move_distance_curve(shuffled, 7);
  REQUIRE(got_s.size() == want_s.size());
  for (std::size_t i = 0; i < want_s.size(); ++i) {
    CHECK(got_s[i].second == doctest::Approx(want_s[i]).epsilon(1e-12));
    CHECK(got_m[i].second == doctest::Approx(want_m[i]).epsilon(1e-12));
  }
}

TEST_CASE("move distance curve counts failures as zero") {
  std::vector<EpisodeRecord> eps = {rec(0, 1, true, 2.0), rec(1, 2, false, 0.0),
                                    rec(2, 3, true, 4.0)};
  const Curve c = metrics::move_distance_curve(eps, 3);
  REQUIRE(c.size() == 3);
  CHECK(c[0].second == doctest::Approx(2.0));
  CHECK(c[1].second == doctest::Approx(1.0));
  CHECK(c[2].second == doctest::Approx(2.0));
  CHECK_THROWS_AS(metrics::move_distance_curve(eps, 0), std::invalid_argument);
}

TEST_CASE("aggregation carries the last value onto each bin edge") {
  const Curve a = {{5, 1.0}, {15, 3.0}};
  const Curve b = {{10, 2.0}};
  const Curve late = {{25, 9.0}};  // no data before step 25

  const auto pts = metrics::aggregate_curves({a, b, late}, 10, 30);
  REQUIRE(pts.size() == 3);

  CHECK(pts[0].step == 10);
  CHECK(pts[0].count == 2);
  CHECK(pts[0].mean == doctest::Approx(1.5).epsilon(1e-15));
  // stderr = sample std / sqrt(n) with n = 2.
  CHECK(pts[0].stderr_mean ==
        doctest::Approx(std::sqrt(0.5) / std::sqrt(2.0)).epsilon(1e-12));

  CHECK(pts[1].step == 20);
  CHECK(pts[1].count == 2);
  CHECK(pts[1].mean == doctest::Approx(2.5).epsilon(1e-15));

  CHECK(pts[2].step == 30);
  CHECK(pts[2].count == 3);
  CHECK(pts[2].mean == doctest::Approx((3.0 + 2.0 + 9.0) / 3).epsilon(1e-15));

  // Identical seeds collapse the spread to zero.
  const auto same = metrics::aggregate_curves({a, a, a}, 10, 20);
  for (const auto& p : same) CHECK(p.stderr_mean == 0.0);

  CHECK(metrics::aggregate_curves({}, 10, 100).empty());
  CHECK(metrics::aggregate_curves({Curve{}}, 10, 100).empty());
  CHECK_THROWS_AS(metrics::aggregate_curves({a}, 0, 100), std::invalid_argument);
}

}  // TEST_SUITE

}  // namespace m2n
