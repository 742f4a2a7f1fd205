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

#include <numeric>

#include "doctest.h"
#include "m2n/manip_map.hpp"
#include "test_helpers.hpp"

namespace m2n {
namespace {

using map::MapBuildOptions;
using map::Region;
using map::WorkspaceMap;
using testutil::make_arm6;
using testutil::make_desk_camera;

/// Spatial 3R arm (yaw + two pitch links of 0.5 m): the smallest chain whose
/// positional manipulability is generically nonzero, so boundary decay is
/// observable.
kin::KinematicChain make_arm3() {
  kin::KinematicChain c;
  kin::JointSpec j1;
  j1.axis = Eigen::Vector3d::UnitZ();
  kin::JointSpec j2;
  j2.axis = Eigen::Vector3d::UnitY();
  kin::JointSpec j3;
  j3.axis = Eigen::Vector3d::UnitY();
  j3.origin = make_transform({0.5, 0, 0}, {0, 0, 0});
  c.joints = {j1, j2, j3};
  c.tool = make_transform({0.5, 0, 0}, {0, 0, 0});
  return c;
}

WorkspaceMap small_arm6_map(int workers, std::uint64_t seed) {
  Region region;
  region.lo = {0.3, -0.6, 0.4};
  region.hi = {1.1, 0.6, 1.0};
  MapBuildOptions opts;
  opts.samples_per_cell = 3;
  opts.seed = seed;
  opts.workers = workers;
  return map::build_workspace_map(make_arm6(), region, 0.15, opts);
}

/// Replays the projection of every feasible cell, reproducing the raw per-bin
/// max scores and support flags independently of the library's bookkeeping.
void replay_projection(const WorkspaceMap& wmap, const cam::CameraModel& camera,
                       const BasePose& base, double base_height,
                       const ActionGrid& grid, std::vector<double>* raw,
                       std::vector<std::uint8_t>* support) {
  raw->assign(grid.bin_count(), 0.0);
  support->assign(grid.bin_count(), 0);
  const auto cam_here = cam::with_base_pose(camera, base, base_height);
  const auto base_tf = base_to_world(base, base_height);
  for (int ix = 0; ix < wmap.nx; ++ix) {
    for (int iy = 0; iy < wmap.ny; ++iy) {
      for (int iz = 0; iz < wmap.nz; ++iz) {
        const double s = wmap.score_at(ix, iy, iz);
        if (s == WorkspaceMap::kInfeasible) continue;
        const auto hit =
            cam::project(cam_here, base_tf * wmap.cell_center(ix, iy, iz));
        if (!hit) continue;
        const int b = grid.bin_of_pixel(hit->u, hit->v);
        (*raw)[b] = std::max((*raw)[b], s);
        (*support)[b] = 1;
      }
    }
  }
}

}  // namespace

TEST_SUITE("manip_map") {

TEST_CASE("map rebuild with the same seed is bitwise identical") {
  const auto a = small_arm6_map(1, 9);
  const auto b = small_arm6_map(1, 9);
  CHECK(a.scores == b.scores);
}

TEST_CASE("worker count does not change the map") {
  const auto serial = small_arm6_map(1, 9);
  const auto parallel = small_arm6_map(4, 9);
  REQUIRE(serial.scores.size() == parallel.scores.size());
  CHECK(serial.scores == parallel.scores);
}

TEST_CASE("different seeds may change scores but not feasibility structure much") {
  const auto a = small_arm6_map(1, 9);
  const auto b = small_arm6_map(1, 10);
  CHECK(a.scores != b.scores);  // different IK seeds, different best scores
}

TEST_CASE("unreachable region is all sentinel") {
  Region region;
  region.lo = {3.0, -0.2, 0.0};
  region.hi = {3.6, 0.2, 0.4};
  MapBuildOptions opts;
  opts.samples_per_cell = 2;
  const auto wmap = map::build_workspace_map(make_arm6(), region, 0.2, opts);
  CHECK(wmap.feasible_count() == 0);
  for (double s : wmap.scores) CHECK(s == WorkspaceMap::kInfeasible);
}

TEST_CASE("scores decay toward the reach boundary") {
  // 3R arm, reach exactly 1.0; one row of cells along +x at z=0.
  Region region;
  region.lo = {0.0, -0.05, -0.05};
  region.hi = {1.2, 0.05, 0.05};
  MapBuildOptions opts;
  opts.samples_per_cell = 6;
  opts.seed = 4;
  const auto wmap = map::build_workspace_map(make_arm3(), region, 0.1, opts);
  REQUIRE(wmap.nx == 12);
  REQUIRE(wmap.ny == 1);
  REQUIRE(wmap.nz == 1);

  // Beyond-reach cells (centers at 1.05 and 1.15) are sentinel.
  CHECK(wmap.score_at(10, 0, 0) == WorkspaceMap::kInfeasible);
  CHECK(wmap.score_at(11, 0, 0) == WorkspaceMap::kInfeasible);

  // Mid-workspace beats the near-boundary cell at x = 0.95.
  const double boundary = wmap.score_at(9, 0, 0);
  REQUIRE(boundary != WorkspaceMap::kInfeasible);
  double mid = 0.0;
  for (int ix = 4; ix <= 7; ++ix) {
    REQUIRE(wmap.feasible(ix, 0, 0));
    mid = std::max(mid, wmap.score_at(ix, 0, 0));
  }
  CHECK(mid > boundary);
  // The cell keeps the best sample found inside it, so the last feasible
  // cell still scores a good fraction of mid-workspace; it just cannot win.
  CHECK(boundary < 0.8 * mid);
}

TEST_CASE("feasible scores are never the sentinel and never negative") {
  const auto wmap = small_arm6_map(1, 9);
  CHECK(wmap.feasible_count() > 0);
  for (double s : wmap.scores) {
    if (s != WorkspaceMap::kInfeasible) CHECK(s >= 0.0);
  }
}

TEST_CASE("map rejects degenerate regions") {
  Region flat;
  flat.lo = {0.0, 0.0, 0.0};
  flat.hi = {1.0, 0.0, 1.0};
  CHECK_THROWS_AS(map::build_workspace_map(make_arm6(), flat, 0.1, {}),
                  std::invalid_argument);
  Region inverted;
  inverted.lo = {1.0, 0.0, 0.0};
  inverted.hi = {0.0, 0.5, 1.0};
  CHECK_THROWS_AS(map::build_workspace_map(make_arm6(), inverted, 0.1, {}),
                  std::invalid_argument);
  Region fine;
  fine.lo = {0.4, -0.1, 0.4};
  fine.hi = {0.8, 0.1, 0.8};
  CHECK_THROWS_AS(map::build_workspace_map(make_arm6(), fine, 0.0, {}),
                  std::invalid_argument);
}

TEST_CASE("hand-built map normalizes proportionally") {
  // Three feasible cells, one bin each, raw scores 1, 1, 2.
  WorkspaceMap wmap;
  wmap.grid_origin = {1.25, -0.3, 0.2};
  wmap.cell_size = 0.2;
  wmap.nx = 1;
  wmap.ny = 3;
  wmap.nz = 1;
  wmap.scores = {1.0, 1.0, 2.0};

  const auto grid = ActionGrid::make(128, 96, 4);
  const auto prior = map::project_to_pixel_prior(wmap, make_desk_camera(),
                                                 BasePose{}, 0.5, grid, 0.0);

  std::vector<double> got;
  int supported = 0;
  for (int b = 0; b < grid.bin_count(); ++b) {
    if (prior.support[b]) {
      ++supported;
      got.push_back(prior.probs[b]);
    } else {
      CHECK(prior.probs[b] == 0.0);
    }
  }
  REQUIRE(supported == 3);
  std::sort(got.begin(), got.end());
  CHECK(got[0] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(got[1] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(got[2] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("all-singular supported cells spread evenly") {
  WorkspaceMap wmap;
  wmap.grid_origin = {1.25, -0.3, 0.2};
  wmap.cell_size = 0.2;
  wmap.nx = 1;
  wmap.ny = 3;
  wmap.nz = 1;
  wmap.scores = {0.0, 0.0, 0.0};  // feasible but singular everywhere

  const auto grid = ActionGrid::make(128, 96, 4);
  const auto prior = map::project_to_pixel_prior(wmap, make_desk_camera(),
                                                 BasePose{}, 0.5, grid, 0.0);
  int supported = 0;
  for (int b = 0; b < grid.bin_count(); ++b) {
    if (prior.support[b]) {
      ++supported;
      CHECK(prior.probs[b] == doctest::Approx(1.0 / 3).epsilon(1e-12));
    }
  }
  CHECK(supported == 3);
}

TEST_CASE("prior over a real map: sum, floor, monotonicity, support") {
  const auto wmap = small_arm6_map(1, 9);
  const auto camera = make_desk_camera();
  const auto grid = ActionGrid::make(128, 96, 4);
  const double floor = 1e-4;
  const BasePose base{0, 0, 0};
  const auto prior = map::project_to_pixel_prior(wmap, camera, base, 0.5, grid, floor);

  const double sum = std::accumulate(prior.probs.begin(), prior.probs.end(), 0.0);
  CHECK(std::abs(sum - 1.0) <= 1e-9);
  CHECK(prior.floor == floor);

  std::vector<double> raw;
  std::vector<std::uint8_t> support;
  replay_projection(wmap, camera, base, 0.5, grid, &raw, &support);
  REQUIRE(prior.support == support);

  int supported = 0;
  for (int b = 0; b < grid.bin_count(); ++b) {
    CHECK(prior.probs[b] >= floor);
    if (!prior.support[b]) {
      // Floor-only mass on unsupported bins.
      CHECK(prior.probs[b] == floor);
    } else {
      ++supported;
    }
  }
  CHECK(supported > 0);

  // Raw-score order carries over to probabilities on supported bins.
  for (int a = 0; a < grid.bin_count(); ++a) {
    if (!support[a]) continue;
    for (int b = a + 1; b < grid.bin_count(); ++b) {
      if (!support[b]) continue;
      if (raw[a] > raw[b]) {
        CHECK(prior.probs[a] > prior.probs[b]);
      } else if (raw[a] == raw[b]) {
        CHECK(prior.probs[a] == doctest::Approx(prior.probs[b]).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("prior lookup bounds") {
  const auto grid = ActionGrid::make(64, 48, 4);
  const auto prior = map::uniform_prior(grid);
  CHECK(prior.prob_at(0) == doctest::Approx(1.0 / grid.bin_count()));
  CHECK_THROWS_AS(prior.prob_at(-1), std::invalid_argument);
  CHECK_THROWS_AS(prior.prob_at(grid.bin_count()), std::invalid_argument);
}

TEST_CASE("uniform prior fallback") {
  const auto grid = ActionGrid::make(128, 96, 4);
  const auto prior = map::uniform_prior(grid);
  const double sum = std::accumulate(prior.probs.begin(), prior.probs.end(), 0.0);
  CHECK(std::abs(sum - 1.0) <= 1e-9);
  for (int b = 0; b < grid.bin_count(); ++b) {
    CHECK(prior.probs[b] == doctest::Approx(1.0 / grid.bin_count()));
    CHECK(prior.support[b] == 0);
  }
}

TEST_CASE("nothing in view raises the empty-prior error") {
  // Single feasible cell straight above the base, outside the forward frustum.
  WorkspaceMap wmap;
  wmap.grid_origin = {-0.05, -0.05, 0.45};
  wmap.cell_size = 0.1;
  wmap.nx = 1;
  wmap.ny = 1;
  wmap.nz = 1;
  wmap.scores = {1.0};
  const auto grid = ActionGrid::make(128, 96, 4);
  CHECK_THROWS_AS(map::project_to_pixel_prior(wmap, make_desk_camera(),
                                              BasePose{}, 0.5, grid, 1e-4),
                  map::EmptyPriorError);
}

TEST_CASE("prior rejects an impossible floor") {
  WorkspaceMap wmap;
  wmap.grid_origin = {1.25, -0.3, 0.2};
  wmap.cell_size = 0.2;
  wmap.nx = 1;
  wmap.ny = 3;
  wmap.nz = 1;
  wmap.scores = {1.0, 1.0, 2.0};
  const auto grid = ActionGrid::make(128, 96, 4);
  CHECK_THROWS_AS(map::project_to_pixel_prior(wmap, make_desk_camera(),
                                              BasePose{}, 0.5, grid, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(map::project_to_pixel_prior(wmap, make_desk_camera(),
                                              BasePose{}, 0.5, grid, -1e-4),
                  std::invalid_argument);
}

}  // TEST_SUITE

}  // namespace m2n
