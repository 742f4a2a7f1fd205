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

#include "m2n/manip_map.hpp"

#include <atomic>
#include <cmath>
#include <thread>

#include "m2n/rng.hpp"

namespace m2n::map {

int WorkspaceMap::feasible_count() const {
  int n = 0;
  for (double s : scores) n += (s != kInfeasible) ? 1 : 0;
  return n;
}

namespace {

double score_cell(const kin::KinematicChain& chain,
                  const Eigen::Vector3d& center_base,
                  const MapBuildOptions& opts, double reach_bound,
                  std::uint64_t cell_seed) {
  // IK solves in the arm-root frame.
  const Eigen::Vector3d target_root = chain.base_mount.inverse() * center_base;
  if (target_root.norm() > reach_bound + opts.ik.position_tolerance) {
    return WorkspaceMap::kInfeasible;
  }

  Pose3 target;
  target.position = target_root;

  Rng rng(derive_seed(opts.seed, cell_seed));
  double best = WorkspaceMap::kInfeasible;
  for (int s = 0; s < opts.samples_per_cell; ++s) {
    Eigen::VectorXd seed(chain.dof());
    for (int i = 0; i < chain.dof(); ++i) {
      seed[i] = rng.uniform(chain.joints[i].lower, chain.joints[i].upper);
    }
    const auto res = kin::solve_ik(chain, target, seed, opts.ik);
    if (!res.success) continue;
    best = std::max(best, kin::manipulability(chain, res.q, opts.mode));
  }
  return best;
}

}  // namespace

WorkspaceMap build_workspace_map(const kin::KinematicChain& chain,
                                 const Region& region, double cell_size,
                                 const MapBuildOptions& opts) {
  if (cell_size <= 0) throw std::invalid_argument("cell_size must be positive");
  const Eigen::Vector3d extent = region.hi - region.lo;
  if ((extent.array() <= 0).any()) {
    throw std::invalid_argument("workspace region is empty");
  }
  chain.validate();

  WorkspaceMap map;
  map.grid_origin = region.lo;
  map.cell_size = cell_size;
  map.nx = static_cast<int>(std::ceil(extent.x() / cell_size));
  map.ny = static_cast<int>(std::ceil(extent.y() / cell_size));
  map.nz = static_cast<int>(std::ceil(extent.z() / cell_size));
  map.scores.assign(map.cell_count(), WorkspaceMap::kInfeasible);

  const double reach_bound = chain.reach_upper_bound();
  const int total = map.cell_count();

  auto run_range = [&](int begin, int end) {
    for (int idx = begin; idx < end; ++idx) {
      const int iz = idx % map.nz;
      const int iy = (idx / map.nz) % map.ny;
      const int ix = idx / (map.nz * map.ny);
      map.scores[idx] = score_cell(chain, map.cell_center(ix, iy, iz), opts,
                                   reach_bound, static_cast<std::uint64_t>(idx));
    }
  };

  const int workers = std::max(1, opts.workers);
  if (workers == 1) {
    run_range(0, total);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (total + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const int begin = w * chunk;
      const int end = std::min(total, begin + chunk);
      if (begin < end) pool.emplace_back(run_range, begin, end);
    }
    for (auto& t : pool) t.join();
  }
  return map;
}

PixelPrior project_to_pixel_prior(const WorkspaceMap& map,
                                  const cam::CameraModel& camera,
                                  const BasePose& base, double base_height,
                                  const ActionGrid& grid, double prob_floor) {
  const int bins = grid.bin_count();
  if (prob_floor < 0 || prob_floor * bins >= 1.0) {
    throw std::invalid_argument("probability floor must satisfy 0 <= floor < 1/bins");
  }

  const cam::CameraModel cam_here = cam::with_base_pose(camera, base, base_height);
  const Eigen::Isometry3d base_tf = base_to_world(base, base_height);

  std::vector<double> raw(bins, 0.0);
  std::vector<std::uint8_t> support(bins, 0);
  for (int ix = 0; ix < map.nx; ++ix) {
    for (int iy = 0; iy < map.ny; ++iy) {
      for (int iz = 0; iz < map.nz; ++iz) {
        const double score = map.score_at(ix, iy, iz);
        if (score == WorkspaceMap::kInfeasible) continue;
        const auto hit = cam::project(cam_here, base_tf * map.cell_center(ix, iy, iz));
        if (!hit) continue;
        const int bin = grid.bin_of_pixel(hit->u, hit->v);
        raw[bin] = std::max(raw[bin], score);
        support[bin] = 1;
      }
    }
  }

  int supported = 0;
  double total = 0.0;
  for (int b = 0; b < bins; ++b) {
    if (support[b]) {
      ++supported;
      total += raw[b];
    }
  }
  if (supported == 0) throw EmptyPriorError();

  PixelPrior prior;
  prior.grid = grid;
  prior.floor = prob_floor;
  prior.support = std::move(support);
  prior.probs.assign(bins, prob_floor);
  const double mass = 1.0 - prob_floor * bins;
  for (int b = 0; b < bins; ++b) {
    if (!prior.support[b]) continue;
    // All-zero raw scores (every supported cell singular) spread evenly.
    prior.probs[b] += total > 0.0 ? mass * raw[b] / total : mass / supported;
  }
  return prior;
}

PixelPrior uniform_prior(const ActionGrid& grid) {
  PixelPrior prior;
  prior.grid = grid;
  prior.floor = 0.0;
  prior.probs.assign(grid.bin_count(), 1.0 / grid.bin_count());
  prior.support.assign(grid.bin_count(), 0);  // nothing actually projected
  return prior;
}

}  // namespace m2n::map
