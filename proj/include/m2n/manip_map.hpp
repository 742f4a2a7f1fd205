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

#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "m2n/action_grid.hpp"
#include "m2n/camera.hpp"
#include "m2n/kinematics.hpp"

namespace m2n::map {

/// Per-cell manipulability over a base-frame grid of candidate end-effector
/// positions. Cells where every IK attempt failed carry kInfeasible; a stored
/// 0 is a genuine singular score, not a gap.
struct WorkspaceMap {
  static constexpr double kInfeasible = -1.0;

  Eigen::Vector3d grid_origin{Eigen::Vector3d::Zero()};
  double cell_size = 0.0;
  int nx = 0, ny = 0, nz = 0;
  std::vector<double> scores;  // row-major: ((ix * ny) + iy) * nz + iz

  int cell_count() const { return nx * ny * nz; }

  Eigen::Vector3d cell_center(int ix, int iy, int iz) const {
    return grid_origin +
           cell_size * Eigen::Vector3d(ix + 0.5, iy + 0.5, iz + 0.5);
  }

  double score_at(int ix, int iy, int iz) const {
    return scores[(static_cast<size_t>(ix) * ny + iy) * nz + iz];
  }

  bool feasible(int ix, int iy, int iz) const {
    return score_at(ix, iy, iz) != kInfeasible;
  }

  int feasible_count() const;
};

struct MapBuildOptions {
  int samples_per_cell = 4;
  std::uint64_t seed = 0;
  kin::IkOptions ik{.damping = 1e-2, .max_iterations = 100,
                    .position_tolerance = 1e-4};
  kin::ManipMode mode = kin::ManipMode::kPositionOnly;
  int workers = 1;  // cells are merged by index, so parallelism is invisible
};

/// Axis-aligned sampling region in the robot base frame.
struct Region {
  Eigen::Vector3d lo{Eigen::Vector3d::Zero()};
  Eigen::Vector3d hi{Eigen::Vector3d::Zero()};
};

/// Sweep the region cell by cell: IK from `samples_per_cell` random in-limit
/// seeds, keep the best manipulability among successes. Deterministic for a
/// fixed seed regardless of worker count.
WorkspaceMap build_workspace_map(const kin::KinematicChain& chain,
                                 const Region& region, double cell_size,
                                 const MapBuildOptions& opts = {});

/// Image-space behavior prior p(a | robot configuration).
struct PixelPrior {
  ActionGrid grid;
  std::vector<double> probs;          // sums to 1 within 1e-9
  std::vector<std::uint8_t> support;  // 1 where a feasible cell projected
  double floor = 0.0;                 // the epsilon added to every bin

  double prob_at(int bin) const {
    if (bin < 0 || bin >= static_cast<int>(probs.size())) {
      throw std::invalid_argument("prior bin out of range");
    }
    return probs[bin];
  }
};

/// Raised when not a single feasible cell lands inside the image; callers
/// fall back to a uniform prior.
struct EmptyPriorError : std::runtime_error {
  EmptyPriorError() : std::runtime_error("no feasible workspace cell projects into view") {}
};

/// Project feasible cells through the camera standing at `base`, take the max
/// projected score per bin, normalize supported bins to 1 - floor*B and add
/// the uniform floor so every bin stays strictly positive.
PixelPrior project_to_pixel_prior(const WorkspaceMap& map,
                                  const cam::CameraModel& camera,
                                  const BasePose& base, double base_height,
                                  const ActionGrid& grid, double prob_floor);

/// Uniform prior over all bins (the fallback for EmptyPriorError).
PixelPrior uniform_prior(const ActionGrid& grid);

}  // namespace m2n::map
