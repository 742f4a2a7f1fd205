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

#include <array>
#include <cstdint>
#include <vector>

#include "m2n/camera.hpp"
#include "m2n/kinematics.hpp"
#include "m2n/observation.hpp"

namespace m2n::sim {

/// Axis-aligned box in world coordinates.
struct SceneObject {
  std::uint8_t id = 0;  // unique, > 0 (0 is sky)
  ObjectClass class_tag = ObjectClass::kNone;
  Eigen::Vector3d center{Eigen::Vector3d::Zero()};
  Eigen::Vector3d half{Eigen::Vector3d::Zero()};
  std::array<std::uint8_t, 3> color{128, 128, 128};

  Eigen::Vector3d lo() const { return center - half; }
  Eigen::Vector3d hi() const { return center + half; }

  /// Signed-ish surface distance used by the depth-consistency checks:
  /// 0 on the surface, positive outside, negative inside.
  double surface_distance(const Eigen::Vector3d& p) const;
};

struct DoorState {
  double displacement = 0.0;      // delta, meters along +y
  double max_displacement = 0.0;  // delta_max
  bool held = false;
};

struct WorldScene {
  std::vector<SceneObject> objects;
  BasePose base;
  double base_height = 0.5;
  kin::KinematicChain chain;
  kin::JointConfig q;
  cam::CameraModel camera;  // extrinsics follow `base` at render time

  const SceneObject* find_class(ObjectClass tag) const;
  SceneObject* find_class(ObjectClass tag);
};

/// Z-buffered box rasterization: per pixel, the nearest slab intersection
/// wins; misses are sky (id 0, infinite depth). Deterministic.
Observation render_observation(const WorldScene& scene);

/// Pixel width of the bounding box of DOOR-id pixels; 0 when none visible.
int door_visible_length(const Observation& obs);

}  // namespace m2n::sim
