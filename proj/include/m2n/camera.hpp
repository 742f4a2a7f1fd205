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

#include <optional>

#include "m2n/geometry.hpp"

namespace m2n::cam {

struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  void validate() const;
};

/// World-to-camera map: p_cam = rotation * p_world + translation.
struct CameraExtrinsics {
  Eigen::Matrix3d rotation{Eigen::Matrix3d::Identity()};
  Eigen::Vector3d translation{Eigen::Vector3d::Zero()};

  void validate() const;

  Eigen::Isometry3d isometry() const {
    Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
    t.linear() = rotation;
    t.translation() = translation;
    return t;
  }
};

/// Pinhole camera. Camera frame uses the usual CV axes: +z along the optical
/// axis, +x right, +y down. `mount` is the camera pose expressed in the robot
/// base frame (where the lens sits and which way it points).
struct CameraModel {
  CameraIntrinsics intrinsics;
  CameraExtrinsics extrinsics;
  Eigen::Isometry3d mount{Eigen::Isometry3d::Identity()};
};

struct PixelHit {
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;  // camera-frame z, meters
};

/// [R|t] then K. Out-of-view (depth <= 0 or pixel outside
/// [0,width)x[0,height)) is a value, not an error.
std::optional<PixelHit> project(const CameraModel& cam,
                                const Eigen::Vector3d& p_world);

/// Depth-assisted inverse of project. Throws std::invalid_argument when
/// depth <= 0.
Eigen::Vector3d backproject(const CameraModel& cam, double u, double v,
                            double depth);

/// Copy of `cam` with extrinsics recomputed for the base standing at `base`:
/// world -> base -> camera through the fixed mount.
CameraModel with_base_pose(const CameraModel& cam, const BasePose& base,
                           double base_height);

}  // namespace m2n::cam
