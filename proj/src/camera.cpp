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

#include "m2n/camera.hpp"

#include <stdexcept>

namespace m2n::cam {

void CameraIntrinsics::validate() const {
  if (fx <= 0 || fy <= 0) throw std::invalid_argument("focal lengths must be positive");
  if (width <= 0 || height <= 0) throw std::invalid_argument("image size must be positive");
  if (cx < 0 || cx >= width || cy < 0 || cy >= height) {
    throw std::invalid_argument("principal point outside the image");
  }
}

void CameraExtrinsics::validate() const {
  if ((rotation.transpose() * rotation - Eigen::Matrix3d::Identity()).norm() > 1e-9) {
    throw std::invalid_argument("extrinsic rotation is not orthonormal");
  }
  if (std::abs(rotation.determinant() - 1.0) > 1e-9) {
    throw std::invalid_argument("extrinsic rotation is not proper");
  }
}

std::optional<PixelHit> project(const CameraModel& cam,
                                const Eigen::Vector3d& p_world) {
  const Eigen::Vector3d p_cam =
      cam.extrinsics.rotation * p_world + cam.extrinsics.translation;
  if (p_cam.z() <= 0.0) return std::nullopt;
  PixelHit hit;
  hit.u = cam.intrinsics.fx * p_cam.x() / p_cam.z() + cam.intrinsics.cx;
  hit.v = cam.intrinsics.fy * p_cam.y() / p_cam.z() + cam.intrinsics.cy;
  hit.depth = p_cam.z();
  if (hit.u < 0 || hit.u >= cam.intrinsics.width || hit.v < 0 ||
      hit.v >= cam.intrinsics.height) {
    return std::nullopt;
  }
  return hit;
}

Eigen::Vector3d backproject(const CameraModel& cam, double u, double v,
                            double depth) {
  if (depth <= 0.0) throw std::invalid_argument("backproject requires depth > 0");
  const Eigen::Vector3d p_cam(
      (u - cam.intrinsics.cx) * depth / cam.intrinsics.fx,
      (v - cam.intrinsics.cy) * depth / cam.intrinsics.fy, depth);
  return cam.extrinsics.rotation.transpose() *
         (p_cam - cam.extrinsics.translation);
}

CameraModel with_base_pose(const CameraModel& cam, const BasePose& base,
                           double base_height) {
  CameraModel out = cam;
  const Eigen::Isometry3d world_to_cam =
      (base_to_world(base, base_height) * cam.mount).inverse();
  out.extrinsics.rotation = world_to_cam.linear();
  out.extrinsics.translation = world_to_cam.translation();
  return out;
}

}  // namespace m2n::cam
