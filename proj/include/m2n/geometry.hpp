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

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <cmath>

namespace m2n {

/// Rigid pose: position in meters plus unit quaternion orientation.
struct Pose3 {
  Eigen::Vector3d position{Eigen::Vector3d::Zero()};
  Eigen::Quaterniond orientation{Eigen::Quaterniond::Identity()};

  Eigen::Isometry3d isometry() const {
    Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
    t.linear() = orientation.toRotationMatrix();
    t.translation() = position;
    return t;
  }

  static Pose3 from_isometry(const Eigen::Isometry3d& t) {
    Pose3 p;
    p.position = t.translation();
    p.orientation = Eigen::Quaterniond(t.linear()).normalized();
    return p;
  }
};

/// Planar base placement. yaw is normalized to (-pi, pi].
struct BasePose {
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;
};

inline double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * M_PI);
  if (a <= -M_PI) a += 2.0 * M_PI;
  return a;
}

/// Extrinsic xyz convention: R = Rz(yaw) * Ry(pitch) * Rx(roll).
inline Eigen::Matrix3d rpy_to_matrix(double roll, double pitch, double yaw) {
  return (Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()) *
          Eigen::AngleAxisd(pitch, Eigen::Vector3d::UnitY()) *
          Eigen::AngleAxisd(roll, Eigen::Vector3d::UnitX()))
      .toRotationMatrix();
}

inline Eigen::Isometry3d make_transform(const Eigen::Vector3d& xyz,
                                        const Eigen::Vector3d& rpy) {
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  t.linear() = rpy_to_matrix(rpy.x(), rpy.y(), rpy.z());
  t.translation() = xyz;
  return t;
}

/// World pose of the base frame: z is the configured body height.
inline Eigen::Isometry3d base_to_world(const BasePose& base, double base_height) {
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  t.linear() = Eigen::AngleAxisd(base.yaw, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  t.translation() = Eigen::Vector3d(base.x, base.y, base_height);
  return t;
}

/// Rotation-vector (axis * angle) of the rotation carrying `from` onto `to`.
inline Eigen::Vector3d orientation_error(const Eigen::Quaterniond& to,
                                         const Eigen::Quaterniond& from) {
  Eigen::Quaterniond dq = to * from.conjugate();
  if (dq.w() < 0) dq.coeffs() *= -1.0;
  Eigen::AngleAxisd aa(dq);
  return aa.axis() * aa.angle();
}

}  // namespace m2n
