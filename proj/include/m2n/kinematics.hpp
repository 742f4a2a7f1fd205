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
#include <string>
#include <vector>

#include "m2n/geometry.hpp"

namespace m2n::kin {

enum class JointKind { kRevolute, kPrismatic };

/// One serial-chain joint. `origin` places the joint frame in the parent
/// frame (the previous joint's moved frame, or the arm root for the first
/// joint); the joint then rotates about / translates along `axis`, which is
/// expressed in the joint frame and must have unit norm.
struct JointSpec {
  JointKind kind = JointKind::kRevolute;
  Eigen::Vector3d axis{Eigen::Vector3d::UnitZ()};
  Eigen::Isometry3d origin{Eigen::Isometry3d::Identity()};
  double lower = -M_PI;
  double upper = M_PI;
};

/// Serial chain. `base_mount` maps arm-root coordinates into the robot base
/// frame; `tool` maps the last joint's moved frame to the end effector.
struct KinematicChain {
  std::vector<JointSpec> joints;
  Eigen::Isometry3d base_mount{Eigen::Isometry3d::Identity()};
  Eigen::Isometry3d tool{Eigen::Isometry3d::Identity()};

  int dof() const { return static_cast<int>(joints.size()); }

  /// Throws std::invalid_argument if the chain violates its invariants
  /// (empty, non-unit axis, inverted limits).
  void validate() const;

  /// Upper bound on end-effector distance from the arm root, from link
  /// geometry and prismatic travel. Used only to skip hopeless IK targets.
  double reach_upper_bound() const;

  Eigen::VectorXd clamp_to_limits(const Eigen::VectorXd& q) const;
};

using JointConfig = Eigen::VectorXd;

struct IkOptions {
  double damping = 1e-2;          // initial DLS lambda, adapted per step
  int max_iterations = 200;
  double position_tolerance = 1e-4;      // meters
  double orientation_weight = 0.0;       // 0 = position-only IK
  double orientation_tolerance = 1e-3;   // radians, used when weighted
  double max_step = 0.5;                 // per-iteration |dq| cap
};

struct IkResult {
  bool success = false;
  JointConfig q;
  double position_residual = 0.0;
  double orientation_residual = 0.0;
  int iterations = 0;
};

/// End-effector pose in the arm-root frame. Throws std::invalid_argument on
/// joint-count mismatch.
Pose3 forward_kinematics(const KinematicChain& chain, const JointConfig& q);

/// Geometric Jacobian at the end effector, arm-root frame. Rows 0..2 are the
/// linear-velocity sensitivity, rows 3..5 angular.
Eigen::Matrix<double, 6, Eigen::Dynamic> jacobian(const KinematicChain& chain,
                                                  const JointConfig& q);

/// Damped-least-squares IK toward `target` (arm-root frame). Non-convergence
/// is reported through IkResult::success, never by exception; that failure is
/// the environment's infeasibility signal.
IkResult solve_ik(const KinematicChain& chain, const Pose3& target,
                  const JointConfig& seed, const IkOptions& opts = {});

enum class ManipMode { kFull, kPositionOnly };

/// sqrt(det(J J^T)) for an arbitrary Jacobian block.
double manipulability_of(const Eigen::MatrixXd& j);

/// Manipulability w = sqrt(det(J_m J_m^T)), with J_m the full 6xn Jacobian or
/// its 3xn position rows. Zero exactly at singular configurations.
double manipulability(const KinematicChain& chain, const JointConfig& q,
                      ManipMode mode = ManipMode::kPositionOnly);

/// Planar 2R test chain: two z-axis revolute joints with link lengths l1, l2
/// carried by the second joint's origin and the tool transform.
KinematicChain planar_2r(double l1, double l2);

}  // namespace m2n::kin
