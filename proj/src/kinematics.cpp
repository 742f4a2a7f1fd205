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

#include "m2n/kinematics.hpp"

#include <stdexcept>

namespace m2n::kin {

namespace {

Eigen::Isometry3d joint_motion(const JointSpec& j, double q) {
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  if (j.kind == JointKind::kRevolute) {
    t.linear() = Eigen::AngleAxisd(q, j.axis).toRotationMatrix();
  } else {
    t.translation() = q * j.axis;
  }
  return t;
}

void check_config(const KinematicChain& chain, const JointConfig& q) {
  if (q.size() != chain.dof()) {
    throw std::invalid_argument("joint config has " + std::to_string(q.size()) +
                                " values, chain has " +
                                std::to_string(chain.dof()) + " joints");
  }
}

}  // namespace

void KinematicChain::validate() const {
  if (joints.empty()) throw std::invalid_argument("chain has no joints");
  for (size_t i = 0; i < joints.size(); ++i) {
    const auto& j = joints[i];
    if (std::abs(j.axis.norm() - 1.0) > 1e-9) {
      throw std::invalid_argument("joint " + std::to_string(i) +
                                  " axis is not unit length");
    }
    if (j.lower > j.upper) {
      throw std::invalid_argument("joint " + std::to_string(i) +
                                  " limits are inverted");
    }
  }
}

double KinematicChain::reach_upper_bound() const {
  double r = tool.translation().norm();
  for (const auto& j : joints) {
    r += j.origin.translation().norm();
    if (j.kind == JointKind::kPrismatic) {
      r += std::max(std::abs(j.lower), std::abs(j.upper));
    }
  }
  return r;
}

Eigen::VectorXd KinematicChain::clamp_to_limits(const Eigen::VectorXd& q) const {
  Eigen::VectorXd out = q;
  for (int i = 0; i < dof(); ++i) {
    out[i] = std::clamp(out[i], joints[i].lower, joints[i].upper);
  }
  return out;
}

Pose3 forward_kinematics(const KinematicChain& chain, const JointConfig& q) {
  check_config(chain, q);
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  for (int i = 0; i < chain.dof(); ++i) {
    t = t * chain.joints[i].origin * joint_motion(chain.joints[i], q[i]);
  }
  return Pose3::from_isometry(t * chain.tool);
}

Eigen::Matrix<double, 6, Eigen::Dynamic> jacobian(const KinematicChain& chain,
                                                  const JointConfig& q) {
  check_config(chain, q);
  const int n = chain.dof();
  Eigen::Matrix<double, 6, Eigen::Dynamic> jac(6, n);

  // One forward pass collecting each joint's axis direction and origin in the
  // arm-root frame.
  std::vector<Eigen::Vector3d> axes(n), origins(n);
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  for (int i = 0; i < n; ++i) {
    t = t * chain.joints[i].origin;
    axes[i] = t.linear() * chain.joints[i].axis;
    origins[i] = t.translation();
    t = t * joint_motion(chain.joints[i], q[i]);
  }
  const Eigen::Vector3d p_ee = (t * chain.tool).translation();

  for (int i = 0; i < n; ++i) {
    if (chain.joints[i].kind == JointKind::kRevolute) {
      jac.col(i).head<3>() = axes[i].cross(p_ee - origins[i]);
      jac.col(i).tail<3>() = axes[i];
    } else {
      jac.col(i).head<3>() = axes[i];
      jac.col(i).tail<3>().setZero();
    }
  }
  return jac;
}

IkResult solve_ik(const KinematicChain& chain, const Pose3& target,
                  const JointConfig& seed, const IkOptions& opts) {
  check_config(chain, seed);
  const bool with_orientation = opts.orientation_weight > 0.0;

  IkResult res;
  res.q = chain.clamp_to_limits(seed);

  // Damped least squares with an adaptive lambda: a step that does not shrink
  // the weighted error is rejected and retried with heavier damping. Fixed
  // damping stalls right at stretch singularities, which are exactly the
  // configurations the base-advance sweep has to probe.
  double lambda = opts.damping;
  const auto weighted_error = [&](const Pose3& pose, Eigen::Vector3d* e_pos,
                                  Eigen::Vector3d* e_rot) {
    *e_pos = target.position - pose.position;
    double err_sq = e_pos->squaredNorm();
    if (with_orientation) {
      *e_rot = orientation_error(target.orientation, pose.orientation);
      const double w = opts.orientation_weight;
      err_sq += w * w * e_rot->squaredNorm();
    } else {
      e_rot->setZero();
    }
    return err_sq;
  };

  Pose3 pose = forward_kinematics(chain, res.q);
  Eigen::Vector3d e_pos, e_rot;
  double err_sq = weighted_error(pose, &e_pos, &e_rot);

  for (int iter = 0; iter <= opts.max_iterations; ++iter) {
    res.position_residual = e_pos.norm();
    if (with_orientation) res.orientation_residual = e_rot.norm();
    res.iterations = iter;

    const bool pos_ok = res.position_residual <= opts.position_tolerance;
    const bool rot_ok =
        !with_orientation || res.orientation_residual <= opts.orientation_tolerance;
    if (pos_ok && rot_ok) {
      res.success = true;
      return res;
    }
    if (iter == opts.max_iterations) break;

    const auto jac6 = jacobian(chain, res.q);
    Eigen::MatrixXd j;
    Eigen::VectorXd e;
    if (with_orientation) {
      j.resize(6, chain.dof());
      j.topRows(3) = jac6.topRows(3);
      j.bottomRows(3) = opts.orientation_weight * jac6.bottomRows(3);
      e.resize(6);
      e.head<3>() = e_pos;
      e.tail<3>() = opts.orientation_weight * e_rot;
    } else {
      j = jac6.topRows(3);
      e = e_pos;
    }

    // dq = J^T (J J^T + lambda^2 I)^-1 e
    Eigen::MatrixXd jjt = j * j.transpose();
    jjt.diagonal().array() += lambda * lambda;
    Eigen::VectorXd dq = j.transpose() * jjt.ldlt().solve(e);

    const double step = dq.norm();
    if (step > opts.max_step) dq *= opts.max_step / step;

    const JointConfig q_try = chain.clamp_to_limits(res.q + dq);
    const Pose3 pose_try = forward_kinematics(chain, q_try);
    Eigen::Vector3d e_pos_try, e_rot_try;
    const double err_try = weighted_error(pose_try, &e_pos_try, &e_rot_try);
    if (err_try <= err_sq) {
      res.q = q_try;
      pose = pose_try;
      e_pos = e_pos_try;
      e_rot = e_rot_try;
      err_sq = err_try;
      lambda = std::max(opts.damping, 0.5 * lambda);
    } else {
      lambda = std::min(1e6, 10.0 * lambda);
    }
  }
  res.success = false;
  return res;
}

double manipulability_of(const Eigen::MatrixXd& j) {
  // sqrt(det(J J^T)) as the product of singular values. Forming the Gram
  // matrix first would square the rounding error, which matters right at the
  // singular configurations where this measure is most interesting.
  if (j.rows() > j.cols()) return 0.0;
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(j);
  double w = 1.0;
  for (int i = 0; i < svd.singularValues().size(); ++i) {
    w *= svd.singularValues()[i];
  }
  return w;
}

double manipulability(const KinematicChain& chain, const JointConfig& q,
                      ManipMode mode) {
  const auto jac6 = jacobian(chain, q);
  if (mode == ManipMode::kFull) return manipulability_of(jac6);
  return manipulability_of(jac6.topRows(3));
}

KinematicChain planar_2r(double l1, double l2) {
  KinematicChain chain;
  JointSpec j1;
  j1.axis = Eigen::Vector3d::UnitZ();
  chain.joints.push_back(j1);
  JointSpec j2;
  j2.axis = Eigen::Vector3d::UnitZ();
  j2.origin = make_transform({l1, 0, 0}, {0, 0, 0});
  chain.joints.push_back(j2);
  chain.tool = make_transform({l2, 0, 0}, {0, 0, 0});
  return chain;
}

}  // namespace m2n::kin
