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

#include <cmath>

#include "doctest.h"
#include "m2n/kinematics.hpp"
#include "test_helpers.hpp"

namespace m2n {
namespace {

using kin::JointKind;
using kin::KinematicChain;
using testutil::make_arm6;
using testutil::make_random_chain;
using testutil::random_config;

// ---------------------------------------------------------------------------
// Reference implementations. These are written against the math, not the
// library: plain 4x4 matrices, Rodrigues' formula spelled out, orientation
// derivatives extracted from finite-differenced rotation matrices. They share
// no code with src/kinematics.cpp beyond Eigen itself.

Eigen::Matrix3d rodrigues(const Eigen::Vector3d& axis, double angle) {
  Eigen::Matrix3d k;
  k << 0, -axis.z(), axis.y(),
       axis.z(), 0, -axis.x(),
       -axis.y(), axis.x(), 0;
  return Eigen::Matrix3d::Identity() + std::sin(angle) * k +
         (1.0 - std::cos(angle)) * k * k;
}

Eigen::Matrix4d oracle_fk(const KinematicChain& chain, const Eigen::VectorXd& q) {
  Eigen::Matrix4d t = Eigen::Matrix4d::Identity();
  for (int i = 0; i < chain.dof(); ++i) {
    const auto& j = chain.joints[i];
    Eigen::Matrix4d motion = Eigen::Matrix4d::Identity();
    if (j.kind == JointKind::kRevolute) {
      motion.topLeftCorner<3, 3>() = rodrigues(j.axis, q[i]);
    } else {
      motion.topRightCorner<3, 1>() = q[i] * j.axis;
    }
    t = t * j.origin.matrix() * motion;
  }
  return t * chain.tool.matrix();
}

// Central finite differences of the forward map. Linear rows come from the
// position directly; angular rows from the skew part of dR * R^T.
Eigen::MatrixXd fd_jacobian(const KinematicChain& chain, const Eigen::VectorXd& q,
                            double h) {
  const int n = chain.dof();
  Eigen::MatrixXd jac(6, n);
  const Eigen::Matrix3d r0 = oracle_fk(chain, q).topLeftCorner<3, 3>();
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd qp = q, qm = q;
    qp[i] += h;
    qm[i] -= h;
    const Eigen::Matrix4d tp = oracle_fk(chain, qp);
    const Eigen::Matrix4d tm = oracle_fk(chain, qm);
    jac.col(i).head<3>() =
        (tp.topRightCorner<3, 1>() - tm.topRightCorner<3, 1>()) / (2.0 * h);
    const Eigen::Matrix3d dr =
        (tp.topLeftCorner<3, 3>() - tm.topLeftCorner<3, 3>()) / (2.0 * h);
    const Eigen::Matrix3d w = dr * r0.transpose();
    jac.col(i).tail<3>() = Eigen::Vector3d(w(2, 1), w(0, 2), w(1, 0));
  }
  return jac;
}

double svd_manipulability(const Eigen::MatrixXd& j) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(j);
  double w = 1.0;
  for (int i = 0; i < svd.singularValues().size(); ++i) {
    w *= svd.singularValues()[i];
  }
  // Fewer columns than rows means JJ^T is rank deficient by construction.
  if (j.cols() < j.rows()) w = 0.0;
  return w;
}

}  // namespace

TEST_SUITE("kinematics") {

TEST_CASE("planar 2R forward kinematics matches closed form") {
  const auto chain = kin::planar_2r(1.0, 1.0);

  Eigen::VectorXd q(2);
  q << 0.0, 0.0;
  auto pose = kin::forward_kinematics(chain, q);
  CHECK(pose.position.isApprox(Eigen::Vector3d(2, 0, 0), 1e-12));

  q << M_PI / 2, 0.0;
  pose = kin::forward_kinematics(chain, q);
  CHECK((pose.position - Eigen::Vector3d(0, 2, 0)).norm() < 1e-12);

  // General closed form x = l1 c1 + l2 c12, y = l1 s1 + l2 s12.
  Rng rng(31);
  for (int i = 0; i < 200; ++i) {
    const double q1 = rng.uniform(-3, 3), q2 = rng.uniform(-3, 3);
    q << q1, q2;
    pose = kin::forward_kinematics(chain, q);
    const Eigen::Vector3d want(std::cos(q1) + std::cos(q1 + q2),
                               std::sin(q1) + std::sin(q1 + q2), 0.0);
    CHECK((pose.position - want).norm() < 1e-12);
  }
}

TEST_CASE("forward kinematics equals independent transform composition") {
  Rng rng(101);
  for (int trial = 0; trial < 100; ++trial) {
    const auto chain = make_random_chain(rng);
    const auto q = random_config(chain, rng);
    const auto pose = kin::forward_kinematics(chain, q);
    const Eigen::Matrix4d want = oracle_fk(chain, q);
    CHECK((pose.position - want.topRightCorner<3, 1>()).norm() < 1e-12);
    CHECK((pose.orientation.toRotationMatrix() - want.topLeftCorner<3, 3>())
              .cwiseAbs()
              .maxCoeff() < 1e-12);
  }
}

TEST_CASE("forward kinematics is deterministic") {
  Rng rng(7);
  const auto chain = make_random_chain(rng);
  const auto q = random_config(chain, rng);
  const auto a = kin::forward_kinematics(chain, q);
  const auto b = kin::forward_kinematics(chain, q);
  CHECK(a.position == b.position);
  CHECK(a.orientation.coeffs() == b.orientation.coeffs());
}

TEST_CASE("forward kinematics rejects joint count mismatch") {
  const auto chain = kin::planar_2r(1.0, 1.0);
  Eigen::VectorXd q(3);
  q.setZero();
  CHECK_THROWS_AS(kin::forward_kinematics(chain, q), std::invalid_argument);
  CHECK_THROWS_AS(kin::jacobian(chain, q), std::invalid_argument);
}

TEST_CASE("jacobian of a unit lever about z") {
  KinematicChain chain;
  chain.joints.push_back({});  // revolute about z at the origin
  chain.tool = make_transform({1, 0, 0}, {0, 0, 0});
  Eigen::VectorXd q(1);
  q << 0.0;
  const auto jac = kin::jacobian(chain, q);
  CHECK((jac.col(0).head<3>() - Eigen::Vector3d(0, 1, 0)).norm() < 1e-15);
  CHECK((jac.col(0).tail<3>() - Eigen::Vector3d(0, 0, 1)).norm() < 1e-15);
}

TEST_CASE("planar 2R jacobian block determinant") {
  const auto chain = kin::planar_2r(1.0, 1.0);
  Eigen::VectorXd q(2);
  q << 0.0, M_PI / 2;
  const Eigen::Matrix2d block = kin::jacobian(chain, q).topRows(2);
  CHECK(block.determinant() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("jacobian matches central finite differences") {
  Rng rng(202);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto chain = make_random_chain(rng);
    const auto q = random_config(chain, rng);
    const auto jac = kin::jacobian(chain, q);
    const auto ref = fd_jacobian(chain, q, 1e-6);
    worst = std::max(worst, (jac - ref).cwiseAbs().maxCoeff());
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("planar 2R manipulability closed form over a q grid") {
  const auto chain = kin::planar_2r(1.0, 1.0);
  // The chain lives in the xy plane, so the in-plane block is the 2xn
  // position rows.
  int checked = 0;
  for (int i = 0; i < 40; ++i) {
    for (int j = 0; j < 25; ++j) {
      Eigen::VectorXd q(2);
      q << -3.0 + 6.0 * i / 39.0, -3.0 + 6.0 * j / 24.0;
      const double w = kin::manipulability_of(kin::jacobian(chain, q).topRows(2));
      CHECK(std::abs(w - std::abs(std::sin(q[1]))) <= 1e-9);
      ++checked;
    }
  }
  CHECK(checked == 1000);
}

TEST_CASE("manipulability equals product of singular values") {
  Rng rng(303);
  for (int trial = 0; trial < 100; ++trial) {
    const auto chain = make_random_chain(rng);
    const auto q = random_config(chain, rng);
    const auto jac = kin::jacobian(chain, q);

    const double w3 = kin::manipulability(chain, q, kin::ManipMode::kPositionOnly);
    const double ref3 = svd_manipulability(jac.topRows(3));
    CHECK(std::abs(w3 - ref3) <= 1e-9 * std::max(1.0, std::abs(ref3)));

    const double w6 = kin::manipulability(chain, q, kin::ManipMode::kFull);
    const double ref6 = svd_manipulability(jac);
    CHECK(std::abs(w6 - ref6) <= 1e-9 * std::max(1.0, std::abs(ref6)));
  }
}

TEST_CASE("manipulability vanishes exactly at singular configurations") {
  const auto chain = kin::planar_2r(1.0, 1.0);
  Eigen::VectorXd q(2);
  q << 0.7, 0.0;  // fully stretched
  CHECK(kin::manipulability_of(kin::jacobian(chain, q).topRows(2)) ==
        doctest::Approx(0.0));

  // Rank deficiency (SVD threshold 1e-10) must coincide with w = 0.
  Rng rng(404);
  for (int trial = 0; trial < 50; ++trial) {
    const auto c = make_random_chain(rng);
    const auto qq = random_config(c, rng);
    const auto jac = kin::jacobian(c, qq).topRows(3);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac);
    const bool deficient = svd.singularValues().minCoeff() < 1e-10 ||
                           jac.cols() < jac.rows();
    const double w = kin::manipulability_of(jac);
    if (deficient) {
      CHECK(w < 1e-6);  // sqrt of a numerically-zero determinant
    } else {
      CHECK(w > 0.0);
    }
  }
}

TEST_CASE("ik reaches the planar full-extension target") {
  const auto chain = kin::planar_2r(1.0, 1.0);
  Eigen::VectorXd seed(2);
  seed << 0.1, 0.1;
  Pose3 target;
  target.position = {2.0, 0.0, 0.0};
  const auto res = kin::solve_ik(chain, target, seed);
  REQUIRE(res.success);
  CHECK(res.position_residual <= 1e-4);
  const auto reached = kin::forward_kinematics(chain, res.q);
  CHECK((reached.position - target.position).norm() <= 1e-4);
  CHECK(std::abs(res.q[0]) < 0.05);
  CHECK(std::abs(res.q[1]) < 0.05);
}

TEST_CASE("ik fails cleanly beyond the workspace") {
  const auto chain = kin::planar_2r(1.0, 1.0);
  Eigen::VectorXd seed(2);
  seed << 0.1, 0.1;
  Pose3 target;
  target.position = {3.0, 0.0, 0.0};
  const auto res = kin::solve_ik(chain, target, seed);
  CHECK_FALSE(res.success);
  CHECK(res.position_residual > 0.5);
}

TEST_CASE("ik round trip on reachable targets") {
  const auto chain = make_arm6();
  Rng rng(505);
  int solved = 0;
  const int trials = 1000;
  for (int trial = 0; trial < trials; ++trial) {
    const auto q_star = random_config(chain, rng);
    Pose3 target = kin::forward_kinematics(chain, q_star);
    Eigen::VectorXd seed = q_star;
    for (int i = 0; i < seed.size(); ++i) seed[i] += rng.uniform(-0.1, 0.1);
    seed = chain.clamp_to_limits(seed);

    const auto res = kin::solve_ik(chain, target, seed);
    if (res.success) {
      ++solved;
      // No silent bad successes: re-verify the residual independently.
      const auto reached = kin::forward_kinematics(chain, res.q);
      CHECK((reached.position - target.position).norm() <= 1e-4);
      for (int i = 0; i < chain.dof(); ++i) {
        CHECK(res.q[i] >= chain.joints[i].lower);
        CHECK(res.q[i] <= chain.joints[i].upper);
      }
    }
  }
  CHECK(solved >= trials * 95 / 100);
}

TEST_CASE("ik is deterministic for a fixed seed configuration") {
  const auto chain = make_arm6();
  Rng rng(606);
  const auto q_star = random_config(chain, rng);
  const Pose3 target = kin::forward_kinematics(chain, q_star);
  Eigen::VectorXd seed = Eigen::VectorXd::Zero(chain.dof());
  const auto a = kin::solve_ik(chain, target, seed);
  const auto b = kin::solve_ik(chain, target, seed);
  CHECK(a.success == b.success);
  CHECK(a.q == b.q);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("chain validation rejects malformed chains") {
  KinematicChain empty;
  CHECK_THROWS_AS(empty.validate(), std::invalid_argument);

  auto bad_axis = kin::planar_2r(1.0, 1.0);
  bad_axis.joints[0].axis = {0, 0, 2};
  CHECK_THROWS_AS(bad_axis.validate(), std::invalid_argument);

  auto bad_limits = kin::planar_2r(1.0, 1.0);
  bad_limits.joints[1].lower = 1.0;
  bad_limits.joints[1].upper = -1.0;
  CHECK_THROWS_AS(bad_limits.validate(), std::invalid_argument);

  CHECK_NOTHROW(make_arm6().validate());
}

TEST_CASE("limit clamping and the reach upper bound") {
  const auto chain = make_arm6();
  Eigen::VectorXd q(6);
  q << 10, -10, 0, 1, 0.5, -4;
  const auto clamped = chain.clamp_to_limits(q);
  for (int i = 0; i < 6; ++i) {
    CHECK(clamped[i] >= chain.joints[i].lower);
    CHECK(clamped[i] <= chain.joints[i].upper);
  }
  CHECK(clamped[2] == 0.0);

  const double bound = chain.reach_upper_bound();
  Rng rng(707);
  for (int i = 0; i < 200; ++i) {
    const auto qq = random_config(chain, rng, 0.0);
    CHECK(kin::forward_kinematics(chain, qq).position.norm() <= bound + 1e-12);
  }
}

}  // TEST_SUITE

}  // namespace m2n
