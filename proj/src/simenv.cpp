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

#include "m2n/simenv.hpp"

#include <stdexcept>

namespace m2n::sim {

double compute_reward(const StepOutcome& o, const RewardWeights& w,
                      double d_stab) {
  const double r_ik = o.ik_failed ? -1.0 : 0.0;
  double r_balance = 0.0;
  if (o.hand_horizontal_distance) {
    const double h = *o.hand_horizontal_distance;
    r_balance = -std::min(1.0, std::max(0.0, (h - d_stab) / d_stab));
  }
  const double r_arm = o.arm_success ? 1.0 : 0.0;
  const double r_move = o.reach ? o.move_distance : 0.0;
  return w.w1 * r_ik + w.w2 * r_balance + w.w3 * r_arm + w.w4 * r_move;
}

namespace {

// Deterministic IK seed ladder: the current pose first (continuity), then the
// limit midpoint and two bent variants.
bool solve_with_restarts(const kin::KinematicChain& chain, const Pose3& target,
                         const kin::JointConfig& current,
                         const kin::IkOptions& opts, kin::JointConfig* out) {
  const int n = chain.dof();
  Eigen::VectorXd mid(n), up(n), down(n);
  for (int i = 0; i < n; ++i) {
    mid[i] = 0.5 * (chain.joints[i].lower + chain.joints[i].upper);
    up[i] = mid[i] + 0.4 * (chain.joints[i].upper - mid[i]);
    down[i] = mid[i] - 0.4 * (mid[i] - chain.joints[i].lower);
  }
  for (const Eigen::VectorXd& seed : {current, mid, up, down}) {
    const auto res = kin::solve_ik(chain, target, seed, opts);
    if (res.success) {
      *out = res.q;
      return true;
    }
  }
  // Folded rearward/overhead targets often defeat the structured seeds above;
  // a fixed fan of scattered seeds covers the remaining solution branches.
  // The Rng seed is a constant so the solve stays a pure function of
  // (chain, target, current).
  Rng rng(0x5eedf00d);
  for (int s = 0; s < 12; ++s) {
    Eigen::VectorXd q(n);
    for (int i = 0; i < n; ++i) {
      q[i] = rng.uniform(chain.joints[i].lower, chain.joints[i].upper);
    }
    const auto res = kin::solve_ik(chain, target, q, opts);
    if (res.success) {
      *out = res.q;
      return true;
    }
  }
  return false;
}

Eigen::Vector3d world_to_root(const WorldScene& scene,
                              const Eigen::Vector3d& p_world) {
  const Eigen::Isometry3d base_tf = base_to_world(scene.base, scene.base_height);
  return scene.chain.base_mount.inverse() * (base_tf.inverse() * p_world);
}

}  // namespace

double base_advance_sweep(const WorldScene& scene,
                          const Eigen::Vector3d& hand_world,
                          const TaskConfig& cfg, double step_size) {
  kin::IkOptions opts = cfg.ik;
  opts.orientation_weight = 0.0;  // translational feasibility only
  // The frontier stop sits near a stretch singularity where the solver
  // converges slowly; a shallow budget turns solver noise into a ragged
  // sweep boundary that depends on step_size.
  opts.max_iterations = std::max(opts.max_iterations, 400);

  WorldScene probe = scene;
  kin::JointConfig q = scene.q;
  const double fx = std::cos(scene.base.yaw);
  const double fy = std::sin(scene.base.yaw);

  double reached = 0.0;
  bool first = true;
  for (double d = 0.0; d <= cfg.d_corridor + 1e-12; d += step_size) {
    probe.base.x = scene.base.x + d * fx;
    probe.base.y = scene.base.y + d * fy;
    Pose3 target;
    target.position = world_to_root(probe, hand_world);
    if (!solve_with_restarts(probe.chain, target, q, opts, &q)) {
      return first ? 0.0 : reached;
    }
    reached = std::min(d, cfg.d_corridor);
    first = false;
  }
  return reached;
}

Env::Env(TaskConfig cfg, kin::KinematicChain chain, cam::CameraModel camera)
    : cfg_(std::move(cfg)) {
  chain.validate();
  camera.intrinsics.validate();
  scene_.chain = std::move(chain);
  scene_.camera = std::move(camera);
  scene_.base_height = cfg_.base_height;
  const int n = scene_.chain.dof();
  home_q_.resize(n);
  for (int i = 0; i < n; ++i) {
    home_q_[i] = 0.5 * (scene_.chain.joints[i].lower + scene_.chain.joints[i].upper);
  }
}

ActionGrid Env::action_grid() const {
  return ActionGrid::make(scene_.camera.intrinsics.width,
                          scene_.camera.intrinsics.height, cfg_.action_stride);
}

void Env::build_scene(Rng& rng) {
  scene_.objects.clear();

  SceneObject floor;
  floor.id = 1;
  floor.class_tag = ObjectClass::kFloor;
  floor.center = {2.0, 0.0, -0.05};
  floor.half = {4.0, 3.0, 0.05};
  floor.color = {92, 96, 102};
  scene_.objects.push_back(floor);

  if (cfg_.task == Task::kReach) {
    const auto& g = cfg_.reach;
    SceneObject table;
    table.id = 2;
    table.class_tag = ObjectClass::kTable;
    table.center = g.table_center;
    table.half = g.table_half;
    table.color = {140, 96, 54};
    scene_.objects.push_back(table);

    SceneObject panel;
    panel.id = 3;
    panel.class_tag = ObjectClass::kTarget;
    panel.center = g.panel_center;
    panel.center.y() += rng.uniform(-g.rand_y, g.rand_y);
    panel.center.z() += rng.uniform(-g.rand_z, g.rand_z);
    panel.half = g.panel_half;
    panel.color = {44, 200, 70};
    scene_.objects.push_back(panel);
  } else {
    const auto& g = cfg_.door;
    const double wall_len_half = 1.10;
    SceneObject wall_l;
    wall_l.id = 2;
    wall_l.class_tag = ObjectClass::kWall;
    wall_l.center = {g.wall_x, -(g.gap_half_width + wall_len_half), 0.75};
    wall_l.half = {0.05, wall_len_half, 0.75};
    wall_l.color = {182, 176, 160};
    scene_.objects.push_back(wall_l);

    SceneObject wall_r = wall_l;
    wall_r.id = 3;
    wall_r.center.y() = g.gap_half_width + wall_len_half;
    scene_.objects.push_back(wall_r);

    SceneObject door;
    door.id = 4;
    door.class_tag = ObjectClass::kDoor;
    door.center = {g.door_x, 0.0, g.door_z};
    door.half = g.door_half;
    door.color = {120, 120, 126};
    scene_.objects.push_back(door);

    door_closed_edge_y_ = door.center.y() - door.half.y();
    door_ = DoorState{0.0, g.max_displacement, false};
  }
}

void Env::apply_door_displacement(double delta) {
  auto* door = scene_.find_class(ObjectClass::kDoor);
  if (door) door->center.y() = delta;  // closed center is y = 0
}

const Observation& Env::reset(std::uint64_t seed) {
  Rng rng(seed);
  scene_.base = BasePose{0.0, 0.0, 0.0};
  scene_.q = home_q_;
  build_scene(rng);
  steps_ = 0;
  episode_done_ = false;
  obs_ = render_observation(scene_);
  if (cfg_.task == Task::kDoor) {
    closed_door_width_px_ = door_visible_length(obs_);
  }
  return obs_;
}

StepResult Env::step(int action_bin) {
  if (episode_done_) throw std::logic_error("step() called on a finished episode");
  const ActionGrid grid = action_grid();
  int u = 0, v = 0;
  grid.bin_center(action_bin, &u, &v);

  const auto cam_here =
      cam::with_base_pose(scene_.camera, scene_.base, scene_.base_height);

  StepOutcome outcome;
  bool door_held_now = false;
  double door_delta = 0.0;
  Eigen::Vector3d hand_world = Eigen::Vector3d::Zero();

  const double depth = obs_.depth[obs_.index(u, v)];
  if (!std::isfinite(depth)) {
    outcome.ik_failed = true;  // sky has no 3-D target
  } else {
    // The renderer casts through pixel centers, so the same half-pixel offset
    // reproduces the surface point exactly.
    const Eigen::Vector3d target =
        cam::backproject(cam_here, u + 0.5, v + 0.5, depth);
    outcome.hand_horizontal_distance =
        std::hypot(target.x() - scene_.base.x, target.y() - scene_.base.y);

    Pose3 ik_target;
    ik_target.position = world_to_root(scene_, target);
    kin::JointConfig solution;
    kin::IkOptions opts = cfg_.ik;
    opts.orientation_weight = 0.0;
    if (!solve_with_restarts(scene_.chain, ik_target, scene_.q, opts, &solution)) {
      outcome.ik_failed = true;
    } else {
      scene_.q = solution;
      hand_world = base_to_world(scene_.base, scene_.base_height) *
                   (scene_.chain.base_mount *
                    kin::forward_kinematics(scene_.chain, scene_.q).position);

      if (cfg_.task == Task::kReach) {
        const auto* panel = scene_.find_class(ObjectClass::kTarget);
        // Width/height only: the panel's y-z rectangle, depth excluded.
        outcome.arm_success =
            std::abs(target.y() - panel->center.y()) <= panel->half.y() &&
            std::abs(target.z() - panel->center.z()) <= panel->half.z();
        outcome.reach = outcome.arm_success;
      } else if (obs_.class_at(u, v) == ObjectClass::kDoor) {
        door_held_now = true;
        door_delta = std::clamp(target.y() - door_closed_edge_y_, 0.0,
                                door_.max_displacement);
      }
    }
  }

  StepResult result;
  if (cfg_.task == Task::kDoor) {
    // Spring return happens before the post-step render.
    door_.held = door_held_now;
    door_.displacement = door_held_now ? door_delta : 0.0;
    apply_door_displacement(door_.displacement);
    obs_ = render_observation(scene_);
    result.door_visible_px = door_visible_length(obs_);
    if (!outcome.ik_failed && door_held_now) {
      outcome.arm_success = result.door_visible_px < door_pixel_threshold();
      outcome.reach = outcome.arm_success;
    }
  }

  if (outcome.reach) {
    outcome.move_distance =
        base_advance_sweep(scene_, hand_world, cfg_, cfg_.sweep_step);
  }

  ++steps_;
  result.obs = obs_;
  result.reward = compute_reward(outcome, cfg_.weights, cfg_.d_stab);
  result.reach = outcome.reach;
  result.done = outcome.reach || steps_ >= cfg_.horizon;
  result.ik_failed = outcome.ik_failed;
  result.balance_violated = outcome.hand_horizontal_distance &&
                            *outcome.hand_horizontal_distance > cfg_.d_stab;
  result.move_distance = outcome.reach ? outcome.move_distance : 0.0;
  episode_done_ = result.done;
  return result;
}

}  // namespace m2n::sim
