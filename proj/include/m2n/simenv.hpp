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
#include <optional>

#include "m2n/action_grid.hpp"
#include "m2n/rng.hpp"
#include "m2n/scene.hpp"

namespace m2n::sim {

enum class Task { kReach, kDoor };

struct RewardWeights {
  double w1 = 1.0;   // IK-failure penalty
  double w2 = 1.0;   // balance penalty
  double w3 = 10.0;  // arm (task) success
  double w4 = 5.0;   // base-advance distance, gated by reach
};

/// Everything the reward needs from one step.
struct StepOutcome {
  bool ik_failed = false;
  std::optional<double> hand_horizontal_distance;  // target to base center
  bool arm_success = false;
  bool reach = false;
  double move_distance = 0.0;  // base_advance_sweep result, meters
};

struct StepResult {
  Observation obs;
  double reward = 0.0;
  bool reach = false;
  bool done = false;
  // info
  bool ik_failed = false;
  bool balance_violated = false;
  double move_distance = 0.0;
  int door_visible_px = 0;
};

struct ReachGeometry {
  Eigen::Vector3d table_center{0.70, 0.45, 0.35};
  Eigen::Vector3d table_half{0.30, 0.35, 0.35};
  Eigen::Vector3d panel_center{0.62, 0.375, 0.86};  // canonical; y,z randomized
  Eigen::Vector3d panel_half{0.02, 0.15, 0.10};
  double rand_y = 0.10;  // +- range on panel center y
  double rand_z = 0.06;  // +- range on panel center z
};

struct DoorGeometry {
  double door_x = 0.80;           // door plane center
  Eigen::Vector3d door_half{0.03, 0.30, 0.70};
  double door_z = 0.75;
  double gap_half_width = 0.25;   // wall opening around y = 0
  double wall_x = 0.70;           // walls sit nearer than the door
  double max_displacement = 0.90;
  double l_threshold_frac = 0.15; // L_threshold = frac * closed-door width
};

struct TaskConfig {
  Task task = Task::kReach;
  RewardWeights weights;
  int horizon = 5;           // placement attempts per episode
  double d_stab = 0.9;       // stability-margin scale, meters
  double d_corridor = 3.0;   // sweep cap
  double sweep_step = 0.01;  // meters
  int action_stride = 4;
  double base_height = 0.5;
  ReachGeometry reach;
  DoorGeometry door;
  kin::IkOptions ik{.damping = 1e-2, .max_iterations = 200,
                    .position_tolerance = 1e-4};
};

/// r = w1*r_ik + w2*r_balance + w3*r_arm + w4*(r_move * reach).
/// r_balance is the geometric stability heuristic; absent targets contribute
/// nothing to it.
double compute_reward(const StepOutcome& outcome, const RewardWeights& w,
                      double d_stab);

/// Largest forward base displacement in [0, d_corridor] keeping position-only
/// IK on the fixed world hand point feasible at every swept stop. Fixed-step
/// sweep with early stop at the first failure; rotation is never swept.
double base_advance_sweep(const WorldScene& scene, const Eigen::Vector3d& hand_world,
                          const TaskConfig& cfg, double step_size);

/// One Reach/Door episode instance. Owned by exactly one worker at a time.
class Env {
 public:
  Env(TaskConfig cfg, kin::KinematicChain chain, cam::CameraModel camera);

  /// Rebuilds the scene (Reach randomizes the target panel within configured
  /// ranges), parks the robot at the canonical start, renders.
  const Observation& reset(std::uint64_t seed);

  /// Executes one action bin: bin center pixel -> depth lookup on the last
  /// observation -> backprojection -> IK (base fixed). Door contact and the
  /// spring return are applied before re-rendering.
  StepResult step(int action_bin);

  const Observation& last_observation() const { return obs_; }
  const WorldScene& scene() const { return scene_; }
  const TaskConfig& config() const { return cfg_; }
  ActionGrid action_grid() const;
  int closed_door_width_px() const { return closed_door_width_px_; }
  double door_pixel_threshold() const {
    return cfg_.door.l_threshold_frac * closed_door_width_px_;
  }
  int steps_taken() const { return steps_; }

 private:
  void build_scene(Rng& rng);
  void apply_door_displacement(double delta);

  TaskConfig cfg_;
  WorldScene scene_;
  kin::JointConfig home_q_;
  DoorState door_;
  double door_closed_edge_y_ = 0.0;
  int closed_door_width_px_ = 0;
  Observation obs_;
  int steps_ = 0;
  bool episode_done_ = true;
};

}  // namespace m2n::sim
