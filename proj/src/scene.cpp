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

#include "m2n/scene.hpp"

#include <algorithm>

namespace m2n::sim {

double SceneObject::surface_distance(const Eigen::Vector3d& p) const {
  const Eigen::Vector3d d = (p - center).cwiseAbs() - half;
  const Eigen::Vector3d outside = d.cwiseMax(0.0);
  const double inside = std::min(0.0, d.maxCoeff());
  return outside.norm() + inside;
}

const SceneObject* WorldScene::find_class(ObjectClass tag) const {
  for (const auto& o : objects) {
    if (o.class_tag == tag) return &o;
  }
  return nullptr;
}

SceneObject* WorldScene::find_class(ObjectClass tag) {
  for (auto& o : objects) {
    if (o.class_tag == tag) return &o;
  }
  return nullptr;
}

namespace {

// Slab intersection of ray origin + t*dir with an AABB. Returns the entry
// parameter, or infinity on a miss. The direction is unnormalized (camera
// z-depth parametrization), so t is the camera-frame depth directly.
double ray_box_entry(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir,
                     const Eigen::Vector3d& lo, const Eigen::Vector3d& hi) {
  double t_near = 1e-9;  // camera sits strictly outside every box
  double t_far = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (dir[a] == 0.0) {
      if (origin[a] < lo[a] || origin[a] > hi[a]) {
        return std::numeric_limits<double>::infinity();
      }
      continue;
    }
    double t0 = (lo[a] - origin[a]) / dir[a];
    double t1 = (hi[a] - origin[a]) / dir[a];
    if (t0 > t1) std::swap(t0, t1);
    t_near = std::max(t_near, t0);
    t_far = std::min(t_far, t1);
    if (t_near > t_far) return std::numeric_limits<double>::infinity();
  }
  return t_near;
}

}  // namespace

Observation render_observation(const WorldScene& scene) {
  const auto cam_here =
      cam::with_base_pose(scene.camera, scene.base, scene.base_height);
  const auto& in = cam_here.intrinsics;

  Observation obs;
  obs.width = in.width;
  obs.height = in.height;
  const std::array<std::uint8_t, 3> sky{160, 205, 235};
  obs.rgb.assign(static_cast<size_t>(in.width) * in.height, sky);
  obs.depth.assign(obs.rgb.size(), Observation::kSkyDepth);
  obs.ids.assign(obs.rgb.size(), 0);

  std::uint8_t max_id = 0;
  for (const auto& o : scene.objects) max_id = std::max(max_id, o.id);
  obs.id_class.assign(max_id + 1, ObjectClass::kNone);
  for (const auto& o : scene.objects) obs.id_class[o.id] = o.class_tag;

  const Eigen::Matrix3d cam_to_world = cam_here.extrinsics.rotation.transpose();
  const Eigen::Vector3d cam_center =
      -cam_to_world * cam_here.extrinsics.translation;

  for (int v = 0; v < in.height; ++v) {
    for (int u = 0; u < in.width; ++u) {
      const Eigen::Vector3d dir_cam((u + 0.5 - in.cx) / in.fx,
                                    (v + 0.5 - in.cy) / in.fy, 1.0);
      const Eigen::Vector3d dir = cam_to_world * dir_cam;
      const int idx = obs.index(u, v);
      for (const auto& o : scene.objects) {
        const double t = ray_box_entry(cam_center, dir, o.lo(), o.hi());
        if (t < obs.depth[idx]) {
          obs.depth[idx] = t;
          obs.ids[idx] = o.id;
          obs.rgb[idx] = o.color;
        }
      }
    }
  }
  return obs;
}

int door_visible_length(const Observation& obs) {
  int min_u = obs.width, max_u = -1;
  for (int v = 0; v < obs.height; ++v) {
    for (int u = 0; u < obs.width; ++u) {
      if (obs.id_class[obs.ids[obs.index(u, v)]] == ObjectClass::kDoor) {
        min_u = std::min(min_u, u);
        max_u = std::max(max_u, u);
      }
    }
  }
  return max_u < min_u ? 0 : max_u - min_u + 1;
}

}  // namespace m2n::sim
