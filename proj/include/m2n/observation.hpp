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
#include <limits>
#include <vector>

namespace m2n {

enum class ObjectClass : std::uint8_t { kNone = 0, kFloor, kTable, kTarget, kDoor, kWall };

/// Rendered RGB-D frame with a per-pixel object-id plane. Id 0 is sky; the
/// depth there is +infinity. `id_class` maps ids to semantic classes so
/// downstream code never needs the scene itself.
struct Observation {
  static constexpr double kSkyDepth = std::numeric_limits<double>::infinity();

  int width = 0;
  int height = 0;
  std::vector<std::array<std::uint8_t, 3>> rgb;  // row-major, v * width + u
  std::vector<double> depth;                     // camera-frame z, meters
  std::vector<std::uint8_t> ids;
  std::vector<ObjectClass> id_class;             // indexed by id, [0] = kNone

  int index(int u, int v) const { return v * width + u; }

  ObjectClass class_at(int u, int v) const {
    return id_class[ids[index(u, v)]];
  }

  bool is_sky(int u, int v) const { return ids[index(u, v)] == 0; }
};

}  // namespace m2n
