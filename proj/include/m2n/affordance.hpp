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

#ifndef M2N_AFFORDANCE_HPP_
#define M2N_AFFORDANCE_HPP_

#include <cstdint>
#include <vector>

#include "m2n/action_grid.hpp"
#include "m2n/observation.hpp"

namespace m2n::aff {

// Binary pixel mask over an observation, row-major, 1 = affordance pixel.
struct Mask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  int index(int u, int v) const { return v * width + u; }
  bool at(int u, int v) const { return data[index(u, v)] != 0; }
  int count() const;
};

// Segments the pixels whose object id belongs to the given class. Stands in
// for a learned segmenter; the id plane gives exact object extents.
Mask extract_affordance(const Observation& obs, ObjectClass target);

// Marks each action bin that contains at least one mask pixel.
std::vector<std::uint8_t> mask_to_bins(const Mask& mask, const ActionGrid& grid);

// Compact observation embedding: the image is split into a coarse patch grid
// and each patch contributes mean RGB (scaled to [0,1]) plus mean inverse
// depth. The flat vector is truncated to kStateDim.
inline constexpr int kStateDim = 348;
inline constexpr int kPatchesX = 10;
inline constexpr int kPatchesY = 9;

using StateFeature = std::vector<double>;

StateFeature encode_state(const Observation& obs);

}  // namespace m2n::aff

#endif  // M2N_AFFORDANCE_HPP_
