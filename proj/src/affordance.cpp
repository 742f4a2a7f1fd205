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

#include "m2n/affordance.hpp"

#include <algorithm>
#include <cmath>

namespace m2n::aff {

int Mask::count() const {
  return static_cast<int>(std::count(data.begin(), data.end(), std::uint8_t{1}));
}

Mask extract_affordance(const Observation& obs, ObjectClass target) {
  Mask mask;
  mask.width = obs.width;
  mask.height = obs.height;
  mask.data.assign(obs.ids.size(), 0);
  for (std::size_t i = 0; i < obs.ids.size(); ++i) {
    const std::uint8_t id = obs.ids[i];
    if (id != 0 && id < obs.id_class.size() && obs.id_class[id] == target) {
      mask.data[i] = 1;
    }
  }
  return mask;
}

std::vector<std::uint8_t> mask_to_bins(const Mask& mask, const ActionGrid& grid) {
  std::vector<std::uint8_t> bins(grid.bin_count(), 0);
  for (int v = 0; v < mask.height; ++v) {
    for (int u = 0; u < mask.width; ++u) {
      if (mask.at(u, v)) bins[grid.bin_of_pixel(u, v)] = 1;
    }
  }
  return bins;
}

StateFeature encode_state(const Observation& obs) {
  const int pw = (obs.width + kPatchesX - 1) / kPatchesX;
  const int ph = (obs.height + kPatchesY - 1) / kPatchesY;

  StateFeature full;
  full.reserve(kPatchesX * kPatchesY * 4);
  for (int py = 0; py < kPatchesY; ++py) {
    for (int px = 0; px < kPatchesX; ++px) {
      const int u0 = px * pw;
      const int v0 = py * ph;
      const int u1 = std::min(obs.width, u0 + pw);
      const int v1 = std::min(obs.height, v0 + ph);
      double r = 0.0, g = 0.0, b = 0.0, inv_d = 0.0;
      int n = 0;
      for (int v = v0; v < v1; ++v) {
        for (int u = u0; u < u1; ++u) {
          const int i = obs.index(u, v);
          r += obs.rgb[i][0];
          g += obs.rgb[i][1];
          b += obs.rgb[i][2];
          const double d = obs.depth[i];
          if (std::isfinite(d) && d > 0.0) inv_d += 1.0 / d;
          ++n;
        }
      }
      const double scale = n > 0 ? 1.0 / n : 0.0;
      full.push_back(r * scale / 255.0);
      full.push_back(g * scale / 255.0);
      full.push_back(b * scale / 255.0);
      full.push_back(inv_d * scale);
    }
  }
  full.resize(kStateDim);
  return full;
}

}  // namespace m2n::aff
