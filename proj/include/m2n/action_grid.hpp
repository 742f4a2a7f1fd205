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

#include <stdexcept>
#include <string>

namespace m2n {

/// Square binning of the pixel action space. Actions are bin indices; a bin
/// executes at its center pixel (clamped to the image).
struct ActionGrid {
  int image_width = 0;
  int image_height = 0;
  int stride = 1;

  static ActionGrid make(int width, int height, int stride) {
    if (width <= 0 || height <= 0 || stride < 1) {
      throw std::invalid_argument("action grid needs positive size and stride >= 1");
    }
    return ActionGrid{width, height, stride};
  }

  int bins_x() const { return (image_width + stride - 1) / stride; }
  int bins_y() const { return (image_height + stride - 1) / stride; }
  int bin_count() const { return bins_x() * bins_y(); }

  int bin_of_pixel(double u, double v) const {
    int bx = static_cast<int>(u) / stride;
    int by = static_cast<int>(v) / stride;
    bx = std::min(std::max(bx, 0), bins_x() - 1);
    by = std::min(std::max(by, 0), bins_y() - 1);
    return by * bins_x() + bx;
  }

  /// Center pixel of a bin, clamped to the image bounds.
  void bin_center(int bin, int* u, int* v) const {
    check_bin(bin);
    const int bx = bin % bins_x();
    const int by = bin / bins_x();
    *u = std::min(bx * stride + stride / 2, image_width - 1);
    *v = std::min(by * stride + stride / 2, image_height - 1);
  }

  void check_bin(int bin) const {
    if (bin < 0 || bin >= bin_count()) {
      throw std::invalid_argument("action bin " + std::to_string(bin) +
                                  " out of range [0," +
                                  std::to_string(bin_count()) + ")");
    }
  }
};

}  // namespace m2n
