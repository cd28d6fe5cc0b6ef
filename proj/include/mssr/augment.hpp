// Copyright 2026 The MSSR Authors. All Rights Reserved.
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
#include <string>
#include <utility>

#include "mssr/rng.hpp"
#include "mssr/tensor.hpp"

namespace mssr {

/// Left-right flip, then up-down flip, then a 90 degree counter-clockwise
/// rotation; each stage is applied only when its flag is set.
struct GeometricTransform {
  bool flip_lr = false;
  bool flip_ud = false;
  bool rot90 = false;

  /// Index in [0, 8): flip_lr | flip_ud << 1 | rot90 << 2.
  int index() const { return int(flip_lr) | int(flip_ud) << 1 | int(rot90) << 2; }
  static GeometricTransform from_index(int index);
  std::string str() const;

  bool operator==(const GeometricTransform&) const = default;
};

/// All eight transforms in index order; index 0 is the identity.
std::array<GeometricTransform, 8> all_transforms();

/// Three independent fair coins, drawn in the order flip_lr, flip_ud, rot90.
GeometricTransform sample_augmentation(SeededRng& rng);

/// Applies `t` to every (n, c) plane. Rotation swaps h and w.
Tensor apply_geometric(const GeometricTransform& t, const Tensor& image);

/// Exact inverse: invert_geometric(t, apply_geometric(t, x)) == x.
Tensor invert_geometric(const GeometricTransform& t, const Tensor& image);

Tensor flip_lr(const Tensor& image);
Tensor flip_ud(const Tensor& image);
/// Counter-clockwise: out(y, x) = in(x, w - 1 - y).
Tensor rotate90_ccw(const Tensor& image);
Tensor rotate90_cw(const Tensor& image);

/// Top-left corner of a uniformly placed size x size window; y is drawn
/// before x.
std::pair<int, int> sample_crop_origin(int height, int width, int size,
                                       SeededRng& rng);

/// Crops the same window from a same-size pair of n = 1 images.
std::pair<Tensor, Tensor> crop_patch(const Tensor& lr, const Tensor& hr,
                                     int size, SeededRng& rng);

}  // namespace mssr
