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

#include "mssr/augment.hpp"

namespace mssr {

GeometricTransform GeometricTransform::from_index(int index) {
  if (index < 0 || index >= 8) {
    throw std::out_of_range("transform index " + std::to_string(index));
  }
  return {(index & 1) != 0, (index & 2) != 0, (index & 4) != 0};
}

std::string GeometricTransform::str() const {
  std::string s;
  if (flip_lr) s += "lr";
  if (flip_ud) s += s.empty() ? "ud" : "+ud";
  if (rot90) s += s.empty() ? "rot" : "+rot";
  return s.empty() ? "id" : s;
}

std::array<GeometricTransform, 8> all_transforms() {
  std::array<GeometricTransform, 8> out;
  for (int i = 0; i < 8; ++i) out[i] = GeometricTransform::from_index(i);
  return out;
}

GeometricTransform sample_augmentation(SeededRng& rng) {
  GeometricTransform t;
  t.flip_lr = rng.coin();
  t.flip_ud = rng.coin();
  t.rot90 = rng.coin();
  return t;
}

namespace {

// out(n, c, y, x) = in(n, c, src(y, x)) for an output of shape `out_shape`.
template <typename Map>
Tensor remap(const Tensor& in, Shape out_shape, Map src) {
  Tensor out(out_shape);
  const int in_w = in.shape().w;
  for (int n = 0; n < out_shape.n; ++n) {
    for (int c = 0; c < out_shape.c; ++c) {
      const float* s = in.plane(n, c);
      float* d = out.plane(n, c);
      for (int y = 0; y < out_shape.h; ++y) {
        for (int x = 0; x < out_shape.w; ++x) {
          const auto [sy, sx] = src(y, x);
          d[static_cast<std::size_t>(y) * out_shape.w + x] =
              s[static_cast<std::size_t>(sy) * in_w + sx];
        }
      }
    }
  }
  return out;
}

}  // namespace

Tensor flip_lr(const Tensor& image) {
  const int w = image.shape().w;
  return remap(image, image.shape(),
               [w](int y, int x) { return std::pair{y, w - 1 - x}; });
}

Tensor flip_ud(const Tensor& image) {
  const int h = image.shape().h;
  return remap(image, image.shape(),
               [h](int y, int x) { return std::pair{h - 1 - y, x}; });
}

Tensor rotate90_ccw(const Tensor& image) {
  const Shape s = image.shape();
  return remap(image, {s.n, s.c, s.w, s.h},
               [w = s.w](int y, int x) { return std::pair{x, w - 1 - y}; });
}

Tensor rotate90_cw(const Tensor& image) {
  const Shape s = image.shape();
  return remap(image, {s.n, s.c, s.w, s.h},
               [h = s.h](int y, int x) { return std::pair{h - 1 - x, y}; });
}

Tensor apply_geometric(const GeometricTransform& t, const Tensor& image) {
  Tensor out = image;
  if (t.flip_lr) out = flip_lr(out);
  if (t.flip_ud) out = flip_ud(out);
  if (t.rot90) out = rotate90_ccw(out);
  return out;
}

Tensor invert_geometric(const GeometricTransform& t, const Tensor& image) {
  Tensor out = image;
  if (t.rot90) out = rotate90_cw(out);
  if (t.flip_ud) out = flip_ud(out);
  if (t.flip_lr) out = flip_lr(out);
  return out;
}

std::pair<int, int> sample_crop_origin(int height, int width, int size,
                                       SeededRng& rng) {
  if (size <= 0 || height < size || width < size) {
    throw ShapeError("crop of " + std::to_string(size) + " does not fit a " +
                     std::to_string(height) + "x" + std::to_string(width) +
                     " image");
  }
  const int y = static_cast<int>(rng.uniform_int(height - size + 1));
  const int x = static_cast<int>(rng.uniform_int(width - size + 1));
  return {y, x};
}

std::pair<Tensor, Tensor> crop_patch(const Tensor& lr, const Tensor& hr,
                                     int size, SeededRng& rng) {
  if (lr.shape() != hr.shape()) {
    throw ShapeError("LR " + lr.shape().str() + " and HR " + hr.shape().str() +
                     " differ in size");
  }
  if (lr.shape().n != 1) throw ShapeError("crop_patch expects single images");
  const auto [y, x] = sample_crop_origin(lr.shape().h, lr.shape().w, size, rng);
  return {crop(lr, y, x, size, size), crop(hr, y, x, size, size)};
}

}  // namespace mssr
