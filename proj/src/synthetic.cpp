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

#include "mssr/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "mssr/image_io.hpp"
#include "mssr/rng.hpp"

namespace mssr {

namespace {

using Rgb = std::array<double, 3>;

Rgb random_color(SeededRng& rng) {
  return {rng.uniform(), rng.uniform(), rng.uniform()};
}

double smoothstep(double edge, double x) {
  const double t = std::clamp(0.5 + x / edge, 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

}  // namespace

Tensor synthetic_scene(int h, int w, std::uint64_t seed) {
  if (h <= 0 || w <= 0) throw ShapeError("synthetic_scene: invalid size");
  SeededRng rng = SeededRng(seed).derive("scene");
  std::vector<Rgb> px(static_cast<std::size_t>(h) * w);

  const Rgb c0 = random_color(rng);
  const Rgb c1 = random_color(rng);
  const double angle = 2.0 * std::numbers::pi * rng.uniform();
  const double gx = std::cos(angle) / w;
  const double gy = std::sin(angle) / h;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double t = std::clamp(0.5 + (x - w / 2.0) * gx + (y - h / 2.0) * gy, 0.0, 1.0);
      for (int c = 0; c < 3; ++c) {
        px[static_cast<std::size_t>(y) * w + x][c] = (1 - t) * c0[c] + t * c1[c];
      }
    }
  }

  const int shapes = 6 + static_cast<int>(rng.uniform_int(6));
  for (int s = 0; s < shapes; ++s) {
    const Rgb color = random_color(rng);
    const double cx = rng.uniform() * w;
    const double cy = rng.uniform() * h;
    const double rx = (0.05 + 0.25 * rng.uniform()) * w;
    const double ry = (0.05 + 0.25 * rng.uniform()) * h;
    const double edge = 0.5 + 2.0 * rng.uniform();
    const bool ellipse = rng.coin();
    const bool striped = rng.uniform() < 0.4;
    const double freq = 0.15 + 0.8 * rng.uniform();
    const double theta = std::numbers::pi * rng.uniform();
    const double opacity = 0.6 + 0.4 * rng.uniform();
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double dx = (x + 0.5 - cx) / rx;
        const double dy = (y + 0.5 - cy) / ry;
        // Signed distance-like value in pixels (negative inside).
        const double d = ellipse
                             ? (std::sqrt(dx * dx + dy * dy) - 1.0) * std::min(rx, ry)
                             : (std::max(std::abs(dx), std::abs(dy)) - 1.0) *
                                   std::min(rx, ry);
        const double cover = 1.0 - smoothstep(edge, d);
        if (cover <= 0.0) continue;
        double mod = 1.0;
        if (striped) {
          const double u = (x * std::cos(theta) + y * std::sin(theta)) * freq;
          mod = 0.65 + 0.35 * std::sin(u);
        }
        auto& p = px[static_cast<std::size_t>(y) * w + x];
        const double a = cover * opacity;
        for (int c = 0; c < 3; ++c) p[c] = (1 - a) * p[c] + a * color[c] * mod;
      }
    }
  }

  Tensor out({1, 3, h, w});
  for (int c = 0; c < 3; ++c) {
    float* d = out.plane(0, c);
    for (std::size_t i = 0; i < px.size(); ++i) {
      const double grain = 0.01 * (rng.uniform() - 0.5);
      d[i] = byte_to_float(float_to_byte(static_cast<float>(px[i][c] + grain)));
    }
  }
  return out;
}

Tensor bicubic_degrade(const Tensor& hr, int factor) {
  const Shape& s = hr.shape();
  if (factor < 1 || s.h < factor || s.w < factor) {
    throw ShapeError("bicubic_degrade: invalid factor for " + s.str());
  }
  const Tensor small = resize_bicubic(hr, s.h / factor, s.w / factor);
  Tensor up = resize_bicubic(small, s.h, s.w);
  for (auto& v : up.storage()) v = byte_to_float(float_to_byte(v));
  return up;
}

}  // namespace mssr
