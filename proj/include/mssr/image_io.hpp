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

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <vector>

#include "mssr/tensor.hpp"

namespace mssr {

class ImageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// 8-bit RGB image, pixels interleaved row-major (r, g, b).
struct ImageBuffer {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  ImageBuffer() = default;
  ImageBuffer(int w, int h) : width(w), height(h), pixels(3ull * w * h, 0) {}

  std::uint8_t& at(int x, int y, int ch) {
    return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + ch];
  }
  std::uint8_t at(int x, int y, int ch) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + ch];
  }
  bool operator==(const ImageBuffer&) const = default;
};

/// byte / 255.
float byte_to_float(std::uint8_t b);
/// round(clamp(v, 0, 1) * 255); NaN maps to 0.
std::uint8_t float_to_byte(float v);

/// 1 x 3 x H x W tensor in [0, 1].
Tensor to_tensor(const ImageBuffer& image);
/// Quantizes batch item 0 of a 3-channel tensor.
ImageBuffer from_tensor(const Tensor& tensor);

/// Reads an 8-bit PNG as RGB. Palette and low-bit-depth images are expanded,
/// grayscale is replicated to three channels and alpha is dropped. 16-bit
/// images are rejected.
ImageBuffer read_image(const std::filesystem::path& path);

/// Writes an 8-bit RGB PNG.
void write_image(const ImageBuffer& image, const std::filesystem::path& path);

/// Reads just the PNG header: (width, height).
std::pair<int, int> read_image_size(const std::filesystem::path& path);

/// Separable bicubic resampling (Keys, a = -0.5) with pixel-center alignment.
/// When shrinking, the kernel is widened by the scale factor (antialiasing).
/// Borders replicate the edge pixel.
Tensor resize_bicubic(const Tensor& image, int out_h, int out_w);

/// Luma (ITU-R BT.601, studio range) of a 3-channel [0,1] tensor, n x 1 x h x w.
Tensor rgb_to_y(const Tensor& image);

}  // namespace mssr
