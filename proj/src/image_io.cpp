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

#include "mssr/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <memory>

namespace mssr {

float byte_to_float(std::uint8_t b) { return static_cast<float>(b) / 255.0f; }

std::uint8_t float_to_byte(float v) {
  if (!(v > 0.0f)) return 0;  // also catches NaN
  if (v >= 1.0f) return 255;
  return static_cast<std::uint8_t>(std::lround(v * 255.0f));
}

Tensor to_tensor(const ImageBuffer& image) {
  Tensor t({1, 3, image.height, image.width});
  for (int c = 0; c < 3; ++c) {
    float* dst = t.plane(0, c);
    for (int y = 0; y < image.height; ++y) {
      for (int x = 0; x < image.width; ++x) {
        dst[static_cast<std::size_t>(y) * image.width + x] =
            byte_to_float(image.at(x, y, c));
      }
    }
  }
  return t;
}

ImageBuffer from_tensor(const Tensor& tensor) {
  const Shape& s = tensor.shape();
  if (s.n < 1 || s.c != 3) {
    throw ShapeError("from_tensor: expected n>=1, 3 channels, got " + s.str());
  }
  ImageBuffer image(s.w, s.h);
  for (int c = 0; c < 3; ++c) {
    const float* src = tensor.plane(0, c);
    for (int y = 0; y < s.h; ++y) {
      for (int x = 0; x < s.w; ++x) {
        image.at(x, y, c) =
            float_to_byte(src[static_cast<std::size_t>(y) * s.w + x]);
      }
    }
  }
  return image;
}

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f != nullptr) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) {
    throw ImageError("cannot open '" + path.string() + "' (" +
                     (mode[0] == 'r' ? "read" : "write") + ")");
  }
  return f;
}

void on_png_error(png_structp png, png_const_charp msg) {
  auto* text = static_cast<std::string*>(png_get_error_ptr(png));
  if (text != nullptr) *text = msg;
  png_longjmp(png, 1);
}

void on_png_warning(png_structp, png_const_charp) {}

struct ReadContext {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~ReadContext() { png_destroy_read_struct(&png, &info, nullptr); }
};

struct WriteContext {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~WriteContext() { png_destroy_write_struct(&png, &info); }
};

void check_signature(std::FILE* f, const std::filesystem::path& path) {
  png_byte sig[8];
  if (std::fread(sig, 1, 8, f) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw ImageError("'" + path.string() + "' is not a PNG file");
  }
}

// Reads pixels (or only the header) into `out`; returns false on libpng error.
bool read_png(std::FILE* f, ReadContext& ctx, std::string& error,
              ImageBuffer& out, bool header_only, int& bit_depth) {
  ctx.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &error, on_png_error,
                                   on_png_warning);
  if (ctx.png == nullptr) return false;
  ctx.info = png_create_info_struct(ctx.png);
  if (ctx.info == nullptr) return false;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(ctx.png))) return false;
  png_init_io(ctx.png, f);
  png_set_sig_bytes(ctx.png, 8);
  png_read_info(ctx.png, ctx.info);
  out.width = static_cast<int>(png_get_image_width(ctx.png, ctx.info));
  out.height = static_cast<int>(png_get_image_height(ctx.png, ctx.info));
  bit_depth = png_get_bit_depth(ctx.png, ctx.info);
  if (header_only || bit_depth == 16) return true;

  const int color = png_get_color_type(ctx.png, ctx.info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(ctx.png);
  if (color == PNG_COLOR_TYPE_GRAY && bit_depth < 8) {
    png_set_expand_gray_1_2_4_to_8(ctx.png);
  }
  if (png_get_valid(ctx.png, ctx.info, PNG_INFO_tRNS)) {
    png_set_tRNS_to_alpha(ctx.png);
  }
  if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) {
    png_set_gray_to_rgb(ctx.png);
  }
  png_set_strip_alpha(ctx.png);
  png_read_update_info(ctx.png, ctx.info);
  if (png_get_channels(ctx.png, ctx.info) != 3) {
    error = "unexpected channel layout after conversion";
    return false;
  }
  out.pixels.assign(3ull * out.width * out.height, 0);
  rows.resize(out.height);
  for (int y = 0; y < out.height; ++y) {
    rows[y] = out.pixels.data() + 3ull * out.width * y;
  }
  png_read_image(ctx.png, rows.data());
  png_read_end(ctx.png, nullptr);
  return true;
}

}  // namespace

ImageBuffer read_image(const std::filesystem::path& path) {
  FilePtr f = open_file(path, "rb");
  check_signature(f.get(), path);
  ReadContext ctx;
  std::string error;
  ImageBuffer image;
  int bit_depth = 0;
  if (!read_png(f.get(), ctx, error, image, false, bit_depth)) {
    throw ImageError("corrupt PNG '" + path.string() + "': " + error);
  }
  if (bit_depth == 16) {
    throw ImageError("'" + path.string() +
                     "' has 16-bit samples; only 8-bit images are supported");
  }
  return image;
}

std::pair<int, int> read_image_size(const std::filesystem::path& path) {
  FilePtr f = open_file(path, "rb");
  check_signature(f.get(), path);
  ReadContext ctx;
  std::string error;
  ImageBuffer image;
  int bit_depth = 0;
  if (!read_png(f.get(), ctx, error, image, true, bit_depth)) {
    throw ImageError("corrupt PNG '" + path.string() + "': " + error);
  }
  return {image.width, image.height};
}

void write_image(const ImageBuffer& image, const std::filesystem::path& path) {
  if (image.width <= 0 || image.height <= 0 ||
      image.pixels.size() != 3ull * image.width * image.height) {
    throw ImageError("write_image: invalid image buffer");
  }
  FilePtr f = open_file(path, "wb");
  WriteContext ctx;
  std::string error;
  ctx.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &error,
                                    on_png_error, on_png_warning);
  if (ctx.png == nullptr) throw ImageError("png_create_write_struct failed");
  ctx.info = png_create_info_struct(ctx.png);
  if (ctx.info == nullptr) throw ImageError("png_create_info_struct failed");
  std::vector<png_bytep> rows(image.height);
  for (int y = 0; y < image.height; ++y) {
    rows[y] = const_cast<png_bytep>(image.pixels.data() + 3ull * image.width * y);
  }
  if (setjmp(png_jmpbuf(ctx.png))) {
    throw ImageError("writing '" + path.string() + "' failed: " + error);
  }
  png_init_io(ctx.png, f.get());
  png_set_IHDR(ctx.png, ctx.info, image.width, image.height, 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(ctx.png, ctx.info);
  png_write_image(ctx.png, rows.data());
  png_write_end(ctx.png, nullptr);
}

namespace {

double cubic(double x) {
  constexpr double a = -0.5;
  x = std::abs(x);
  if (x <= 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
  if (x < 2.0) return (((x - 5.0) * x + 8.0) * x - 4.0) * a;
  return 0.0;
}

struct Taps {
  std::vector<int> first;
  std::vector<std::vector<double>> weights;
};

Taps make_taps(int in_size, int out_size) {
  const double scale = static_cast<double>(out_size) / in_size;
  const double widen = scale < 1.0 ? 1.0 / scale : 1.0;
  const double support = 2.0 * widen;
  Taps taps;
  taps.first.resize(out_size);
  taps.weights.resize(out_size);
  for (int o = 0; o < out_size; ++o) {
    const double center = (o + 0.5) / scale - 0.5;
    const int lo = static_cast<int>(std::floor(center - support)) + 1;
    const int hi = static_cast<int>(std::ceil(center + support)) - 1;
    std::vector<double> w;
    double sum = 0.0;
    for (int i = lo; i <= hi; ++i) {
      const double v = cubic((center - i) / widen);
      w.push_back(v);
      sum += v;
    }
    for (auto& v : w) v /= sum;
    taps.first[o] = lo;
    taps.weights[o] = std::move(w);
  }
  return taps;
}

}  // namespace

Tensor resize_bicubic(const Tensor& image, int out_h, int out_w) {
  const Shape& s = image.shape();
  if (out_h <= 0 || out_w <= 0 || s.h <= 0 || s.w <= 0) {
    throw ShapeError("resize_bicubic: invalid size");
  }
  const Taps ty = make_taps(s.h, out_h);
  const Taps tx = make_taps(s.w, out_w);
  Tensor out({s.n, s.c, out_h, out_w});
  std::vector<double> rows(static_cast<std::size_t>(s.h) * out_w);
  for (int n = 0; n < s.n; ++n) {
    for (int c = 0; c < s.c; ++c) {
      const float* src = image.plane(n, c);
      for (int y = 0; y < s.h; ++y) {
        for (int x = 0; x < out_w; ++x) {
          double acc = 0.0;
          const auto& w = tx.weights[x];
          for (std::size_t k = 0; k < w.size(); ++k) {
            const int ix = std::clamp(tx.first[x] + static_cast<int>(k), 0, s.w - 1);
            acc += w[k] * src[static_cast<std::size_t>(y) * s.w + ix];
          }
          rows[static_cast<std::size_t>(y) * out_w + x] = acc;
        }
      }
      float* dst = out.plane(n, c);
      for (int y = 0; y < out_h; ++y) {
        const auto& w = ty.weights[y];
        for (int x = 0; x < out_w; ++x) {
          double acc = 0.0;
          for (std::size_t k = 0; k < w.size(); ++k) {
            const int iy = std::clamp(ty.first[y] + static_cast<int>(k), 0, s.h - 1);
            acc += w[k] * rows[static_cast<std::size_t>(iy) * out_w + x];
          }
          dst[static_cast<std::size_t>(y) * out_w + x] = static_cast<float>(acc);
        }
      }
    }
  }
  return out;
}

Tensor rgb_to_y(const Tensor& image) {
  const Shape& s = image.shape();
  if (s.c != 3) throw ShapeError("rgb_to_y: expected 3 channels, got " + s.str());
  Tensor y({s.n, 1, s.h, s.w});
  for (int n = 0; n < s.n; ++n) {
    const float* r = image.plane(n, 0);
    const float* g = image.plane(n, 1);
    const float* b = image.plane(n, 2);
    float* dst = y.plane(n, 0);
    for (std::size_t i = 0; i < s.plane(); ++i) {
      dst[i] = static_cast<float>(
          (16.0 + 65.481 * r[i] + 128.553 * g[i] + 24.966 * b[i]) / 255.0);
    }
  }
  return y;
}

}  // namespace mssr
