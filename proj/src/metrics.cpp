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

#include "mssr/metrics.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "mssr/image_io.hpp"

namespace mssr {

namespace {

void require_same(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(what) + ": shapes " + a.shape().str() +
                     " and " + b.shape().str() + " differ");
  }
}

std::array<double, kSsimWindow> gaussian_window() {
  std::array<double, kSsimWindow> w{};
  double sum = 0.0;
  for (int i = 0; i < kSsimWindow; ++i) {
    const double d = i - kSsimWindow / 2;
    w[i] = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
    sum += w[i];
  }
  for (auto& v : w) v /= sum;
  return w;
}

// Valid-mode separable filtering of a h x w plane.
std::vector<double> filter_valid(const std::vector<double>& src, int h, int w,
                                 const std::array<double, kSsimWindow>& k) {
  const int oh = h - kSsimWindow + 1;
  const int ow = w - kSsimWindow + 1;
  std::vector<double> rows(static_cast<std::size_t>(h) * ow);
  for (int y = 0; y < h; ++y) {
    const double* s = src.data() + static_cast<std::size_t>(y) * w;
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int i = 0; i < kSsimWindow; ++i) acc += k[i] * s[x + i];
      rows[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(oh) * ow);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int i = 0; i < kSsimWindow; ++i) {
        acc += k[i] * rows[static_cast<std::size_t>(y + i) * ow + x];
      }
      out[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  }
  return out;
}

double ssim_plane(const float* pa, const float* pb, int h, int w) {
  static const auto k = gaussian_window();
  const std::size_t n = static_cast<std::size_t>(h) * w;
  std::vector<double> a(pa, pa + n), b(pb, pb + n), aa(n), bb(n), ab(n);
  for (std::size_t i = 0; i < n; ++i) {
    aa[i] = a[i] * a[i];
    bb[i] = b[i] * b[i];
    ab[i] = a[i] * b[i];
  }
  const auto mu_a = filter_valid(a, h, w, k);
  const auto mu_b = filter_valid(b, h, w, k);
  const auto e_aa = filter_valid(aa, h, w, k);
  const auto e_bb = filter_valid(bb, h, w, k);
  const auto e_ab = filter_valid(ab, h, w, k);
  const double c1 = (kSsimK1 * 1.0) * (kSsimK1 * 1.0);
  const double c2 = (kSsimK2 * 1.0) * (kSsimK2 * 1.0);
  double total = 0.0;
  for (std::size_t i = 0; i < mu_a.size(); ++i) {
    const double ma = mu_a[i];
    const double mb = mu_b[i];
    const double va = e_aa[i] - ma * ma;
    const double vb = e_bb[i] - mb * mb;
    const double cov = e_ab[i] - ma * mb;
    total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) /
             ((ma * ma + mb * mb + c1) * (va + vb + c2));
  }
  return total / static_cast<double>(mu_a.size());
}

}  // namespace

double psnr(const Tensor& a, const Tensor& b, bool y_channel) {
  require_same(a, b, "psnr");
  if (y_channel) return psnr(rgb_to_y(a), rgb_to_y(b), false);
  if (a.empty()) throw ShapeError("psnr: empty images");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    sum += d * d;
  }
  if (sum == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(static_cast<double>(a.size()) / sum);
}

double ssim(const Tensor& a, const Tensor& b) {
  require_same(a, b, "ssim");
  const Shape& s = a.shape();
  if (s.h < kSsimWindow || s.w < kSsimWindow) {
    throw ShapeError("ssim: image " + std::to_string(s.h) + "x" +
                     std::to_string(s.w) + " is smaller than the " +
                     std::to_string(kSsimWindow) + "x" +
                     std::to_string(kSsimWindow) + " window");
  }
  if (s.n * s.c == 0) throw ShapeError("ssim: empty images");
  double total = 0.0;
  for (int n = 0; n < s.n; ++n) {
    for (int c = 0; c < s.c; ++c) {
      total += ssim_plane(a.plane(n, c), b.plane(n, c), s.h, s.w);
    }
  }
  return total / (s.n * s.c);
}

}  // namespace mssr
