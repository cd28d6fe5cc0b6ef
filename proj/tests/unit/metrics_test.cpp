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


#include <gtest/gtest.h>

#include <cmath>

#include "mssr/image_io.hpp"
#include "mssr/metrics.hpp"
#include "support/oracles.hpp"

namespace mssr {
namespace {

using testing::random_tensor;

// Per-window SSIM with explicit weighted covariance, averaged over planes.
double brute_ssim(const Tensor& a, const Tensor& b) {
  double w[11][11];
  double norm = 0.0;
  for (int i = 0; i < 11; ++i) {
    for (int j = 0; j < 11; ++j) {
      w[i][j] = std::exp(-((i - 5) * (i - 5) + (j - 5) * (j - 5)) / (2 * 1.5 * 1.5));
      norm += w[i][j];
    }
  }
  const double c1 = 0.01 * 0.01;
  const double c2 = 0.03 * 0.03;
  const Shape& s = a.shape();
  double total = 0.0;
  for (int n = 0; n < s.n; ++n) {
    for (int c = 0; c < s.c; ++c) {
      double plane = 0.0;
      int windows = 0;
      for (int y = 0; y + 11 <= s.h; ++y) {
        for (int x = 0; x + 11 <= s.w; ++x) {
          double ma = 0.0;
          double mb = 0.0;
          for (int i = 0; i < 11; ++i) {
            for (int j = 0; j < 11; ++j) {
              ma += w[i][j] / norm * a.at(n, c, y + i, x + j);
              mb += w[i][j] / norm * b.at(n, c, y + i, x + j);
            }
          }
          double va = 0.0;
          double vb = 0.0;
          double cov = 0.0;
          for (int i = 0; i < 11; ++i) {
            for (int j = 0; j < 11; ++j) {
              const double da = a.at(n, c, y + i, x + j) - ma;
              const double db = b.at(n, c, y + i, x + j) - mb;
              va += w[i][j] / norm * da * da;
              vb += w[i][j] / norm * db * db;
              cov += w[i][j] / norm * da * db;
            }
          }
          plane += (2 * ma * mb + c1) * (2 * cov + c2) /
                   ((ma * ma + mb * mb + c1) * (va + vb + c2));
          ++windows;
        }
      }
      total += plane / windows;
    }
  }
  return total / (s.n * s.c);
}

TEST(Psnr, UniformOneLevelError) {
  Tensor a({1, 3, 20, 20}, 0.4f);
  Tensor b = a;
  for (auto& v : b.storage()) v -= 1.0f / 255.0f;
  EXPECT_NEAR(psnr(a, b), 48.1308, 1e-3);
}

TEST(Psnr, ClosedFormsAndInfinity) {
  const Tensor a({1, 1, 4, 4}, 0.0f);
  Tensor b = a;
  b[0] = 1.0f;  // MSE 1/16
  EXPECT_NEAR(psnr(a, b), 10.0 * std::log10(16.0), 1e-12);
  EXPECT_TRUE(std::isinf(psnr(a, a)));
  EXPECT_GT(psnr(a, a), 0.0);
  EXPECT_THROW(psnr(a, Tensor({1, 1, 4, 5})), ShapeError);
}

TEST(Psnr, IsSymmetric) {
  const Tensor a = random_tensor({1, 3, 8, 8}, 1, 0.0f, 1.0f);
  const Tensor b = random_tensor({1, 3, 8, 8}, 2, 0.0f, 1.0f);
  EXPECT_EQ(psnr(a, b), psnr(b, a));
}

TEST(Psnr, LumaMode) {
  const Tensor a = random_tensor({1, 3, 8, 8}, 3, 0.0f, 1.0f);
  const Tensor b = random_tensor({1, 3, 8, 8}, 4, 0.0f, 1.0f);
  EXPECT_DOUBLE_EQ(psnr(a, b, true), psnr(rgb_to_y(a), rgb_to_y(b)));
}

TEST(Ssim, IdentityIsExactlyOne) {
  const Tensor a = random_tensor({1, 3, 24, 17}, 5, 0.0f, 1.0f);
  EXPECT_EQ(ssim(a, a), 1.0);
}

TEST(Ssim, ConstantImagesClosedForm) {
  const double c1 = 1e-4;
  for (auto [x, y] : {std::pair{0.0f, 1.0f}, std::pair{0.25f, 0.75f}, std::pair{0.5f, 0.5f}}) {
    const double expected = (2.0 * x * y + c1) / (double(x) * x + double(y) * y + c1);
    EXPECT_NEAR(ssim(Tensor({1, 1, 16, 16}, x), Tensor({1, 1, 16, 16}, y)), expected, 1e-6);
  }
}

TEST(Ssim, MatchesExplicitWindowOracle) {
  const Tensor a = random_tensor({1, 2, 14, 13}, 6, 0.0f, 1.0f);
  Tensor b = a;
  const Tensor noise = random_tensor(a.shape(), 7, -0.1f, 0.1f);
  for (std::size_t i = 0; i < b.size(); ++i) b[i] += noise[i];
  EXPECT_NEAR(ssim(a, b), brute_ssim(a, b), 1e-6);
  EXPECT_NEAR(ssim(a, b), ssim(b, a), 1e-12);
  EXPECT_LT(ssim(a, b), 1.0);
}

TEST(Ssim, RejectsSmallImages) {
  EXPECT_THROW(ssim(Tensor({1, 1, 10, 20}), Tensor({1, 1, 10, 20})), ShapeError);
}

}  // namespace
}  // namespace mssr
