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

// Independent reference implementations and shared fixtures for the unit
// and acceptance suites. Nothing here calls the optimized kernels.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "mssr/eval.hpp"
#include "mssr/models.hpp"
#include "mssr/ops.hpp"
#include "mssr/trainer.hpp"

namespace mssr::testing {

/// Uniform values in [lo, hi) from a dedicated stream.
TensorD random_tensor_d(Shape shape, std::uint64_t seed, double lo = -1.0,
                        double hi = 1.0);
Tensor random_tensor(Shape shape, std::uint64_t seed, float lo = -1.0f,
                     float hi = 1.0f);

/// Same as random_tensor_d but every value satisfies |x| >= margin.
TensorD random_tensor_away_from_zero(Shape shape, std::uint64_t seed,
                                     double margin);

/// Zero-padded "same" convolution as a plain loop nest in double:
///   out[n][o][y][x] = b[o] + sum_(i,ky,kx) w[o][i][ky][kx] *
///                     in[n][i][s*y - k/2 + ky][s*x - k/2 + kx].
TensorD brute_conv(const TensorD& input, const TensorD& weight,
                   const TensorD& bias, int stride);

/// depth_to_space written from the 2x2-cell convention.
TensorD brute_depth_to_space(const TensorD& input);

/// Transformed copy of a single image using explicit index formulas for the
/// eight flip/rotation cases (index bit 0: flip lr, bit 1: flip ud, bit 2:
/// rotate counter-clockwise), and its inverse.
Tensor brute_transform(const Tensor& image, int index);
Tensor brute_inverse(const Tensor& image, int index);

/// Eight-case self-ensemble with explicit transforms, averaged in double.
Tensor brute_self_ensemble(const std::function<Tensor(const Tensor&)>& model,
                           const Tensor& image);

/// Blocks (0, 2, 2), filters (3, 8, 8), downscale 8 / (8, 8).
NetworkSpec tiny_msrn_spec();
/// Small dense network with all three spaces.
NetworkSpec tiny_msdn_spec();

/// Four fixed 32 x 32 pairs for the overfit smoke test: band-limited
/// sinusoid mixtures as HR, a 3x3 binomial blur of each as LR.
std::vector<ImagePair> overfit_pairs();
/// Training settings used with overfit_pairs.
TrainConfig overfit_config();

/// Twenty 128 x 128 synthetic scenes, bicubic x2 degraded; the first 15 are
/// for training, the last 5 held out.
void sr_dataset(std::vector<ImagePair>& train, std::vector<ImagePair>& held_out);
/// Training settings for the desk-scale experiment.
TrainConfig sr_config(LossMode loss, std::int64_t updates);

/// Unique empty directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace mssr::testing
