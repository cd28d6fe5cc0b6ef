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

#include "mssr/tensor.hpp"

namespace mssr {

/// 10 log10(1 / MSE) over every element, in double; +infinity when the
/// images are identical. With `y_channel`, both 3-channel images are first
/// reduced to BT.601 luma.
double psnr(const Tensor& a, const Tensor& b, bool y_channel = false);

inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;
inline constexpr double kSsimK1 = 0.01;
inline constexpr double kSsimK2 = 0.03;

/// Mean SSIM over all valid 11x11 Gaussian windows (sigma 1.5, dynamic
/// range 1), computed per plane and averaged over planes.
double ssim(const Tensor& a, const Tensor& b);

}  // namespace mssr
