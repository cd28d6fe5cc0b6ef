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

#include "mssr/tensor.hpp"

namespace mssr {

/// Procedural RGB test scene (1 x 3 x h x w, 8-bit quantized values):
/// a colored gradient background with soft-edged ellipses and rectangles,
/// oriented stripe textures and mild grain. Fully determined by `seed`.
Tensor synthetic_scene(int h, int w, std::uint64_t seed);

/// Same-size degraded copy: bicubic shrink by `factor`, bicubic enlarge back,
/// then 8-bit quantization.
Tensor bicubic_degrade(const Tensor& hr, int factor = 2);

}  // namespace mssr
