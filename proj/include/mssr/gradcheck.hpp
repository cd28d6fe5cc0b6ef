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

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>

#include "mssr/graph.hpp"

namespace mssr {

struct GradcheckOptions {
  double step = 1e-3;        // central-difference half width
  double tolerance = 1e-4;   // pass threshold on max relative error
  bool check_params = true;
  bool check_inputs = true;
  /// Coordinates probed per tensor; 0 probes all of them. Larger tensors are
  /// subsampled with a seeded stream.
  std::size_t max_coords_per_tensor = 0;
  std::uint64_t seed = 0;
};

struct GradcheckResult {
  double max_relative_error = 0.0;
  std::size_t checked = 0;
  /// Coordinates skipped because a +/- step flips the sign of some ReLU input.
  std::size_t masked = 0;
  std::string worst;  // label of the worst coordinate
  bool passed = false;
};

/// Compares backward() of a double-precision graph against central finite
/// differences of the scalar `loss_node`:
///   max |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
/// Graph parameters are restored after probing.
GradcheckResult gradcheck(GraphD& graph, std::span<const TensorD> inputs,
                          NodeId loss_node, const GradcheckOptions& options = {});

}  // namespace mssr
