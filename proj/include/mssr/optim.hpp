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
#include <span>
#include <stdexcept>
#include <vector>

#include "mssr/graph.hpp"

namespace mssr {

/// Raised when training must stop: non-finite gradients or loss.
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Step decay: initial until decay_start, then
/// initial * decay_factor^(floor((u - decay_start) / decay_interval) + 1).
struct LrSchedule {
  double initial = 1e-4;
  double decay_factor = 0.2;
  std::int64_t decay_start = 60'000'000;
  std::int64_t decay_interval = 10'000'000;

  void validate() const;
};

double lr_at(std::int64_t update, const LrSchedule& schedule);

struct AdamHyper {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// One Adam update of a flat parameter block at step t (t >= 1, already
/// incremented). Arithmetic is carried out in double and rounded once.
template <typename T>
void adam_update(std::span<T> theta, std::span<const T> grad, std::span<T> m,
                 std::span<T> v, std::int64_t t, double lr,
                 const AdamHyper& hyper = {});

/// Moments for every parameter tensor of a graph, in parameter order with
/// weight before bias.
struct AdamState {
  AdamHyper hyper;
  std::int64_t t = 0;
  std::vector<std::vector<float>> m;
  std::vector<std::vector<float>> v;

  static AdamState for_graph(const Graph& graph);
  bool matches(const Graph& graph) const;
};

/// Increments t, then updates every parameter from its gradient slot.
/// All gradients are checked first: a non-finite value throws TrainingError
/// naming the parameter and leaves parameters and state untouched.
void adam_step(AdamState& state, Graph& graph, double lr);

}  // namespace mssr
