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

#include "mssr/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "mssr/rng.hpp"

namespace mssr {
namespace {

struct Probe {
  double loss = 0.0;
  std::vector<bool> relu_signs;
};

Probe run(const GraphD& graph, std::span<const TensorD> inputs,
          NodeId loss_node) {
  ForwardState<double> state;
  graph.forward(state, inputs);
  Probe p;
  p.loss = state.value(loss_node)[0];
  for (const auto& n : graph.nodes()) {
    if (n.kind != OpKind::relu) continue;
    for (double v : state.value(n.inputs[0]).data()) {
      p.relu_signs.push_back(v > 0.0);
    }
  }
  return p;
}

std::vector<std::size_t> pick(std::size_t size, std::size_t limit,
                              SeededRng& rng) {
  std::vector<std::size_t> idx(size);
  std::iota(idx.begin(), idx.end(), 0);
  if (limit == 0 || limit >= size) return idx;
  // Partial Fisher-Yates.
  for (std::size_t i = 0; i < limit; ++i) {
    const std::size_t j = i + rng.uniform_int(size - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(limit);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace

GradcheckResult gradcheck(GraphD& graph, std::span<const TensorD> inputs,
                          NodeId loss_node, const GradcheckOptions& options) {
  GradcheckResult result;
  ForwardState<double> state;
  graph.forward(state, inputs);
  graph.backward(state, loss_node);
  const auto input_ids = graph.input_nodes();

  SeededRng rng = SeededRng(options.seed).derive("gradcheck");
  std::vector<TensorD> probe_inputs(inputs.begin(), inputs.end());

  auto check_coord = [&](double& slot, double analytic,
                         const std::string& label) {
    const double saved = slot;
    slot = saved + options.step;
    const Probe plus = run(graph, probe_inputs, loss_node);
    slot = saved - options.step;
    const Probe minus = run(graph, probe_inputs, loss_node);
    slot = saved;
    if (plus.relu_signs != minus.relu_signs) {
      ++result.masked;
      return;
    }
    const double numeric = (plus.loss - minus.loss) / (2.0 * options.step);
    const double denom =
        std::max({std::abs(analytic), std::abs(numeric), 1e-8});
    const double rel = std::abs(analytic - numeric) / denom;
    ++result.checked;
    if (result.worst.empty() || rel > result.max_relative_error) {
      result.max_relative_error = rel;
      result.worst = label;
    }
  };

  if (options.check_params) {
    for (auto& p : graph.params()) {
      // Copy analytic gradients first; probing reruns forward only.
      const std::vector<double> gw(p.conv.weight.grad().begin(),
                                   p.conv.weight.grad().end());
      const std::vector<double> gb(p.conv.bias.grad().begin(),
                                   p.conv.bias.grad().end());
      for (std::size_t i :
           pick(gw.size(), options.max_coords_per_tensor, rng)) {
        check_coord(p.conv.weight[i], gw[i],
                    p.name + ".weight[" + std::to_string(i) + "]");
      }
      for (std::size_t i :
           pick(gb.size(), options.max_coords_per_tensor, rng)) {
        check_coord(p.conv.bias[i], gb[i],
                    p.name + ".bias[" + std::to_string(i) + "]");
      }
    }
  }
  if (options.check_inputs) {
    for (std::size_t k = 0; k < input_ids.size(); ++k) {
      const TensorD& g = state.grad(input_ids[k]);
      if (g.size() != probe_inputs[k].size()) continue;  // no path to loss
      for (std::size_t i :
           pick(g.size(), options.max_coords_per_tensor, rng)) {
        check_coord(probe_inputs[k][i], g[i],
                    "input" + std::to_string(k) + "[" + std::to_string(i) +
                        "]");
      }
    }
  }
  result.passed = result.max_relative_error < options.tolerance;
  return result;
}

}  // namespace mssr
