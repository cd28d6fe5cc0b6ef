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

// Multi-scale super-resolution networks.
//
// A network processes the same-size input in up to three spaces: DS0 (full
// resolution), DS2 (one stride-2 downscale) and DS4 (two). Each present
// space runs a body of residual or dense blocks; DS2/DS4 features are brought
// back to full resolution with sub-pixel convolutions, the branches are
// concatenated once and a final 3x3 convolution produces the RGB output.
// A network with only the DS0 space ends in a plain tail convolution.

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mssr/graph.hpp"

namespace mssr {

enum class ModelKind { baseline_r, msrn, baseline_d, msdn, custom };
enum class BlockFamily { residual, dense };

std::string_view to_string(ModelKind kind);
std::string_view to_string(BlockFamily family);
/// Inverse of to_string; hyphens and upper case are accepted.
ModelKind parse_model_kind(std::string_view name);
BlockFamily parse_block_family(std::string_view name);

struct NetworkSpec {
  ModelKind kind = ModelKind::custom;
  BlockFamily family = BlockFamily::residual;
  /// Blocks per space (DS0, DS2, DS4).
  std::array<int, 3> blocks{0, 0, 0};
  /// Filters per space; 0 marks an absent space.
  std::array<int, 3> filters{0, 0, 0};
  /// Filters of the DS2 downscale conv and of the two DS4 downscale convs.
  int ds2_downscale = 0;
  std::array<int, 2> ds4_downscale{0, 0};
  /// Post-shuffle channels: DS2 -> DS0, and DS4 -> DS2 -> DS0.
  int ds2_upscale = 48;
  std::array<int, 2> ds4_upscale{48, 24};
  int input_channels = 3;
  int output_channels = 3;

  bool has_space(int space) const { return filters.at(space) > 0; }
  /// Spatial sizes must be multiples of this (2 per downscale stage).
  int size_multiple() const;
  /// Throws std::invalid_argument on an inconsistent spec.
  void validate() const;

  bool operator==(const NetworkSpec&) const = default;
};

/// Table presets: baseline_r, msrn, baseline_d, msdn. Hyphenated spellings
/// (baseline-r) are accepted too.
NetworkSpec preset(std::string_view name);
std::vector<std::string> preset_names();

/// Dense-body cross links: block j feeds the input of block n + 1 - j for
/// j = 1..cross_link_count(n). Twelve blocks give three links.
int cross_link_count(int blocks);

/// A built network. The graph has a single input node and its output node
/// set; parameters are initialized from the "init" substream of `seed`.
struct ComputationGraph {
  NetworkSpec spec;
  Graph graph;

  /// Forward pass; h and w must be multiples of spec.size_multiple().
  Tensor forward(const Tensor& image) const;
};

ComputationGraph build_network(const NetworkSpec& spec, std::uint64_t seed = 0);

/// Same graph with all weights and biases left at zero.
ComputationGraph build_topology(const NetworkSpec& spec);

/// Re-draws every weight from N(0, 2 / (k^2 in_c)) and zeroes the biases.
template <typename T>
void initialize_parameters(BasicGraph<T>& graph, std::uint64_t seed);

struct GraphAudit {
  int additions = 0;
  int concatenations = 0;
};

template <typename T>
GraphAudit audit_graph(const BasicGraph<T>& graph);

struct ParameterCount {
  std::size_t total = 0;
  std::vector<std::pair<std::string, std::size_t>> per_layer;
};

/// Sum of out*in*k*k + out over convolutions.
template <typename T>
ParameterCount count_parameters(const BasicGraph<T>& graph);

/// Conservative receptive field (in input pixels) of the output node, taking
/// the maximum over all paths; each conv adds (k - 1) times the accumulated
/// input-pixel stride, depth_to_space divides that stride by its factor.
template <typename T>
int receptive_field(const BasicGraph<T>& graph);

}  // namespace mssr
