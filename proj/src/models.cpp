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

#include "mssr/models.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mssr/rng.hpp"

namespace mssr {

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::baseline_r: return "baseline_r";
    case ModelKind::msrn: return "msrn";
    case ModelKind::baseline_d: return "baseline_d";
    case ModelKind::msdn: return "msdn";
    case ModelKind::custom: return "custom";
  }
  return "custom";
}

std::string_view to_string(BlockFamily family) {
  return family == BlockFamily::residual ? "residual" : "dense";
}

int NetworkSpec::size_multiple() const {
  if (has_space(2)) return 4;
  if (has_space(1)) return 2;
  return 1;
}

void NetworkSpec::validate() const {
  auto fail = [](const std::string& what) {
    throw std::invalid_argument("inconsistent network spec: " + what);
  };
  if (input_channels < 1 || output_channels < 1) fail("channel counts < 1");
  if (!has_space(0) && !has_space(1) && !has_space(2)) fail("no space present");
  for (int s = 0; s < 3; ++s) {
    if (filters[s] < 0) fail("negative filter count");
    if (blocks[s] < 0) fail("negative block count");
    if (!has_space(s) && blocks[s] != 0) {
      fail("blocks in absent space DS" + std::to_string(2 * s));
    }
  }
  if (has_space(1)) {
    if (ds2_downscale != filters[1]) {
      fail("DS2 downscale filters " + std::to_string(ds2_downscale) +
           " must equal DS2 filters " + std::to_string(filters[1]));
    }
    if (ds2_upscale < 1) fail("DS2 upscale channels < 1");
  }
  if (has_space(2)) {
    if (ds4_downscale[0] < 1 || ds4_downscale[1] != filters[2]) {
      fail("DS4 downscale filters must be positive and end at the DS4 filter "
           "count");
    }
    if (ds4_upscale[0] < 1 || ds4_upscale[1] < 1) {
      fail("DS4 upscale channels < 1");
    }
  }
}

namespace {

std::string normalize(std::string_view name) {
  std::string s(name);
  std::replace(s.begin(), s.end(), '-', '_');
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

ModelKind parse_model_kind(std::string_view name) {
  const std::string key = normalize(name);
  for (ModelKind k : {ModelKind::baseline_r, ModelKind::msrn,
                      ModelKind::baseline_d, ModelKind::msdn,
                      ModelKind::custom}) {
    if (key == to_string(k)) return k;
  }
  throw std::invalid_argument("unknown model kind '" + std::string(name) + "'");
}

BlockFamily parse_block_family(std::string_view name) {
  const std::string key = normalize(name);
  if (key == "residual") return BlockFamily::residual;
  if (key == "dense") return BlockFamily::dense;
  throw std::invalid_argument("unknown block family '" + std::string(name) +
                              "' (expected residual or dense)");
}

NetworkSpec preset(std::string_view name) {
  const std::string key = normalize(name);
  NetworkSpec spec;
  if (key == "baseline_r") {
    spec.kind = ModelKind::baseline_r;
    spec.family = BlockFamily::residual;
    spec.blocks = {32, 0, 0};
    spec.filters = {16, 0, 0};
  } else if (key == "msrn") {
    spec.kind = ModelKind::msrn;
    spec.family = BlockFamily::residual;
    spec.blocks = {0, 32, 32};
    spec.filters = {3, 96, 96};
    spec.ds2_downscale = 96;
    spec.ds4_downscale = {48, 96};
  } else if (key == "baseline_d") {
    spec.kind = ModelKind::baseline_d;
    spec.family = BlockFamily::dense;
    spec.blocks = {12, 0, 0};
    spec.filters = {16, 0, 0};
  } else if (key == "msdn") {
    spec.kind = ModelKind::msdn;
    spec.family = BlockFamily::dense;
    spec.blocks = {12, 12, 12};
    spec.filters = {12, 48, 96};
    spec.ds2_downscale = 48;
    spec.ds4_downscale = {48, 96};
  } else {
    throw std::invalid_argument("unknown model preset '" + std::string(name) +
                                "' (expected baseline-r, msrn, baseline-d or "
                                "msdn)");
  }
  return spec;
}

std::vector<std::string> preset_names() {
  return {"baseline_r", "msrn", "baseline_d", "msdn"};
}

int cross_link_count(int blocks) {
  // Link j -> n + 1 - j only when it skips at least one block.
  return std::clamp((blocks + 1) / 2 - 1, 0, 3);
}

namespace {

class Builder {
 public:
  explicit Builder(Graph& g) : g_(g) {}

  NodeId conv(NodeId x, const std::string& name, int in_c, int out_c,
              int kernel = 3, int stride = 1) {
    const ParamId p =
        g_.add_param(name, ConvParams<float>(in_c, out_c, kernel, stride));
    return g_.conv(x, p);
  }

  // Returns the body output; channels stay at `c`.
  NodeId residual_body(NodeId x, int blocks, int c, const std::string& scope) {
    for (int b = 0; b < blocks; ++b) {
      const std::string prefix = scope + ".block" + std::to_string(b + 1);
      NodeId r = conv(x, prefix + ".conv1", c, c);
      r = g_.relu(r);
      r = conv(r, prefix + ".conv2", c, c);
      x = g_.add({x, r});
    }
    return x;
  }

  // Dense blocks with cross links and a trailing 1x1 fusion back to `c`.
  NodeId dense_body(NodeId x, int blocks, int c, const std::string& scope) {
    if (blocks == 0) return x;
    const int growth = c;
    const int links = cross_link_count(blocks);
    std::vector<NodeId> outs;
    std::vector<int> out_channels;
    int channels = c;
    for (int i = 1; i <= blocks; ++i) {
      const std::string prefix = scope + ".block" + std::to_string(i);
      NodeId block_in = x;
      int in_c = channels;
      const int j = blocks + 1 - i;  // source block of a cross link, if any
      if (j >= 1 && j <= links) {
        block_in = g_.concat({x, outs[j - 1]});
        in_c += out_channels[j - 1];
      }
      NodeId body = conv(block_in, prefix + ".conv1", in_c, growth);
      body = g_.relu(body);
      body = conv(body, prefix + ".conv2", growth, growth);
      x = g_.concat({block_in, body});
      channels = in_c + growth;
      outs.push_back(x);
      out_channels.push_back(channels);
    }
    return conv(x, scope + ".fusion", channels, c, 1);
  }

  NodeId body(BlockFamily family, NodeId x, int blocks, int c,
              const std::string& scope) {
    return family == BlockFamily::residual ? residual_body(x, blocks, c, scope)
                                           : dense_body(x, blocks, c, scope);
  }

  NodeId upscale(NodeId x, const std::string& name, int in_c, int out_c) {
    return g_.depth_to_space(conv(x, name, in_c, 4 * out_c), 2);
  }

 private:
  Graph& g_;
};

}  // namespace

ComputationGraph build_topology(const NetworkSpec& spec) {
  spec.validate();
  ComputationGraph net;
  net.spec = spec;
  Graph& g = net.graph;
  Builder b(g);
  const NodeId image = g.input("image");
  const int in_c = spec.input_channels;

  std::vector<NodeId> branches;
  int merged_channels = 0;
  const bool ds0_only = !spec.has_space(1) && !spec.has_space(2);

  if (spec.has_space(0)) {
    const int f = spec.filters[0];
    NodeId h = b.conv(image, "ds0.head", in_c, f);
    h = b.body(spec.family, h, spec.blocks[0], f, "ds0");
    if (ds0_only) {
      g.set_output(b.conv(h, "tail", f, spec.output_channels));
      return net;
    }
    branches.push_back(h);
    merged_channels += f;
  }
  if (spec.has_space(1)) {
    const int f = spec.filters[1];
    NodeId h = b.conv(image, "ds2.down", in_c, spec.ds2_downscale, 3, 2);
    h = b.body(spec.family, h, spec.blocks[1], f, "ds2");
    h = b.upscale(h, "ds2.up", f, spec.ds2_upscale);
    branches.push_back(h);
    merged_channels += spec.ds2_upscale;
  }
  if (spec.has_space(2)) {
    const int f = spec.filters[2];
    NodeId h = b.conv(image, "ds4.down1", in_c, spec.ds4_downscale[0], 3, 2);
    h = b.conv(h, "ds4.down2", spec.ds4_downscale[0], spec.ds4_downscale[1], 3,
               2);
    h = b.body(spec.family, h, spec.blocks[2], f, "ds4");
    h = b.upscale(h, "ds4.up1", f, spec.ds4_upscale[0]);
    h = b.upscale(h, "ds4.up2", spec.ds4_upscale[0], spec.ds4_upscale[1]);
    branches.push_back(h);
    merged_channels += spec.ds4_upscale[1];
  }
  const NodeId merged = branches.size() == 1 ? branches.front()
                                              : g.concat(branches);
  g.set_output(b.conv(merged, "tail", merged_channels, spec.output_channels));
  return net;
}

ComputationGraph build_network(const NetworkSpec& spec, std::uint64_t seed) {
  ComputationGraph net = build_topology(spec);
  initialize_parameters(net.graph, seed);
  return net;
}

Tensor ComputationGraph::forward(const Tensor& image) const {
  const Shape& s = image.shape();
  const int m = spec.size_multiple();
  if (s.h % m != 0 || s.w % m != 0) {
    throw ShapeError("forward: spatial size " + std::to_string(s.h) + "x" +
                     std::to_string(s.w) + " must be a multiple of " +
                     std::to_string(m) + " (pad the image first)");
  }
  if (s.c != spec.input_channels) {
    throw ShapeError("forward: expected " +
                     std::to_string(spec.input_channels) + " channels, got " +
                     std::to_string(s.c));
  }
  return graph.infer(image);
}

template <typename T>
void initialize_parameters(BasicGraph<T>& graph, std::uint64_t seed) {
  SeededRng rng = SeededRng(seed).derive("init");
  for (auto& p : graph.params()) {
    const Shape& ws = p.conv.weight.shape();
    const double stddev = std::sqrt(2.0 / (static_cast<double>(ws.h) * ws.w * ws.c));
    for (auto& v : p.conv.weight.data()) v = static_cast<T>(rng.normal() * stddev);
    p.conv.bias.fill(T(0));
  }
}

template <typename T>
GraphAudit audit_graph(const BasicGraph<T>& graph) {
  GraphAudit audit;
  for (const auto& n : graph.nodes()) {
    if (n.kind == OpKind::add) ++audit.additions;
    if (n.kind == OpKind::concat) ++audit.concatenations;
  }
  return audit;
}

template <typename T>
ParameterCount count_parameters(const BasicGraph<T>& graph) {
  ParameterCount count;
  for (const auto& p : graph.params()) {
    const Shape& ws = p.conv.weight.shape();
    const std::size_t n = static_cast<std::size_t>(ws.n) * ws.c * ws.h * ws.w +
                          static_cast<std::size_t>(ws.n);
    count.per_layer.emplace_back(p.name, n);
    count.total += n;
  }
  return count;
}

template <typename T>
int receptive_field(const BasicGraph<T>& graph) {
  if (graph.nodes().empty()) return 0;
  const auto order = graph.topological_order();
  std::vector<double> field(graph.nodes().size(), 1.0);
  std::vector<double> jump(graph.nodes().size(), 1.0);
  for (NodeId id : order) {
    const OpNode& n = graph.node(id);
    if (n.inputs.empty()) continue;
    double f = 0.0;
    double j = 0.0;
    for (NodeId in : n.inputs) {
      f = std::max(f, field[in]);
      j = std::max(j, jump[in]);
    }
    switch (n.kind) {
      case OpKind::conv2d: {
        const auto& p = graph.param(n.param);
        f += (p.kernel() - 1) * j;
        j *= p.stride;
        break;
      }
      case OpKind::depth_to_space:
        j /= n.factor;
        break;
      default:
        break;
    }
    field[id] = f;
    jump[id] = j;
  }
  const NodeId out = graph.output() >= 0 ? graph.output() : order.back();
  return static_cast<int>(std::ceil(field[out] - 1e-9));
}

#define MSSR_INSTANTIATE(T)                                                 \
  template void initialize_parameters<T>(BasicGraph<T>&, std::uint64_t);    \
  template GraphAudit audit_graph<T>(const BasicGraph<T>&);                 \
  template ParameterCount count_parameters<T>(const BasicGraph<T>&);        \
  template int receptive_field<T>(const BasicGraph<T>&);

MSSR_INSTANTIATE(float)
MSSR_INSTANTIATE(double)
#undef MSSR_INSTANTIATE

}  // namespace mssr
