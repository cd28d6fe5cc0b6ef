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

#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mssr/ops.hpp"
#include "mssr/tensor.hpp"

namespace mssr {

class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class OpKind { input, conv2d, relu, add, concat, depth_to_space, loss };

std::string_view to_string(OpKind kind);

using NodeId = int;
using ParamId = int;

struct OpNode {
  OpKind kind = OpKind::input;
  std::vector<NodeId> inputs;
  ParamId param = -1;  // conv2d
  int factor = 2;      // depth_to_space
  LossMode loss_mode = LossMode::l1;
  std::string name;
};

/// Activations (and, after backward, node gradients) of one execution.
template <typename T>
struct ForwardState {
  std::vector<BasicTensor<T>> values;
  std::vector<BasicTensor<T>> grads;
  std::vector<NodeId> order;

  const BasicTensor<T>& value(NodeId id) const { return values.at(id); }
  const BasicTensor<T>& grad(NodeId id) const { return grads.at(id); }
};

/// Operator DAG over a set of named convolution parameters.
///
/// Builder methods only reference existing nodes, so graphs built through
/// them are acyclic; `add_node` accepts arbitrary references and cycles are
/// reported when an execution order is requested.
template <typename T>
class BasicGraph {
 public:
  struct NamedParam {
    std::string name;
    ConvParams<T> conv;
  };

  NodeId input(std::string name);
  ParamId add_param(std::string name, ConvParams<T> params);
  NodeId conv(NodeId x, ParamId param, std::string name = {});
  NodeId relu(NodeId x);
  NodeId add(std::vector<NodeId> xs);
  NodeId concat(std::vector<NodeId> xs);
  NodeId depth_to_space(NodeId x, int factor);
  NodeId loss(NodeId pred, NodeId target, LossMode mode);
  NodeId add_node(OpNode node);

  void set_output(NodeId id);
  NodeId output() const { return output_; }

  const std::vector<OpNode>& nodes() const { return nodes_; }
  const OpNode& node(NodeId id) const { return nodes_.at(id); }
  std::vector<NodeId> input_nodes() const;

  std::vector<NamedParam>& params() { return params_; }
  const std::vector<NamedParam>& params() const { return params_; }
  ConvParams<T>& param(ParamId id) { return params_.at(id).conv; }
  const ConvParams<T>& param(ParamId id) const { return params_.at(id).conv; }

  /// Kahn order; throws GraphError on cycles or dangling references.
  std::vector<NodeId> topological_order() const;

  /// Evaluates every node, retaining activations for backward. `inputs`
  /// bind to input nodes in creation order.
  void forward(ForwardState<T>& state,
               std::span<const BasicTensor<T>> inputs) const;

  /// Single-input evaluation of the output node; intermediate activations are
  /// released as soon as their last consumer has run.
  BasicTensor<T> infer(const BasicTensor<T>& image) const;

  /// Reverse-mode pass seeded with d(out)/d(node) = seed. Parameter gradients
  /// are zeroed first, then accumulated, so parameters with no path to `node`
  /// end up with zero gradient. Input-node gradients are kept in state.grads.
  void backward(ForwardState<T>& state, NodeId node, const BasicTensor<T>& seed);

  /// backward() from a scalar loss node with unit seed.
  void backward(ForwardState<T>& state, NodeId loss_node);

  void zero_grads();

  template <typename U>
  BasicGraph<U> cast() const {
    BasicGraph<U> g;
    for (const auto& p : params_) g.add_param(p.name, p.conv.template cast<U>());
    for (const auto& n : nodes_) g.add_node(n);
    if (output_ >= 0) g.set_output(output_);
    return g;
  }

 private:
  void check_id(NodeId id) const;
  BasicTensor<T> evaluate(const OpNode& node,
                          const std::vector<BasicTensor<T>>& values) const;

  std::vector<OpNode> nodes_;
  std::vector<NamedParam> params_;
  NodeId output_ = -1;
};

using Graph = BasicGraph<float>;
using GraphD = BasicGraph<double>;

}  // namespace mssr
