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

#include "mssr/graph.hpp"

#include <algorithm>
#include <deque>

namespace mssr {

std::string_view to_string(OpKind kind) {
  switch (kind) {
    case OpKind::input: return "input";
    case OpKind::conv2d: return "conv2d";
    case OpKind::relu: return "relu";
    case OpKind::add: return "add";
    case OpKind::concat: return "concat";
    case OpKind::depth_to_space: return "depth_to_space";
    case OpKind::loss: return "loss";
  }
  return "unknown";
}

template <typename T>
NodeId BasicGraph<T>::input(std::string name) {
  OpNode n;
  n.kind = OpKind::input;
  n.name = std::move(name);
  return add_node(std::move(n));
}

template <typename T>
ParamId BasicGraph<T>::add_param(std::string name, ConvParams<T> params) {
  params.validate();
  for (const auto& p : params_) {
    if (p.name == name) throw GraphError("duplicate parameter name " + name);
  }
  params_.push_back({std::move(name), std::move(params)});
  return static_cast<ParamId>(params_.size() - 1);
}

template <typename T>
NodeId BasicGraph<T>::conv(NodeId x, ParamId param, std::string name) {
  check_id(x);
  OpNode n;
  n.kind = OpKind::conv2d;
  n.inputs = {x};
  n.param = param;
  if (param < 0 || param >= static_cast<ParamId>(params_.size())) {
    throw GraphError("conv2d refers to unknown parameter " + std::to_string(param));
  }
  n.name = name.empty() ? params_[param].name : std::move(name);
  return add_node(std::move(n));
}

template <typename T>
NodeId BasicGraph<T>::relu(NodeId x) {
  check_id(x);
  OpNode n;
  n.kind = OpKind::relu;
  n.inputs = {x};
  return add_node(std::move(n));
}

template <typename T>
NodeId BasicGraph<T>::add(std::vector<NodeId> xs) {
  for (NodeId x : xs) check_id(x);
  OpNode n;
  n.kind = OpKind::add;
  n.inputs = std::move(xs);
  return add_node(std::move(n));
}

template <typename T>
NodeId BasicGraph<T>::concat(std::vector<NodeId> xs) {
  for (NodeId x : xs) check_id(x);
  OpNode n;
  n.kind = OpKind::concat;
  n.inputs = std::move(xs);
  return add_node(std::move(n));
}

template <typename T>
NodeId BasicGraph<T>::depth_to_space(NodeId x, int factor) {
  check_id(x);
  OpNode n;
  n.kind = OpKind::depth_to_space;
  n.inputs = {x};
  n.factor = factor;
  return add_node(std::move(n));
}

template <typename T>
NodeId BasicGraph<T>::loss(NodeId pred, NodeId target, LossMode mode) {
  check_id(pred);
  check_id(target);
  OpNode n;
  n.kind = OpKind::loss;
  n.inputs = {pred, target};
  n.loss_mode = mode;
  return add_node(std::move(n));
}

template <typename T>
NodeId BasicGraph<T>::add_node(OpNode node) {
  const std::size_t arity = node.inputs.size();
  switch (node.kind) {
    case OpKind::input:
      if (arity != 0) throw GraphError("input node takes no inputs");
      break;
    case OpKind::conv2d:
      if (arity != 1) throw GraphError("conv2d takes one input");
      if (node.param < 0 ||
          node.param >= static_cast<ParamId>(params_.size())) {
        throw GraphError("conv2d refers to unknown parameter " +
                         std::to_string(node.param));
      }
      break;
    case OpKind::relu:
      if (arity != 1) throw GraphError("relu takes one input");
      break;
    case OpKind::add:
      if (arity < 2) throw GraphError("add needs at least two inputs");
      break;
    case OpKind::concat:
      if (arity < 1) throw GraphError("concat needs at least one input");
      break;
    case OpKind::depth_to_space:
      if (arity != 1) throw GraphError("depth_to_space takes one input");
      if (node.factor < 1) throw GraphError("depth_to_space factor < 1");
      break;
    case OpKind::loss:
      if (arity != 2) throw GraphError("loss takes prediction and target");
      break;
  }
  nodes_.push_back(std::move(node));
  return static_cast<NodeId>(nodes_.size() - 1);
}

template <typename T>
void BasicGraph<T>::set_output(NodeId id) {
  check_id(id);
  output_ = id;
}

template <typename T>
std::vector<NodeId> BasicGraph<T>::input_nodes() const {
  std::vector<NodeId> ids;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].kind == OpKind::input) ids.push_back(static_cast<NodeId>(i));
  }
  return ids;
}

template <typename T>
void BasicGraph<T>::check_id(NodeId id) const {
  if (id < 0 || id >= static_cast<NodeId>(nodes_.size())) {
    throw GraphError("unknown node id " + std::to_string(id));
  }
}

template <typename T>
std::vector<NodeId> BasicGraph<T>::topological_order() const {
  const std::size_t count = nodes_.size();
  std::vector<int> pending(count, 0);
  std::vector<std::vector<NodeId>> consumers(count);
  for (std::size_t i = 0; i < count; ++i) {
    for (NodeId in : nodes_[i].inputs) {
      check_id(in);
      ++pending[i];
      consumers[in].push_back(static_cast<NodeId>(i));
    }
  }
  std::deque<NodeId> ready;
  for (std::size_t i = 0; i < count; ++i) {
    if (pending[i] == 0) ready.push_back(static_cast<NodeId>(i));
  }
  std::vector<NodeId> order;
  order.reserve(count);
  while (!ready.empty()) {
    const NodeId id = ready.front();
    ready.pop_front();
    order.push_back(id);
    for (NodeId c : consumers[id]) {
      if (--pending[c] == 0) ready.push_back(c);
    }
  }
  if (order.size() != count) throw GraphError("graph contains a cycle");
  return order;
}

template <typename T>
BasicTensor<T> BasicGraph<T>::evaluate(
    const OpNode& node, const std::vector<BasicTensor<T>>& values) const {
  std::vector<const BasicTensor<T>*> in;
  in.reserve(node.inputs.size());
  for (NodeId id : node.inputs) in.push_back(&values[id]);
  switch (node.kind) {
    case OpKind::input:
      throw GraphError("input node '" + node.name + "' has no bound tensor");
    case OpKind::conv2d:
      return conv2d(*in[0], params_[node.param].conv);
    case OpKind::relu:
      return mssr::relu(*in[0]);
    case OpKind::add:
      return mssr::add<T>(in);
    case OpKind::concat:
      return concat_channels<T>(in);
    case OpKind::depth_to_space:
      return mssr::depth_to_space(*in[0], node.factor);
    case OpKind::loss: {
      auto r = compute_loss(node.loss_mode, *in[0], *in[1]);
      return BasicTensor<T>({1, 1, 1, 1}, std::vector<T>{static_cast<T>(r.value)});
    }
  }
  throw GraphError("unhandled node kind");
}

template <typename T>
void BasicGraph<T>::forward(ForwardState<T>& state,
                            std::span<const BasicTensor<T>> inputs) const {
  const auto input_ids = input_nodes();
  if (inputs.size() != input_ids.size()) {
    throw GraphError("graph has " + std::to_string(input_ids.size()) +
                     " inputs, " + std::to_string(inputs.size()) + " bound");
  }
  state.order = topological_order();
  state.values.assign(nodes_.size(), BasicTensor<T>());
  state.grads.assign(nodes_.size(), BasicTensor<T>());
  for (std::size_t i = 0; i < input_ids.size(); ++i) {
    state.values[input_ids[i]] = inputs[i];
  }
  for (NodeId id : state.order) {
    if (nodes_[id].kind == OpKind::input) continue;
    state.values[id] = evaluate(nodes_[id], state.values);
  }
}

template <typename T>
BasicTensor<T> BasicGraph<T>::infer(const BasicTensor<T>& image) const {
  const auto input_ids = input_nodes();
  if (input_ids.size() != 1) {
    throw GraphError("infer needs a single-input graph");
  }
  if (output_ < 0) throw GraphError("graph has no output node");
  const auto order = topological_order();
  std::vector<int> uses(nodes_.size(), 0);
  for (const auto& n : nodes_) {
    for (NodeId in : n.inputs) ++uses[in];
  }
  std::vector<BasicTensor<T>> values(nodes_.size());
  values[input_ids[0]] = image;
  for (NodeId id : order) {
    const OpNode& n = nodes_[id];
    if (n.kind != OpKind::input) values[id] = evaluate(n, values);
    for (NodeId in : n.inputs) {
      if (--uses[in] == 0 && in != output_) values[in] = BasicTensor<T>();
    }
  }
  return std::move(values[output_]);
}

template <typename T>
void BasicGraph<T>::zero_grads() {
  for (auto& p : params_) {
    p.conv.weight.zero_grad();
    p.conv.bias.zero_grad();
  }
}

namespace {

template <typename T>
BasicTensor<T>& grad_slot(std::vector<BasicTensor<T>>& grads,
                          const std::vector<BasicTensor<T>>& values,
                          NodeId id) {
  if (grads[id].shape() != values[id].shape() || grads[id].size() == 0) {
    grads[id] = BasicTensor<T>(values[id].shape());
  }
  return grads[id];
}

template <typename T>
void accumulate(std::span<T> dst, std::span<const T> src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

}  // namespace

template <typename T>
void BasicGraph<T>::backward(ForwardState<T>& state, NodeId node,
                             const BasicTensor<T>& seed) {
  check_id(node);
  if (state.values.size() != nodes_.size()) {
    throw GraphError("backward called without a matching forward pass");
  }
  if (seed.shape() != state.values[node].shape()) {
    throw GraphError("backward seed shape " + seed.shape().str() +
                     " does not match node " + state.values[node].shape().str());
  }
  zero_grads();
  // Only nodes upstream of `node` take part.
  std::vector<bool> live(nodes_.size(), false);
  live[node] = true;
  for (auto it = state.order.rbegin(); it != state.order.rend(); ++it) {
    if (!live[*it]) continue;
    for (NodeId in : nodes_[*it].inputs) live[in] = true;
  }
  state.grads.assign(nodes_.size(), BasicTensor<T>());
  state.grads[node] = seed;

  auto& values = state.values;
  auto& grads = state.grads;
  for (auto it = state.order.rbegin(); it != state.order.rend(); ++it) {
    const NodeId id = *it;
    if (!live[id] || grads[id].size() == 0) continue;
    const OpNode& n = nodes_[id];
    const BasicTensor<T>& g = grads[id];
    switch (n.kind) {
      case OpKind::input:
        continue;  // keep input gradients
      case OpKind::conv2d: {
        auto& p = params_[n.param].conv;
        const NodeId in = n.inputs[0];
        std::span<T> gin;
        if (live[in]) gin = grad_slot(grads, values, in).data();
        conv2d_backward(values[in], p, g, gin, p.weight.grad(), p.bias.grad());
        break;
      }
      case OpKind::relu: {
        const NodeId in = n.inputs[0];
        relu_backward(values[in], g, grad_slot(grads, values, in).data());
        break;
      }
      case OpKind::add:
        for (NodeId in : n.inputs) {
          accumulate<T>(grad_slot(grads, values, in).data(), g.data());
        }
        break;
      case OpKind::concat: {
        int at = 0;
        for (NodeId in : n.inputs) {
          const int c = values[in].shape().c;
          auto part = slice_channels(g, at, at + c);
          accumulate<T>(grad_slot(grads, values, in).data(), part.data());
          at += c;
        }
        break;
      }
      case OpKind::depth_to_space: {
        const NodeId in = n.inputs[0];
        auto back = space_to_depth(g, n.factor);
        accumulate<T>(grad_slot(grads, values, in).data(), back.data());
        break;
      }
      case OpKind::loss: {
        const NodeId pred = n.inputs[0];
        auto r = compute_loss(n.loss_mode, values[pred], values[n.inputs[1]]);
        const T scale = g[0];
        auto dst = grad_slot(grads, values, pred).data();
        const auto src = r.grad.data();
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += scale * src[i];
        break;
      }
    }
    if (id != node) grads[id] = BasicTensor<T>();
  }
}

template <typename T>
void BasicGraph<T>::backward(ForwardState<T>& state, NodeId loss_node) {
  check_id(loss_node);
  if (state.values.size() != nodes_.size() ||
      state.values[loss_node].size() != 1) {
    throw GraphError("backward: node " + std::to_string(loss_node) +
                     " is not a scalar");
  }
  backward(state, loss_node, BasicTensor<T>({1, 1, 1, 1}, T(1)));
}

template class BasicGraph<float>;
template class BasicGraph<double>;

}  // namespace mssr
