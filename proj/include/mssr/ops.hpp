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
#include <string_view>

#include "mssr/tensor.hpp"

namespace mssr {

/// Weights (out_c, in_c, k, k), bias (1, out_c, 1, 1) and stride of a
/// zero-padded "same" convolution. k is odd, stride is 1 or 2.
template <typename T>
struct ConvParams {
  BasicTensor<T> weight;
  BasicTensor<T> bias;
  int stride = 1;

  ConvParams() = default;
  ConvParams(int in_c, int out_c, int kernel, int stride_);

  int out_channels() const { return weight.shape().n; }
  int in_channels() const { return weight.shape().c; }
  int kernel() const { return weight.shape().h; }
  std::size_t parameter_count() const { return weight.size() + bias.size(); }

  /// Throws ShapeError unless the invariants above hold.
  void validate() const;

  template <typename U>
  ConvParams<U> cast() const {
    ConvParams<U> p;
    p.weight = weight.template cast<U>();
    p.bias = bias.template cast<U>();
    p.stride = stride;
    return p;
  }
};

/// Output extent of a stride-s "same" convolution: ceil(extent / s).
inline int conv_output_extent(int extent, int stride) {
  return (extent + stride - 1) / stride;
}

/// Direct convolution. Every output element is accumulated as bias, then
/// input channels in order, each over the kernel in row-major order; taps
/// that fall in the zero padding are skipped.
template <typename T>
BasicTensor<T> conv2d(const BasicTensor<T>& input, const ConvParams<T>& params);

/// Accumulates (+=) gradients of a conv2d call. Any output span may be empty
/// to skip that gradient.
template <typename T>
void conv2d_backward(const BasicTensor<T>& input, const ConvParams<T>& params,
                     const BasicTensor<T>& grad_out, std::span<T> grad_input,
                     std::span<T> grad_weight, std::span<T> grad_bias);

template <typename T>
BasicTensor<T> relu(const BasicTensor<T>& input);

/// d/dx relu is 1 for x > 0 and 0 otherwise (including x == 0).
template <typename T>
void relu_backward(const BasicTensor<T>& input, const BasicTensor<T>& grad_out,
                   std::span<T> grad_input);

template <typename T>
BasicTensor<T> add(std::span<const BasicTensor<T>* const> inputs);

template <typename T>
BasicTensor<T> concat_channels(std::span<const BasicTensor<T>* const> inputs);

/// Moves channel block (f*f*q + f*dy + dx) of each input pixel to output
/// channel q at sub-pixel (dy, dx). For f = 2: channels 4q..4q+3 become the
/// top-left, top-right, bottom-left, bottom-right pixels of each 2x2 cell.
template <typename T>
BasicTensor<T> depth_to_space(const BasicTensor<T>& input, int factor);

/// Exact inverse of depth_to_space.
template <typename T>
BasicTensor<T> space_to_depth(const BasicTensor<T>& input, int factor);

enum class LossMode { l1, l2 };

LossMode parse_loss_mode(std::string_view name);
std::string_view to_string(LossMode mode);

template <typename T>
struct LossResult {
  double value = 0.0;
  BasicTensor<T> grad;  // d loss / d pred
};

/// L1: mean |pred - target|, gradient sign(diff)/N with sign(0) = 0.
/// L2: mean (pred - target)^2, gradient 2 diff / N.
template <typename T>
LossResult<T> compute_loss(LossMode mode, const BasicTensor<T>& pred,
                           const BasicTensor<T>& target);

}  // namespace mssr
