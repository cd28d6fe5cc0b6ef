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

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mssr {

/// Thrown for violated operator preconditions (shape or argument errors).
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Rank-4 NCHW extent.
struct Shape {
  int n = 0;
  int c = 0;
  int h = 0;
  int w = 0;

  std::size_t size() const {
    return static_cast<std::size_t>(n) * c * h * w;
  }
  std::size_t plane() const { return static_cast<std::size_t>(h) * w; }
  bool operator==(const Shape&) const = default;

  std::string str() const;
};

/// Dense NCHW tensor with an optional gradient buffer of the same shape.
///
/// Data is stored row-major in (n, c, h, w) order. The gradient slot is empty
/// until `ensure_grad()` is called; after that it always mirrors `shape()`.
template <typename T>
class BasicTensor {
 public:
  using value_type = T;

  BasicTensor() = default;
  explicit BasicTensor(Shape shape, T fill = T(0))
      : shape_(shape), data_(checked_size(shape), fill) {}
  BasicTensor(Shape shape, std::vector<T> data)
      : shape_(shape), data_(std::move(data)) {
    if (data_.size() != checked_size(shape)) {
      throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                       " does not match shape " + shape.str());
    }
  }

  const Shape& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  std::vector<T>& storage() { return data_; }
  const std::vector<T>& storage() const { return data_; }

  T& at(int n, int c, int y, int x) { return data_[offset(n, c, y, x)]; }
  const T& at(int n, int c, int y, int x) const {
    return data_[offset(n, c, y, x)];
  }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  /// Pointer to the first element of plane (n, c).
  T* plane(int n, int c) { return data_.data() + plane_offset(n, c); }
  const T* plane(int n, int c) const {
    return data_.data() + plane_offset(n, c);
  }

  bool requires_grad() const { return requires_grad_; }
  void set_requires_grad(bool on) { requires_grad_ = on; }

  bool has_grad() const { return grad_.size() == data_.size(); }
  void ensure_grad() {
    if (grad_.size() != data_.size()) grad_.assign(data_.size(), T(0));
  }
  void zero_grad() { grad_.assign(data_.size(), T(0)); }
  void clear_grad() { grad_.clear(); }
  std::span<T> grad() { return grad_; }
  std::span<const T> grad() const { return grad_; }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  template <typename U>
  BasicTensor<U> cast() const {
    std::vector<U> out(data_.begin(), data_.end());
    BasicTensor<U> t(shape_, std::move(out));
    t.set_requires_grad(requires_grad_);
    return t;
  }

 private:
  static std::size_t checked_size(const Shape& s) {
    if (s.n < 0 || s.c < 0 || s.h < 0 || s.w < 0) {
      throw ShapeError("negative tensor extent " + s.str());
    }
    return s.size();
  }
  std::size_t plane_offset(int n, int c) const {
    return (static_cast<std::size_t>(n) * shape_.c + c) * shape_.plane();
  }
  std::size_t offset(int n, int c, int y, int x) const {
    return plane_offset(n, c) + static_cast<std::size_t>(y) * shape_.w + x;
  }

  Shape shape_;
  std::vector<T> data_;
  bool requires_grad_ = false;
  std::vector<T> grad_;
};

using Tensor = BasicTensor<float>;
using TensorD = BasicTensor<double>;

/// True when every element is finite.
template <typename T>
bool all_finite(const BasicTensor<T>& t);

/// Largest |a - b| over all elements; shapes must match.
template <typename T>
double max_abs_diff(const BasicTensor<T>& a, const BasicTensor<T>& b);

/// Channel range [begin, end) of every batch item, as a new tensor.
template <typename T>
BasicTensor<T> slice_channels(const BasicTensor<T>& t, int begin, int end);

/// Spatial window [y0, y0 + h) x [x0, x0 + w); must lie inside the tensor.
template <typename T>
BasicTensor<T> crop(const BasicTensor<T>& t, int y0, int x0, int h, int w);

/// Batch item `index` as an n = 1 tensor.
template <typename T>
BasicTensor<T> batch_item(const BasicTensor<T>& t, int index);

/// Stacks n = 1 tensors of identical shape along the batch axis.
template <typename T>
BasicTensor<T> stack_batch(std::span<const BasicTensor<T>> items);

/// Pads the spatial dims by mirror reflection (edge pixel not repeated).
/// Padding wider than the image keeps reflecting back and forth.
template <typename T>
BasicTensor<T> reflect_pad(const BasicTensor<T>& t, int top, int bottom,
                           int left, int right);

}  // namespace mssr
