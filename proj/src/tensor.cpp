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

#include "mssr/tensor.hpp"

#include <cmath>
#include <cstring>

namespace mssr {

std::string Shape::str() const {
  return std::to_string(n) + "x" + std::to_string(c) + "x" +
         std::to_string(h) + "x" + std::to_string(w);
}

template <typename T>
bool all_finite(const BasicTensor<T>& t) {
  for (T v : t.data()) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

template <typename T>
double max_abs_diff(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError("max_abs_diff: shape " + a.shape().str() + " vs " +
                     b.shape().str());
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(static_cast<double>(a[i]) -
                                     static_cast<double>(b[i])));
  }
  return worst;
}

template <typename T>
BasicTensor<T> slice_channels(const BasicTensor<T>& t, int begin, int end) {
  const Shape& s = t.shape();
  if (begin < 0 || end > s.c || begin > end) {
    throw ShapeError("slice_channels: range [" + std::to_string(begin) + ", " +
                     std::to_string(end) + ") outside " + s.str());
  }
  BasicTensor<T> out({s.n, end - begin, s.h, s.w});
  for (int n = 0; n < s.n; ++n) {
    if (end > begin) {
      std::memcpy(out.plane(n, 0), t.plane(n, begin),
                  sizeof(T) * s.plane() * (end - begin));
    }
  }
  return out;
}

template <typename T>
BasicTensor<T> crop(const BasicTensor<T>& t, int y0, int x0, int h, int w) {
  const Shape& s = t.shape();
  if (y0 < 0 || x0 < 0 || h < 0 || w < 0 || y0 + h > s.h || x0 + w > s.w) {
    throw ShapeError("crop: window (" + std::to_string(y0) + "," +
                     std::to_string(x0) + ") " + std::to_string(h) + "x" +
                     std::to_string(w) + " outside " + s.str());
  }
  BasicTensor<T> out({s.n, s.c, h, w});
  for (int n = 0; n < s.n; ++n) {
    for (int c = 0; c < s.c; ++c) {
      const T* src = t.plane(n, c);
      T* dst = out.plane(n, c);
      for (int y = 0; y < h; ++y) {
        std::memcpy(dst + static_cast<std::size_t>(y) * w,
                    src + static_cast<std::size_t>(y + y0) * s.w + x0,
                    sizeof(T) * w);
      }
    }
  }
  return out;
}

template <typename T>
BasicTensor<T> batch_item(const BasicTensor<T>& t, int index) {
  const Shape& s = t.shape();
  if (index < 0 || index >= s.n) {
    throw ShapeError("batch_item: index " + std::to_string(index) +
                     " outside " + s.str());
  }
  BasicTensor<T> out({1, s.c, s.h, s.w});
  std::memcpy(out.plane(0, 0), t.plane(index, 0), sizeof(T) * out.size());
  return out;
}

template <typename T>
BasicTensor<T> stack_batch(std::span<const BasicTensor<T>> items) {
  if (items.empty()) return {};
  Shape s = items.front().shape();
  for (const auto& item : items) {
    if (item.shape() != s || s.n != 1) {
      throw ShapeError("stack_batch: expected n=1 items of shape " + s.str() +
                       ", got " + item.shape().str());
    }
  }
  BasicTensor<T> out({static_cast<int>(items.size()), s.c, s.h, s.w});
  for (std::size_t i = 0; i < items.size(); ++i) {
    std::memcpy(out.plane(static_cast<int>(i), 0), items[i].plane(0, 0),
                sizeof(T) * items[i].size());
  }
  return out;
}

namespace {

// Mirror index with period 2(n - 1); n == 1 maps everything to 0.
int reflect_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

}  // namespace

template <typename T>
BasicTensor<T> reflect_pad(const BasicTensor<T>& t, int top, int bottom,
                           int left, int right) {
  const Shape& s = t.shape();
  if (top < 0 || bottom < 0 || left < 0 || right < 0) {
    throw ShapeError("reflect_pad: negative padding");
  }
  if ((s.h == 0 || s.w == 0) && (top + bottom + left + right) > 0) {
    throw ShapeError("reflect_pad: cannot pad an empty image");
  }
  const int oh = s.h + top + bottom;
  const int ow = s.w + left + right;
  BasicTensor<T> out({s.n, s.c, oh, ow});
  for (int n = 0; n < s.n; ++n) {
    for (int c = 0; c < s.c; ++c) {
      const T* src = t.plane(n, c);
      T* dst = out.plane(n, c);
      for (int y = 0; y < oh; ++y) {
        const int sy = reflect_index(y - top, s.h);
        for (int x = 0; x < ow; ++x) {
          dst[static_cast<std::size_t>(y) * ow + x] =
              src[static_cast<std::size_t>(sy) * s.w +
                  reflect_index(x - left, s.w)];
        }
      }
    }
  }
  return out;
}

#define MSSR_INSTANTIATE(T)                                                    \
  template bool all_finite<T>(const BasicTensor<T>&);                          \
  template double max_abs_diff<T>(const BasicTensor<T>&,                       \
                                  const BasicTensor<T>&);                      \
  template BasicTensor<T> slice_channels<T>(const BasicTensor<T>&, int, int);  \
  template BasicTensor<T> crop<T>(const BasicTensor<T>&, int, int, int, int);  \
  template BasicTensor<T> batch_item<T>(const BasicTensor<T>&, int);           \
  template BasicTensor<T> stack_batch<T>(std::span<const BasicTensor<T>>);     \
  template BasicTensor<T> reflect_pad<T>(const BasicTensor<T>&, int, int, int, \
                                         int);

MSSR_INSTANTIATE(float)
MSSR_INSTANTIATE(double)
#undef MSSR_INSTANTIATE

}  // namespace mssr
