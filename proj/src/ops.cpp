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

#include "mssr/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "mssr/parallel.hpp"

namespace mssr {

template <typename T>
ConvParams<T>::ConvParams(int in_c, int out_c, int kernel, int stride_)
    : weight({out_c, in_c, kernel, kernel}),
      bias({1, out_c, 1, 1}),
      stride(stride_) {
  validate();
}

template <typename T>
void ConvParams<T>::validate() const {
  const Shape& ws = weight.shape();
  if (ws.n < 1 || ws.c < 1) {
    throw ShapeError("conv: need at least one input and output channel, got " +
                     ws.str());
  }
  if (ws.h != ws.w || ws.h % 2 == 0) {
    throw ShapeError("conv: kernel must be square and odd, got " + ws.str());
  }
  if (stride != 1 && stride != 2) {
    throw ShapeError("conv: stride must be 1 or 2, got " +
                     std::to_string(stride));
  }
  if (bias.shape() != Shape{1, ws.n, 1, 1}) {
    throw ShapeError("conv: bias shape " + bias.shape().str() +
                     " does not match " + std::to_string(ws.n) +
                     " output channels");
  }
}

namespace {

constexpr int kLanes = 8;

inline int round_up(int v, int m) { return (v + m - 1) / m * m; }

template <typename T>
void check_conv_input(const BasicTensor<T>& input, const ConvParams<T>& p) {
  p.validate();
  const Shape& s = input.shape();
  if (s.c != p.in_channels()) {
    throw ShapeError("conv2d: input has " + std::to_string(s.c) +
                     " channels, weights expect " +
                     std::to_string(p.in_channels()));
  }
  if (p.stride == 2 && (s.h % 2 != 0 || s.w % 2 != 0)) {
    throw ShapeError("conv2d: stride 2 needs even spatial size, got " +
                     s.str());
  }
}

// Zero-padded copy of one batch item, laid out (c, hp, wp). `top`/`left` is
// the padding before the data; the remaining rows/columns up to hp/wp are
// zero as well, so lane-wide reads past the right edge stay in bounds.
template <typename T>
struct PaddedPlanes {
  std::vector<T> data;
  int c = 0;
  int hp = 0;
  int wp = 0;

  const T* plane(int ch) const {
    return data.data() + static_cast<std::size_t>(ch) * hp * wp;
  }
};

template <typename T>
PaddedPlanes<T> pad_item(const BasicTensor<T>& t, int n, int top, int left,
                         int hp, int wp) {
  const Shape& s = t.shape();
  PaddedPlanes<T> out;
  out.c = s.c;
  out.hp = hp;
  out.wp = wp;
  out.data.assign(static_cast<std::size_t>(s.c) * hp * wp, T(0));
  for (int c = 0; c < s.c; ++c) {
    const T* src = t.plane(n, c);
    T* dst = out.data.data() + static_cast<std::size_t>(c) * hp * wp;
    for (int y = 0; y < s.h; ++y) {
      std::memcpy(dst + static_cast<std::size_t>(y + top) * wp + left,
                  src + static_cast<std::size_t>(y) * s.w, sizeof(T) * s.w);
    }
  }
  return out;
}

// Weights repacked as [oc_block][ic][ky][kx][OB], zero beyond out_c.
template <typename T, int OB>
std::vector<T> pack_weights(const T* w, int out_c, int in_c, int k) {
  const int blocks = (out_c + OB - 1) / OB;
  const int kk = k * k;
  std::vector<T> packed(static_cast<std::size_t>(blocks) * in_c * kk * OB,
                        T(0));
  for (int oc = 0; oc < out_c; ++oc) {
    const int b = oc / OB;
    const int o = oc % OB;
    for (int ic = 0; ic < in_c; ++ic) {
      for (int t = 0; t < kk; ++t) {
        packed[((static_cast<std::size_t>(b) * in_c + ic) * kk + t) * OB + o] =
            w[(static_cast<std::size_t>(oc) * in_c + ic) * kk + t];
      }
    }
  }
  return packed;
}

template <typename T>
using Lanes [[gnu::vector_size(sizeof(T) * kLanes)]] = T;

template <typename T>
inline Lanes<T> load_lanes(const T* p) {
  Lanes<T> v;
  std::memcpy(&v, p, sizeof(v));
  return v;
}

template <typename T>
inline Lanes<T> load_lanes_stride2(const T* p) {
  Lanes<T> v;
  for (int j = 0; j < kLanes; ++j) v[j] = p[2 * j];
  return v;
}

// Core direct convolution over a padded item. out[oc][oy][ox] = bias[oc] +
// sum over (ic, ky, kx) in that order of w * in_pad[ic][oy*s+ky][ox*s+kx].
// Results for output channel oc go to dst + oc * oh * ow.
template <typename T, int OB, int K>
void conv_item(const PaddedPlanes<T>& in, const std::vector<T>& packed,
               const T* bias, int out_c, int stride, int oh, int ow, T* dst) {
  constexpr int kk = K * K;
  const int blocks = (out_c + OB - 1) / OB;
  const int ow_pad = round_up(ow, kLanes);
  const std::size_t in_plane = static_cast<std::size_t>(in.hp) * in.wp;
  parallel_for(static_cast<std::size_t>(blocks), [&](std::size_t b) {
    const T* wb = packed.data() + b * in.c * kk * OB;
    T bias_blk[OB];
    for (int o = 0; o < OB; ++o) {
      const int oc = static_cast<int>(b) * OB + o;
      bias_blk[o] = (bias != nullptr && oc < out_c) ? bias[oc] : T(0);
    }
    for (int oy = 0; oy < oh; ++oy) {
      for (int xc = 0; xc < ow_pad; xc += kLanes) {
        Lanes<T> acc[OB];
        for (int o = 0; o < OB; ++o) acc[o] = Lanes<T>{} + bias_blk[o];
        const T* base = in.data.data() +
                        static_cast<std::size_t>(oy * stride) * in.wp +
                        static_cast<std::size_t>(xc) * stride;
        for (int ic = 0; ic < in.c; ++ic) {
          const T* wic = wb + static_cast<std::size_t>(ic) * kk * OB;
          const T* plane = base + ic * in_plane;
          for (int ky = 0; ky < K; ++ky) {
            const T* row = plane + static_cast<std::size_t>(ky) * in.wp;
            for (int kx = 0; kx < K; ++kx) {
              const Lanes<T> v = stride == 1 ? load_lanes(row + kx)
                                             : load_lanes_stride2(row + kx);
              const T* wv = wic + (ky * K + kx) * OB;
              for (int o = 0; o < OB; ++o) acc[o] += wv[o] * v;
            }
          }
        }
        const int valid = std::min(kLanes, ow - xc);
        for (int o = 0; o < OB; ++o) {
          const int oc = static_cast<int>(b) * OB + o;
          if (oc >= out_c) break;
          T* drow = dst + (static_cast<std::size_t>(oc) * oh + oy) * ow + xc;
          for (int j = 0; j < valid; ++j) drow[j] = acc[o][j];
        }
      }
    }
  });
}

template <typename T, int OB>
void conv_item_k(const PaddedPlanes<T>& in, const T* weights, const T* bias,
                 int out_c, int k, int stride, int oh, int ow, T* dst) {
  const auto packed = pack_weights<T, OB>(weights, out_c, in.c, k);
  switch (k) {
    case 1:
      return conv_item<T, OB, 1>(in, packed, bias, out_c, stride, oh, ow, dst);
    case 3:
      return conv_item<T, OB, 3>(in, packed, bias, out_c, stride, oh, ow, dst);
    case 5:
      return conv_item<T, OB, 5>(in, packed, bias, out_c, stride, oh, ow, dst);
    default:
      throw ShapeError("conv2d: unsupported kernel size " + std::to_string(k));
  }
}

template <typename T>
void conv_item_dispatch(const PaddedPlanes<T>& in, const T* weights,
                        const T* bias, int out_c, int k, int stride, int oh,
                        int ow, T* dst) {
  if (out_c <= 4) {
    conv_item_k<T, 4>(in, weights, bias, out_c, k, stride, oh, ow, dst);
  } else {
    conv_item_k<T, 8>(in, weights, bias, out_c, k, stride, oh, ow, dst);
  }
}

template <typename T>
struct GradWeightArgs {
  const std::vector<PaddedPlanes<T>>& inputs;  // padded like the forward pass
  const std::vector<PaddedPlanes<T>>& gouts;   // width padded to lanes, zeros
  int oh;
  int ow_pad;
  int stride;
};

// grad_w[oc][ic][ky][kx] += sum_n sum_(oy,ox) gout * in_pad, reduced from
// lane-wise partial sums in a fixed order.
template <typename T, int K>
void grad_weight_kernel(const GradWeightArgs<T>& a, int out_c, int in_c,
                        std::span<T> grad_weight) {
  constexpr int kk = K * K;
  parallel_for(static_cast<std::size_t>(out_c), [&](std::size_t job) {
    const int oc = static_cast<int>(job);
    for (int ic = 0; ic < in_c; ++ic) {
      Lanes<T> acc[kk];
      for (auto& v : acc) v = Lanes<T>{};
      for (std::size_t n = 0; n < a.inputs.size(); ++n) {
        const PaddedPlanes<T>& in = a.inputs[n];
        const T* gplane = a.gouts[n].plane(oc);
        const T* iplane = in.plane(ic);
        for (int oy = 0; oy < a.oh; ++oy) {
          const T* grow = gplane + static_cast<std::size_t>(oy) * a.ow_pad;
          const T* ibase =
              iplane + static_cast<std::size_t>(oy * a.stride) * in.wp;
          for (int xc = 0; xc < a.ow_pad; xc += kLanes) {
            const Lanes<T> g = load_lanes(grow + xc);
            const T* col = ibase + static_cast<std::size_t>(xc) * a.stride;
            for (int ky = 0; ky < K; ++ky) {
              const T* row = col + static_cast<std::size_t>(ky) * in.wp;
              for (int kx = 0; kx < K; ++kx) {
                const Lanes<T> v = a.stride == 1 ? load_lanes(row + kx)
                                                 : load_lanes_stride2(row + kx);
                acc[ky * K + kx] += g * v;
              }
            }
          }
        }
      }
      T* gw = grad_weight.data() + (job * in_c + ic) * kk;
      for (int t = 0; t < kk; ++t) {
        const Lanes<T>& v = acc[t];
        gw[t] += ((v[0] + v[1]) + (v[2] + v[3])) + ((v[4] + v[5]) + (v[6] + v[7]));
      }
    }
  });
}

// Row stride of a padded buffer that keeps every lane-wide read in bounds.
inline int padded_width(int ow, int stride, int k) {
  return round_up(ow, kLanes) * stride + k;
}

}  // namespace

template <typename T>
BasicTensor<T> conv2d(const BasicTensor<T>& input, const ConvParams<T>& p) {
  check_conv_input(input, p);
  const Shape& s = input.shape();
  const int k = p.kernel();
  const int pad = k / 2;
  const int stride = p.stride;
  const int oc_n = p.out_channels();
  const int oh = conv_output_extent(s.h, stride);
  const int ow = conv_output_extent(s.w, stride);
  BasicTensor<T> out({s.n, oc_n, oh, ow});
  const int hp = (oh - 1) * stride + k;
  const int wp = padded_width(ow, stride, k);
  for (int n = 0; n < s.n; ++n) {
    const auto padded = pad_item(input, n, pad, pad, std::max(hp, s.h + pad), wp);
    conv_item_dispatch(padded, p.weight.data().data(), p.bias.data().data(),
                       oc_n, k, stride, oh, ow, out.plane(n, 0));
  }
  return out;
}

template <typename T>
void conv2d_backward(const BasicTensor<T>& input, const ConvParams<T>& p,
                     const BasicTensor<T>& grad_out, std::span<T> grad_input,
                     std::span<T> grad_weight, std::span<T> grad_bias) {
  check_conv_input(input, p);
  const Shape& s = input.shape();
  const int k = p.kernel();
  const int kk = k * k;
  const int pad = k / 2;
  const int stride = p.stride;
  const int oc_n = p.out_channels();
  const int oh = conv_output_extent(s.h, stride);
  const int ow = conv_output_extent(s.w, stride);
  if (grad_out.shape() != Shape{s.n, oc_n, oh, ow}) {
    throw ShapeError("conv2d_backward: gradient shape " +
                     grad_out.shape().str() + " does not match output");
  }

  if (!grad_input.empty()) {
    if (grad_input.size() != input.size()) {
      throw ShapeError("conv2d_backward: input gradient size mismatch");
    }
    // Input gradient is a stride-1 correlation of the (zero-dilated, for
    // stride 2) output gradient with the flipped, transposed kernel.
    std::vector<T> flipped(p.weight.size());
    const T* w = p.weight.data().data();
    for (int oc = 0; oc < oc_n; ++oc) {
      for (int ic = 0; ic < s.c; ++ic) {
        for (int t = 0; t < kk; ++t) {
          flipped[(static_cast<std::size_t>(ic) * oc_n + oc) * kk + t] =
              w[(static_cast<std::size_t>(oc) * s.c + ic) * kk + (kk - 1 - t)];
        }
      }
    }
    const int wp = padded_width(s.w, 1, k);
    const int hp = s.h + k;
    std::vector<T> tmp(static_cast<std::size_t>(s.c) * s.plane());
    for (int n = 0; n < s.n; ++n) {
      PaddedPlanes<T> g;
      g.c = oc_n;
      g.hp = hp;
      g.wp = wp;
      g.data.assign(static_cast<std::size_t>(oc_n) * hp * wp, T(0));
      for (int oc = 0; oc < oc_n; ++oc) {
        const T* src = grad_out.plane(n, oc);
        T* dst = g.data.data() + static_cast<std::size_t>(oc) * hp * wp;
        for (int oy = 0; oy < oh; ++oy) {
          T* drow = dst + static_cast<std::size_t>(oy * stride + pad) * wp + pad;
          const T* srow = src + static_cast<std::size_t>(oy) * ow;
          for (int ox = 0; ox < ow; ++ox) drow[ox * stride] = srow[ox];
        }
      }
      conv_item_dispatch<T>(g, flipped.data(), nullptr, s.c, k, 1, s.h, s.w,
                            tmp.data());
      T* gin = grad_input.data() + static_cast<std::size_t>(n) * s.c * s.plane();
      for (std::size_t i = 0; i < tmp.size(); ++i) gin[i] += tmp[i];
    }
  }

  if (!grad_weight.empty()) {
    if (grad_weight.size() != p.weight.size()) {
      throw ShapeError("conv2d_backward: weight gradient size mismatch");
    }
    const int ow_pad = round_up(ow, kLanes);
    const int hp = (oh - 1) * stride + k;
    const int wp = padded_width(ow, stride, k);
    std::vector<PaddedPlanes<T>> items;
    std::vector<PaddedPlanes<T>> gouts;
    for (int n = 0; n < s.n; ++n) {
      items.push_back(pad_item(input, n, pad, pad, std::max(hp, s.h + pad), wp));
      gouts.push_back(pad_item(grad_out, n, 0, 0, oh, ow_pad));
    }
    const GradWeightArgs<T> args{items, gouts, oh, ow_pad, stride};
    switch (k) {
      case 1: grad_weight_kernel<T, 1>(args, oc_n, s.c, grad_weight); break;
      case 3: grad_weight_kernel<T, 3>(args, oc_n, s.c, grad_weight); break;
      case 5: grad_weight_kernel<T, 5>(args, oc_n, s.c, grad_weight); break;
      default:
        throw ShapeError("conv2d: unsupported kernel size " + std::to_string(k));
    }
  }

  if (!grad_bias.empty()) {
    if (grad_bias.size() != static_cast<std::size_t>(oc_n)) {
      throw ShapeError("conv2d_backward: bias gradient size mismatch");
    }
    const std::size_t plane = grad_out.shape().plane();
    for (int oc = 0; oc < oc_n; ++oc) {
      T acc = T(0);
      for (int n = 0; n < s.n; ++n) {
        const T* g = grad_out.plane(n, oc);
        for (std::size_t i = 0; i < plane; ++i) acc += g[i];
      }
      grad_bias[oc] += acc;
    }
  }
}

template <typename T>
BasicTensor<T> relu(const BasicTensor<T>& input) {
  BasicTensor<T> out(input.shape());
  const auto src = input.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) {
    dst[i] = src[i] > T(0) ? src[i] : T(0);
  }
  return out;
}

template <typename T>
void relu_backward(const BasicTensor<T>& input, const BasicTensor<T>& grad_out,
                   std::span<T> grad_input) {
  if (grad_out.shape() != input.shape() || grad_input.size() != input.size()) {
    throw ShapeError("relu_backward: shape mismatch");
  }
  const auto src = input.data();
  const auto g = grad_out.data();
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (src[i] > T(0)) grad_input[i] += g[i];
  }
}

template <typename T>
BasicTensor<T> add(std::span<const BasicTensor<T>* const> inputs) {
  if (inputs.empty()) throw ShapeError("add: no inputs");
  const Shape& s = inputs.front()->shape();
  for (const auto* t : inputs) {
    if (t->shape() != s) {
      throw ShapeError("add: shape " + t->shape().str() + " vs " + s.str());
    }
  }
  BasicTensor<T> out = *inputs.front();
  out.set_requires_grad(false);
  out.clear_grad();
  auto dst = out.data();
  for (std::size_t k = 1; k < inputs.size(); ++k) {
    const auto src = inputs[k]->data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  }
  return out;
}

template <typename T>
BasicTensor<T> concat_channels(std::span<const BasicTensor<T>* const> inputs) {
  if (inputs.empty()) throw ShapeError("concat_channels: no inputs");
  const Shape& first = inputs.front()->shape();
  int channels = 0;
  for (const auto* t : inputs) {
    const Shape& s = t->shape();
    if (s.n != first.n || s.h != first.h || s.w != first.w) {
      throw ShapeError("concat_channels: shape " + s.str() +
                       " disagrees with " + first.str() +
                       " outside the channel axis");
    }
    channels += s.c;
  }
  BasicTensor<T> out({first.n, channels, first.h, first.w});
  for (int n = 0; n < first.n; ++n) {
    int at = 0;
    for (const auto* t : inputs) {
      const int c = t->shape().c;
      if (c > 0) {
        std::memcpy(out.plane(n, at), t->plane(n, 0),
                    sizeof(T) * first.plane() * c);
      }
      at += c;
    }
  }
  return out;
}

template <typename T>
BasicTensor<T> depth_to_space(const BasicTensor<T>& input, int factor) {
  const Shape& s = input.shape();
  if (factor < 1) throw ShapeError("depth_to_space: factor must be >= 1");
  const int block = factor * factor;
  if (s.c % block != 0) {
    throw ShapeError("depth_to_space: " + std::to_string(s.c) +
                     " channels not divisible by " + std::to_string(block));
  }
  const int oc_n = s.c / block;
  const int oh = s.h * factor;
  const int ow = s.w * factor;
  BasicTensor<T> out({s.n, oc_n, oh, ow});
  for (int n = 0; n < s.n; ++n) {
    for (int q = 0; q < oc_n; ++q) {
      T* dst = out.plane(n, q);
      for (int dy = 0; dy < factor; ++dy) {
        for (int dx = 0; dx < factor; ++dx) {
          const T* src = input.plane(n, q * block + dy * factor + dx);
          for (int y = 0; y < s.h; ++y) {
            T* drow = dst + static_cast<std::size_t>(y * factor + dy) * ow + dx;
            const T* srow = src + static_cast<std::size_t>(y) * s.w;
            for (int x = 0; x < s.w; ++x) drow[x * factor] = srow[x];
          }
        }
      }
    }
  }
  return out;
}

template <typename T>
BasicTensor<T> space_to_depth(const BasicTensor<T>& input, int factor) {
  const Shape& s = input.shape();
  if (factor < 1) throw ShapeError("space_to_depth: factor must be >= 1");
  if (s.h % factor != 0 || s.w % factor != 0) {
    throw ShapeError("space_to_depth: spatial size " + s.str() +
                     " not divisible by " + std::to_string(factor));
  }
  const int block = factor * factor;
  const int oh = s.h / factor;
  const int ow = s.w / factor;
  BasicTensor<T> out({s.n, s.c * block, oh, ow});
  for (int n = 0; n < s.n; ++n) {
    for (int q = 0; q < s.c; ++q) {
      const T* src = input.plane(n, q);
      for (int dy = 0; dy < factor; ++dy) {
        for (int dx = 0; dx < factor; ++dx) {
          T* dst = out.plane(n, q * block + dy * factor + dx);
          for (int y = 0; y < oh; ++y) {
            const T* srow =
                src + static_cast<std::size_t>(y * factor + dy) * s.w + dx;
            T* drow = dst + static_cast<std::size_t>(y) * ow;
            for (int x = 0; x < ow; ++x) drow[x] = srow[x * factor];
          }
        }
      }
    }
  }
  return out;
}

LossMode parse_loss_mode(std::string_view name) {
  if (name == "l1" || name == "L1") return LossMode::l1;
  if (name == "l2" || name == "L2") return LossMode::l2;
  throw std::invalid_argument("unknown loss mode '" + std::string(name) +
                              "' (expected l1 or l2)");
}

std::string_view to_string(LossMode mode) {
  return mode == LossMode::l1 ? "l1" : "l2";
}

template <typename T>
LossResult<T> compute_loss(LossMode mode, const BasicTensor<T>& pred,
                           const BasicTensor<T>& target) {
  if (pred.shape() != target.shape()) {
    throw ShapeError("loss: prediction " + pred.shape().str() +
                     " vs target " + target.shape().str());
  }
  LossResult<T> result;
  result.grad = BasicTensor<T>(pred.shape());
  const std::size_t count = pred.size();
  if (count == 0) return result;
  const auto p = pred.data();
  const auto t = target.data();
  auto g = result.grad.data();
  const double inv = 1.0 / static_cast<double>(count);
  double sum = 0.0;
  if (mode == LossMode::l1) {
    const T step = static_cast<T>(inv);
    for (std::size_t i = 0; i < count; ++i) {
      const double d = static_cast<double>(p[i]) - static_cast<double>(t[i]);
      sum += std::abs(d);
      g[i] = d > 0 ? step : (d < 0 ? -step : T(0));
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      const double d = static_cast<double>(p[i]) - static_cast<double>(t[i]);
      sum += d * d;
      g[i] = static_cast<T>(2.0 * d * inv);
    }
  }
  result.value = sum * inv;
  return result;
}

#define MSSR_INSTANTIATE(T)                                                   \
  template struct ConvParams<T>;                                              \
  template BasicTensor<T> conv2d<T>(const BasicTensor<T>&,                    \
                                    const ConvParams<T>&);                    \
  template void conv2d_backward<T>(const BasicTensor<T>&,                     \
                                   const ConvParams<T>&,                      \
                                   const BasicTensor<T>&, std::span<T>,       \
                                   std::span<T>, std::span<T>);               \
  template BasicTensor<T> relu<T>(const BasicTensor<T>&);                     \
  template void relu_backward<T>(const BasicTensor<T>&, const BasicTensor<T>&, \
                                 std::span<T>);                               \
  template BasicTensor<T> add<T>(std::span<const BasicTensor<T>* const>);     \
  template BasicTensor<T> concat_channels<T>(                                 \
      std::span<const BasicTensor<T>* const>);                                \
  template BasicTensor<T> depth_to_space<T>(const BasicTensor<T>&, int);      \
  template BasicTensor<T> space_to_depth<T>(const BasicTensor<T>&, int);      \
  template LossResult<T> compute_loss<T>(LossMode, const BasicTensor<T>&,     \
                                         const BasicTensor<T>&);

MSSR_INSTANTIATE(float)
MSSR_INSTANTIATE(double)
#undef MSSR_INSTANTIATE

}  // namespace mssr
