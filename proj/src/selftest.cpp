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

#include "mssr/selftest.hpp"

#include <cmath>
#include <filesystem>
#include <functional>
#include <ostream>
#include <sstream>

#include <unistd.h>

#include "mssr/checkpoint.hpp"
#include "mssr/eval.hpp"
#include "mssr/gradcheck.hpp"
#include "mssr/metrics.hpp"
#include "mssr/models.hpp"
#include "mssr/rng.hpp"

namespace mssr {

namespace {

template <typename T>
BasicTensor<T> random_fill(Shape shape, SeededRng& rng, double margin = 0.0) {
  BasicTensor<T> t(shape);
  for (auto& v : t.storage()) {
    const double mag = margin + (1.0 - margin) * rng.uniform();
    v = static_cast<T>(rng.coin() ? mag : -mag);
  }
  return t;
}

std::string num(double v) {
  std::ostringstream s;
  s.precision(3);
  s << v;
  return s.str();
}

SelfTestCase conv_oracle() {
  SeededRng rng(7);
  double worst = 0.0;
  for (int k : {1, 3, 5}) {
    for (int stride : {1, 2}) {
      const Tensor x = random_fill<float>({2, 3, 6, 8}, rng);
      ConvParams<float> p(3, 5, k, stride);
      p.weight = random_fill<float>(p.weight.shape(), rng);
      p.bias = random_fill<float>(p.bias.shape(), rng);
      const Tensor y = conv2d(x, p);
      const Shape& s = y.shape();
      for (int n = 0; n < s.n; ++n) {
        for (int o = 0; o < s.c; ++o) {
          for (int oy = 0; oy < s.h; ++oy) {
            for (int ox = 0; ox < s.w; ++ox) {
              double acc = p.bias[o];
              for (int i = 0; i < 3; ++i) {
                for (int ky = 0; ky < k; ++ky) {
                  for (int kx = 0; kx < k; ++kx) {
                    const int iy = stride * oy - k / 2 + ky;
                    const int ix = stride * ox - k / 2 + kx;
                    if (iy < 0 || iy >= 6 || ix < 0 || ix >= 8) continue;
                    acc += double(p.weight.at(o, i, ky, kx)) * x.at(n, i, iy, ix);
                  }
                }
              }
              worst = std::max(worst, std::abs(acc - y.at(n, o, oy, ox)));
            }
          }
        }
      }
    }
  }
  return {"conv2d matches direct loops", worst < 1e-5, "max abs " + num(worst)};
}

// Builds a double graph around one op and checks it with finite differences.
SelfTestCase op_gradcheck(const std::string& name,
                          const std::function<NodeId(GraphD&, NodeId, SeededRng&)>& body,
                          Shape in_shape, Shape out_shape, double margin) {
  double worst = 0.0;
  bool ok = true;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SeededRng rng(seed);
    GraphD g;
    const NodeId x = g.input("x");
    const NodeId y = body(g, x, rng);
    const NodeId t = g.input("target");
    const NodeId loss = g.loss(y, t, LossMode::l2);
    const std::vector<TensorD> inputs{random_fill<double>(in_shape, rng, margin),
                                      random_fill<double>(out_shape, rng)};
    const GradcheckResult r = gradcheck(g, inputs, loss);
    worst = std::max(worst, r.max_relative_error);
    ok = ok && r.passed;
  }
  return {"gradcheck " + name, ok, "max rel " + num(worst)};
}

SelfTestCase network_gradcheck(const std::string& name, const NetworkSpec& spec) {
  double worst = 0.0;
  bool ok = true;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    ComputationGraph net = build_network(spec, seed);
    GraphD g = net.graph.cast<double>();
    const NodeId target = g.input("target");
    const NodeId loss = g.loss(g.output(), target, LossMode::l2);
    SeededRng rng(seed + 100);
    const std::vector<TensorD> inputs{random_fill<double>({1, 3, 8, 8}, rng),
                                      random_fill<double>({1, 3, 8, 8}, rng)};
    GradcheckOptions opt;
    opt.max_coords_per_tensor = 6;
    opt.seed = seed;
    const GradcheckResult r = gradcheck(g, inputs, loss, opt);
    worst = std::max(worst, r.max_relative_error);
    ok = ok && r.passed;
  }
  return {"gradcheck " + name, ok, "max rel " + num(worst)};
}

SelfTestCase audits() {
  struct Row {
    const char* name;
    int additions;
    int concatenations;
  };
  bool ok = true;
  std::string detail;
  for (const Row& row : {Row{"baseline_r", 32, 0}, Row{"msrn", 64, 1},
                         Row{"baseline_d", 0, 15}, Row{"msdn", 0, 46}}) {
    const GraphAudit a = audit_graph(build_topology(preset(row.name)).graph);
    ok = ok && a.additions == row.additions &&
         a.concatenations == row.concatenations;
    detail += std::string(row.name) + "=(" + std::to_string(a.additions) + "," +
              std::to_string(a.concatenations) + ") ";
  }
  return {"preset audits", ok, detail};
}

SelfTestCase metrics() {
  Tensor a({1, 3, 16, 16}, 0.25f);
  Tensor b = a;
  for (auto& v : b.storage()) v += 1.0f / 255.0f;
  const double p = psnr(a, b);
  const double s_same = ssim(a, a);
  const double s_const = ssim(Tensor({1, 1, 16, 16}, 0.0f), Tensor({1, 1, 16, 16}, 1.0f));
  const double expect = 1e-4 / (1.0 + 1e-4);
  const bool ok = std::abs(p - 20.0 * std::log10(255.0)) < 1e-3 && s_same == 1.0 &&
                  std::abs(s_const - expect) < 1e-6 && std::isinf(psnr(a, a));
  return {"metric closed forms", ok,
          "psnr " + num(p) + ", ssim(I,I) " + num(s_same) + ", ssim(0,1) " +
              num(s_const)};
}

SelfTestCase ensemble_and_tiling() {
  SeededRng rng(11);
  const Tensor img = random_fill<float>({1, 3, 12, 20}, rng);
  const Tensor same = self_ensemble([](const Tensor& x) { return x; }, img);
  const double e = max_abs_diff(same, img);

  NetworkSpec spec;
  spec.family = BlockFamily::residual;
  spec.blocks = {0, 1, 1};
  spec.filters = {3, 4, 4};
  spec.ds2_downscale = 4;
  spec.ds4_downscale = {4, 4};
  spec.ds2_upscale = 4;
  spec.ds4_upscale = {4, 4};
  const ComputationGraph net = build_network(spec, 3);
  const int overlap = minimum_overlap(net);
  const Tensor big = random_fill<float>({1, 3, 2 * overlap + 24, 2 * overlap + 20}, rng);
  const Tensor direct = run_network(net, big);
  const Tensor tiled = tiled_infer(net, big, {overlap, overlap});
  const double t = max_abs_diff(direct, tiled);
  return {"self-ensemble identity and tiling", e <= 1e-6 && t < 1e-5,
          "ensemble " + num(e) + ", tiling " + num(t)};
}

SelfTestCase checkpoint_roundtrip() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() /
                       ("mssr-selftest-" + std::to_string(::getpid()));
  fs::remove_all(dir);
  NetworkSpec spec;
  spec.family = BlockFamily::dense;
  spec.blocks = {1, 1, 0};
  spec.filters = {4, 4, 0};
  spec.ds2_downscale = 4;
  spec.ds2_upscale = 4;
  const ComputationGraph net = build_network(spec, 5);
  SeededRng rng(5);
  const Tensor x = random_fill<float>({1, 3, 8, 8}, rng);
  bool ok = false;
  std::string detail;
  try {
    save_checkpoint(capture_checkpoint(net, nullptr, 0), dir);
    const ComputationGraph back = restore_network(load_checkpoint(dir));
    const Tensor y0 = net.forward(x);
    const Tensor y1 = back.forward(x);
    ok = y0.storage() == y1.storage();
    detail = ok ? "bit-identical forward" : "forward differs";
  } catch (const std::exception& e) {
    detail = e.what();
  }
  fs::remove_all(dir);
  return {"checkpoint roundtrip", ok, detail};
}

}  // namespace

std::vector<SelfTestCase> run_self_test(std::ostream& out) {
  using Body = std::function<NodeId(GraphD&, NodeId, SeededRng&)>;
  const auto conv_body = [](int in_c, int out_c, int k, int stride) -> Body {
    return [=](GraphD& g, NodeId x, SeededRng& rng) {
      ConvParams<double> p(in_c, out_c, k, stride);
      p.weight = random_fill<double>(p.weight.shape(), rng);
      p.bias = random_fill<double>(p.bias.shape(), rng);
      return g.conv(x, g.add_param("c", std::move(p)));
    };
  };

  std::vector<std::function<SelfTestCase()>> cases = {
      conv_oracle,
      [&] { return op_gradcheck("conv2d stride 1", conv_body(2, 3, 3, 1), {1, 2, 5, 5}, {1, 3, 5, 5}, 0.0); },
      [&] { return op_gradcheck("conv2d stride 2", conv_body(2, 3, 3, 2), {1, 2, 6, 6}, {1, 3, 3, 3}, 0.0); },
      [] {
        return op_gradcheck(
            "relu", [](GraphD& g, NodeId x, SeededRng&) { return g.relu(x); },
            {1, 2, 4, 4}, {1, 2, 4, 4}, 1e-3);
      },
      [] {
        return op_gradcheck(
            "add+concat",
            [](GraphD& g, NodeId x, SeededRng&) {
              return g.concat({g.add({x, x}), x});
            },
            {1, 2, 3, 3}, {1, 4, 3, 3}, 0.0);
      },
      [] {
        return op_gradcheck(
            "depth_to_space",
            [](GraphD& g, NodeId x, SeededRng&) { return g.depth_to_space(x, 2); },
            {1, 8, 2, 3}, {1, 2, 4, 6}, 0.0);
      },
      [] {
        NetworkSpec s;
        s.family = BlockFamily::residual;
        s.blocks = {0, 1, 1};
        s.filters = {3, 4, 4};
        s.ds2_downscale = 4;
        s.ds4_downscale = {4, 4};
        s.ds2_upscale = 4;
        s.ds4_upscale = {4, 4};
        return network_gradcheck("tiny residual network", s);
      },
      [] {
        NetworkSpec s;
        s.family = BlockFamily::dense;
        s.blocks = {2, 1, 1};
        s.filters = {3, 4, 4};
        s.ds2_downscale = 4;
        s.ds4_downscale = {4, 4};
        s.ds2_upscale = 4;
        s.ds4_upscale = {4, 4};
        return network_gradcheck("tiny dense network", s);
      },
      audits,
      metrics,
      ensemble_and_tiling,
      checkpoint_roundtrip,
  };

  std::vector<SelfTestCase> results;
  for (const auto& run : cases) {
    SelfTestCase c;
    try {
      c = run();
    } catch (const std::exception& e) {
      c.passed = false;
      c.detail = std::string("exception: ") + e.what();
    }
    out << (c.passed ? "PASS " : "FAIL ") << c.name << " (" << c.detail << ")\n";
    results.push_back(std::move(c));
  }
  return results;
}

}  // namespace mssr
