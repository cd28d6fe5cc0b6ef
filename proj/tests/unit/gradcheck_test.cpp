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


#include <gtest/gtest.h>

#include <functional>

#include "mssr/gradcheck.hpp"
#include "mssr/models.hpp"
#include "support/oracles.hpp"

namespace mssr {
namespace {

using testing::random_tensor_d;
using testing::random_tensor_away_from_zero;

constexpr double kTolerance = 1e-4;
constexpr std::uint64_t kSeeds = 5;

using Body = std::function<NodeId(GraphD&, NodeId, std::uint64_t)>;

ParamId random_param(GraphD& g, int in_c, int out_c, int k, int stride,
                     std::uint64_t seed) {
  ConvParams<double> p(in_c, out_c, k, stride);
  p.weight = random_tensor_d(p.weight.shape(), seed * 31 + 1);
  p.bias = random_tensor_d(p.bias.shape(), seed * 31 + 2);
  return g.add_param("p" + std::to_string(g.params().size()), std::move(p));
}

// Wraps `body` in an L2 loss against a random target and checks every
// parameter and input coordinate.
void check_op(const Body& body, Shape in, Shape out, double margin = 0.0) {
  for (std::uint64_t seed = 1; seed <= kSeeds; ++seed) {
    GraphD g;
    const NodeId x = g.input("x");
    const NodeId y = body(g, x, seed);
    const NodeId loss = g.loss(y, g.input("target"), LossMode::l2);
    const std::vector<TensorD> inputs{
        margin > 0 ? random_tensor_away_from_zero(in, seed, margin)
                   : random_tensor_d(in, seed),
        random_tensor_d(out, seed + 1000)};
    const GradcheckResult r = gradcheck(g, inputs, loss);
    EXPECT_TRUE(r.passed) << "seed " << seed << " worst " << r.worst;
    EXPECT_LT(r.max_relative_error, kTolerance);
    EXPECT_GT(r.checked, 0u);
  }
}

TEST(Gradcheck, Conv3x3Stride1) {
  check_op([](GraphD& g, NodeId x, std::uint64_t s) {
    return g.conv(x, random_param(g, 3, 4, 3, 1, s));
  }, {2, 3, 5, 6}, {2, 4, 5, 6});
}

TEST(Gradcheck, Conv3x3Stride2) {
  check_op([](GraphD& g, NodeId x, std::uint64_t s) {
    return g.conv(x, random_param(g, 2, 3, 3, 2, s));
  }, {1, 2, 6, 8}, {1, 3, 3, 4});
}

TEST(Gradcheck, Conv1x1And5x5) {
  check_op([](GraphD& g, NodeId x, std::uint64_t s) {
    return g.conv(g.conv(x, random_param(g, 2, 3, 1, 1, s)),
                  random_param(g, 3, 2, 5, 1, s + 50));
  }, {1, 2, 6, 6}, {1, 2, 6, 6});
}

TEST(Gradcheck, Relu) {
  check_op([](GraphD& g, NodeId x, std::uint64_t) { return g.relu(x); },
           {1, 3, 4, 4}, {1, 3, 4, 4}, 1e-2);
}

TEST(Gradcheck, AddWithRepeatedOperand) {
  check_op([](GraphD& g, NodeId x, std::uint64_t s) {
    const NodeId c = g.conv(x, random_param(g, 2, 2, 3, 1, s));
    return g.add({x, c, x});
  }, {1, 2, 4, 5}, {1, 2, 4, 5});
}

TEST(Gradcheck, Concat) {
  check_op([](GraphD& g, NodeId x, std::uint64_t s) {
    const NodeId c = g.conv(x, random_param(g, 2, 3, 3, 1, s));
    return g.concat({c, x, c});
  }, {1, 2, 4, 4}, {1, 8, 4, 4});
}

TEST(Gradcheck, DepthToSpace) {
  check_op([](GraphD& g, NodeId x, std::uint64_t) { return g.depth_to_space(x, 2); },
           {2, 8, 3, 2}, {2, 2, 6, 4});
}

TEST(Gradcheck, L1Loss) {
  for (std::uint64_t seed = 1; seed <= kSeeds; ++seed) {
    GraphD g;
    const NodeId x = g.input("x");
    const NodeId t = g.input("t");
    const NodeId loss = g.loss(x, t, LossMode::l1);
    // Target offset so no difference sits within a step of the kink.
    TensorD pred = random_tensor_d({1, 2, 3, 3}, seed);
    TensorD target = pred;
    const TensorD off = random_tensor_away_from_zero(pred.shape(), seed + 9, 0.1);
    for (std::size_t i = 0; i < target.size(); ++i) target[i] += off[i];
    const std::vector<TensorD> inputs{pred, target};
    const GradcheckResult r = gradcheck(g, inputs, loss);
    EXPECT_TRUE(r.passed) << r.worst;
  }
}

void check_network(const NetworkSpec& spec) {
  for (std::uint64_t seed = 1; seed <= kSeeds; ++seed) {
    GraphD g = build_network(spec, seed).graph.cast<double>();
    const NodeId loss = g.loss(g.output(), g.input("target"), LossMode::l2);
    const std::vector<TensorD> inputs{random_tensor_d({1, 3, 8, 8}, seed),
                                      random_tensor_d({1, 3, 8, 8}, seed + 77)};
    GradcheckOptions opt;
    opt.max_coords_per_tensor = 4;
    opt.seed = seed;
    const GradcheckResult r = gradcheck(g, inputs, loss, opt);
    EXPECT_TRUE(r.passed) << "seed " << seed << " worst " << r.worst << " "
                          << r.max_relative_error;
    EXPECT_GT(r.checked, g.params().size());
  }
}

TEST(Gradcheck, TinyMsrnEndToEnd) { check_network(testing::tiny_msrn_spec()); }

TEST(Gradcheck, TinyMsdnEndToEnd) { check_network(testing::tiny_msdn_spec()); }

}  // namespace
}  // namespace mssr
