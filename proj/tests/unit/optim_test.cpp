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

#include <cmath>
#include <limits>

#include "mssr/models.hpp"
#include "mssr/optim.hpp"
#include "support/oracles.hpp"

namespace mssr {
namespace {

TEST(LrSchedule, DefaultBoundaries) {
  const LrSchedule s;
  EXPECT_EQ(lr_at(0, s), 1e-4);
  EXPECT_EQ(lr_at(59'999'999, s), 1e-4);
  EXPECT_NEAR(lr_at(60'000'001, s), 2e-5, 1e-20);
  EXPECT_NEAR(lr_at(69'999'999, s), 2e-5, 1e-20);
  EXPECT_NEAR(lr_at(70'000'001, s), 4e-6, 1e-20);
  EXPECT_NEAR(lr_at(90'000'000, s), 1e-4 * std::pow(0.2, 4), 1e-22);
  EXPECT_THROW(lr_at(-1, s), std::invalid_argument);
}

TEST(LrSchedule, NonIncreasingWithExactlyConfiguredSteps) {
  LrSchedule s;
  s.decay_start = 100;
  s.decay_interval = 30;
  int changes = 0;
  double prev = lr_at(0, s);
  for (std::int64_t u = 1; u <= 250; ++u) {
    const double cur = lr_at(u, s);
    ASSERT_LE(cur, prev);
    if (cur != prev) {
      ++changes;
      EXPECT_TRUE(u == 100 || (u > 100 && (u - 100) % 30 == 0)) << u;
    }
    prev = cur;
  }
  EXPECT_EQ(changes, 6);  // 100, 130, ..., 250
}

TEST(LrSchedule, Validation) {
  LrSchedule s;
  s.decay_interval = 0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s = LrSchedule{};
  s.initial = -1.0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
}

TEST(Adam, FirstStepHandValue) {
  std::vector<double> theta{1.0};
  const std::vector<double> grad{0.5};
  std::vector<double> m{0.0};
  std::vector<double> v{0.0};
  adam_update<double>(theta, grad, m, v, 1, 1e-4);
  EXPECT_NEAR(theta[0], 0.9999, 1e-9);
  EXPECT_DOUBLE_EQ(m[0], 0.05);
  EXPECT_DOUBLE_EQ(v[0], 0.001 * 0.25);
}

TEST(Adam, TwoStepsAgainstDirectFormula) {
  const double g1 = 0.3;
  const double g2 = -0.7;
  const double lr = 1e-2;
  std::vector<double> theta{0.25};
  std::vector<double> m{0.0};
  std::vector<double> v{0.0};
  adam_update<double>(theta, std::vector<double>{g1}, m, v, 1, lr);
  adam_update<double>(theta, std::vector<double>{g2}, m, v, 2, lr);
  const double m1 = 0.1 * g1;
  const double v1 = 0.001 * g1 * g1;
  const double th1 = 0.25 - lr * (m1 / 0.1) / (std::sqrt(v1 / 0.001) + 1e-8);
  const double m2 = 0.9 * m1 + 0.1 * g2;
  const double v2 = 0.999 * v1 + 0.001 * g2 * g2;
  const double th2 = th1 - lr * (m2 / (1 - 0.81)) /
                               (std::sqrt(v2 / (1 - 0.999 * 0.999)) + 1e-8);
  EXPECT_NEAR(theta[0], th2, 1e-15);
}

TEST(Adam, ZeroGradientIsNoOpAtAnyStep) {
  for (std::int64_t t : {1, 2, 17, 1000}) {
    std::vector<float> theta{0.5f, -2.0f, 3.0f};
    const std::vector<float> zero(3, 0.0f);
    std::vector<float> m(3, 0.0f);
    std::vector<float> v(3, 0.0f);
    adam_update<float>(theta, zero, m, v, t, 1e-3);
    EXPECT_EQ(theta, (std::vector<float>{0.5f, -2.0f, 3.0f}));
    EXPECT_EQ(m, zero);
    EXPECT_EQ(v, zero);
  }
}

TEST(Adam, RejectsBadArguments) {
  std::vector<float> a(2);
  std::vector<float> b(3);
  EXPECT_THROW(adam_update<float>(a, b, a, a, 1, 1e-3), std::invalid_argument);
  EXPECT_THROW(adam_update<float>(a, a, a, a, 0, 1e-3), std::invalid_argument);
}

TEST(Adam, StepUpdatesGraphAndCounter) {
  ComputationGraph net = build_network(testing::tiny_msdn_spec(), 1);
  AdamState state = AdamState::for_graph(net.graph);
  EXPECT_TRUE(state.matches(net.graph));
  for (auto& p : net.graph.params()) {
    p.conv.weight.ensure_grad();
    p.conv.bias.ensure_grad();
    p.conv.weight.grad()[0] = 1.0f;
  }
  const float before = net.graph.params()[0].conv.weight[0];
  const float untouched = net.graph.params()[0].conv.weight[1];
  adam_step(state, net.graph, 1e-3);
  EXPECT_EQ(state.t, 1);
  EXPECT_NEAR(net.graph.params()[0].conv.weight[0], before - 1e-3f, 1e-6);
  EXPECT_EQ(net.graph.params()[0].conv.weight[1], untouched);
}

TEST(Adam, NonFiniteGradientAbortsWithoutChangingState) {
  ComputationGraph net = build_network(testing::tiny_msdn_spec(), 1);
  AdamState state = AdamState::for_graph(net.graph);
  for (auto& p : net.graph.params()) {
    p.conv.weight.ensure_grad();
    p.conv.bias.ensure_grad();
  }
  auto& bad = net.graph.params().back();
  bad.conv.weight.grad()[2] = std::numeric_limits<float>::quiet_NaN();
  const auto weights = net.graph.params()[0].conv.weight.storage();
  try {
    adam_step(state, net.graph, 1e-3);
    FAIL();
  } catch (const TrainingError& e) {
    EXPECT_NE(std::string(e.what()).find(bad.name + ".weight"), std::string::npos);
  }
  EXPECT_EQ(state.t, 0);
  EXPECT_EQ(net.graph.params()[0].conv.weight.storage(), weights);
}

}  // namespace
}  // namespace mssr
