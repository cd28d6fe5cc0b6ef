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

#include "mssr/tensor.hpp"
#include "support/oracles.hpp"

namespace mssr {
namespace {

using testing::random_tensor;

TEST(Tensor, DataLengthMatchesShape) {
  Tensor t({2, 3, 4, 5});
  EXPECT_EQ(t.size(), 120u);
  EXPECT_THROW(Tensor(Shape{1, 1, 2, 2}, std::vector<float>(3)), ShapeError);
  EXPECT_THROW(Tensor(Shape{1, -1, 2, 2}), ShapeError);
}

TEST(Tensor, RowMajorNchwLayout) {
  Tensor t({2, 3, 4, 5});
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<float>(i);
  EXPECT_EQ(t.at(1, 2, 3, 4), 119.0f);
  EXPECT_EQ(t.at(0, 1, 0, 0), 20.0f);
  EXPECT_EQ(t.plane(1, 0)[0], 60.0f);
}

TEST(Tensor, GradientSlotMirrorsShape) {
  Tensor t({1, 2, 3, 3}, 1.0f);
  EXPECT_FALSE(t.has_grad());
  t.ensure_grad();
  ASSERT_TRUE(t.has_grad());
  EXPECT_EQ(t.grad().size(), t.size());
  t.grad()[4] = 2.0f;
  t.ensure_grad();  // keeps contents
  EXPECT_EQ(t.grad()[4], 2.0f);
  t.zero_grad();
  EXPECT_EQ(t.grad()[4], 0.0f);
  t.clear_grad();
  EXPECT_FALSE(t.has_grad());
}

TEST(Tensor, AllFinite) {
  Tensor t({1, 1, 2, 2}, 0.5f);
  EXPECT_TRUE(all_finite(t));
  t[3] = std::numeric_limits<float>::quiet_NaN();
  EXPECT_FALSE(all_finite(t));
  t[3] = std::numeric_limits<float>::infinity();
  EXPECT_FALSE(all_finite(t));
}

TEST(Tensor, SliceChannelsAndCrop) {
  const Tensor t = random_tensor({2, 5, 6, 7}, 3);
  const Tensor s = slice_channels(t, 1, 4);
  ASSERT_EQ(s.shape(), (Shape{2, 3, 6, 7}));
  EXPECT_EQ(s.at(1, 2, 5, 6), t.at(1, 3, 5, 6));
  const Tensor c = crop(t, 2, 3, 3, 4);
  ASSERT_EQ(c.shape(), (Shape{2, 5, 3, 4}));
  EXPECT_EQ(c.at(1, 4, 0, 0), t.at(1, 4, 2, 3));
  EXPECT_EQ(c.at(0, 0, 2, 3), t.at(0, 0, 4, 6));
  EXPECT_THROW(crop(t, 4, 0, 3, 1), ShapeError);
  EXPECT_THROW(slice_channels(t, 3, 6), ShapeError);
}

TEST(Tensor, BatchItemAndStackAreInverse) {
  const Tensor t = random_tensor({3, 2, 4, 4}, 5);
  std::vector<Tensor> items;
  for (int i = 0; i < 3; ++i) items.push_back(batch_item(t, i));
  EXPECT_EQ(items[2].shape(), (Shape{1, 2, 4, 4}));
  const Tensor back = stack_batch<float>(items);
  EXPECT_EQ(back.storage(), t.storage());
  items[1] = Tensor({1, 2, 4, 5});
  EXPECT_THROW(stack_batch<float>(items), ShapeError);
}

// Mirror index without repeating the edge, folded for any distance.
int mirror(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

TEST(Tensor, ReflectPadMatchesMirrorFormula) {
  const Tensor t = random_tensor({1, 2, 3, 4}, 9);
  for (int pad : {1, 2, 5, 9}) {
    const Tensor p = reflect_pad(t, pad, pad + 1, pad + 2, pad);
    ASSERT_EQ(p.shape(), (Shape{1, 2, 3 + 2 * pad + 1, 4 + 2 * pad + 2}));
    for (int c = 0; c < 2; ++c) {
      for (int y = 0; y < p.shape().h; ++y) {
        for (int x = 0; x < p.shape().w; ++x) {
          EXPECT_EQ(p.at(0, c, y, x),
                    t.at(0, c, mirror(y - pad, 3), mirror(x - pad - 2, 4)));
        }
      }
    }
  }
}

TEST(Tensor, CastRoundtripToDouble) {
  const Tensor t = random_tensor({1, 1, 3, 3}, 2);
  EXPECT_EQ(t.cast<double>().cast<float>().storage(), t.storage());
}

}  // namespace
}  // namespace mssr
