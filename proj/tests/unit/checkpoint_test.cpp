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

#include <fstream>
#include <iterator>

#include "json.hpp"

#include "mssr/checkpoint.hpp"
#include "support/oracles.hpp"

namespace mssr {
namespace {

namespace fs = std::filesystem;
using testing::TempDir;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Checkpoint trained_like_checkpoint() {
  const ComputationGraph net = build_network(testing::tiny_msrn_spec(), 4);
  AdamState adam = AdamState::for_graph(net.graph);
  adam.t = 3;
  float k = 0.0f;
  for (auto& m : adam.m) for (auto& x : m) x = (k += 0.001f);
  for (auto& v : adam.v) for (auto& x : v) x = (k += 0.002f);
  return capture_checkpoint(net, &adam, 321, {{"loss", "l1"}, {"seed", "4"}});
}

TEST(Checkpoint, SaveLoadSaveIsByteIdentical) {
  TempDir dir("ckpt");
  const Checkpoint c = trained_like_checkpoint();
  save_checkpoint(c, dir.path() / "a");
  const Checkpoint back = load_checkpoint(dir.path() / "a");
  save_checkpoint(back, dir.path() / "b");
  for (const char* f : {"manifest.json", "params.bin", "adam_m.bin", "adam_v.bin"}) {
    EXPECT_EQ(slurp(dir.path() / "a" / f), slurp(dir.path() / "b" / f)) << f;
  }
  EXPECT_EQ(back.blobs, c.blobs);
  EXPECT_EQ(back.spec, c.spec);
  EXPECT_EQ(back.update, 321);
  EXPECT_EQ(back.adam_t, 3);
  EXPECT_EQ(back.config, c.config);
  EXPECT_TRUE(checkpoint_exists(dir.path() / "a"));
  EXPECT_FALSE(checkpoint_exists(dir.path() / "none"));
}

TEST(Checkpoint, RestoredNetworkForwardIsIdentical) {
  TempDir dir("ckpt");
  const ComputationGraph net = build_network(testing::tiny_msdn_spec(), 8);
  save_checkpoint(capture_checkpoint(net, nullptr, 0), dir.path());
  const ComputationGraph back = restore_network(load_checkpoint(dir.path()));
  const Tensor x = testing::random_tensor({1, 3, 16, 12}, 3, 0.0f, 1.0f);
  EXPECT_EQ(net.forward(x).storage(), back.forward(x).storage());
}

TEST(Checkpoint, AdamStateRoundtrip) {
  const Checkpoint c = trained_like_checkpoint();
  const ComputationGraph net = restore_network(c);
  const AdamState adam = restore_adam(c);
  EXPECT_TRUE(adam.matches(net.graph));
  EXPECT_EQ(adam.t, 3);
  EXPECT_EQ(adam.m.front().front(), 0.001f);
}

TEST(Checkpoint, ParametersOnlyHasNoMoments) {
  TempDir dir("ckpt");
  const ComputationGraph net = build_network(testing::tiny_msdn_spec(), 8);
  save_checkpoint(capture_checkpoint(net, nullptr, 5), dir.path());
  const Checkpoint back = load_checkpoint(dir.path());
  EXPECT_EQ(back.adam_t, 0);
  const AdamState adam = restore_adam(back);
  for (const auto& m : adam.m) for (float x : m) EXPECT_EQ(x, 0.0f);
}

TEST(Checkpoint, TruncatedBlobNamesTheParameter) {
  TempDir dir("ckpt");
  const Checkpoint c = trained_like_checkpoint();
  save_checkpoint(c, dir.path());
  const auto params = dir.path() / "params.bin";
  fs::resize_file(params, fs::file_size(params) - 4);
  try {
    load_checkpoint(dir.path());
    FAIL();
  } catch (const CheckpointError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("truncated"), std::string::npos) << msg;
    EXPECT_NE(msg.find("'" + c.blobs.back().name + "'"), std::string::npos) << msg;
  }
}

TEST(Checkpoint, OversizedBlobIsRejected) {
  TempDir dir("ckpt");
  save_checkpoint(trained_like_checkpoint(), dir.path());
  std::ofstream(dir.path() / "adam_v.bin", std::ios::app | std::ios::binary) << "xxxx";
  EXPECT_THROW(load_checkpoint(dir.path()), CheckpointError);
}

TEST(Checkpoint, VersionMismatchIsRejected) {
  TempDir dir("ckpt");
  save_checkpoint(trained_like_checkpoint(), dir.path());
  const auto path = dir.path() / "manifest.json";
  nlohmann::json j = nlohmann::json::parse(slurp(path));
  j["format_version"] = kCheckpointVersion + 1;
  std::ofstream(path) << j.dump(2);
  try {
    load_checkpoint(dir.path());
    FAIL();
  } catch (const CheckpointError& e) {
    EXPECT_NE(std::string(e.what()).find("version"), std::string::npos);
  }
}

TEST(Checkpoint, MalformedManifestIsRejected) {
  TempDir dir("ckpt");
  save_checkpoint(trained_like_checkpoint(), dir.path());
  std::ofstream(dir.path() / "manifest.json") << "{ not json";
  EXPECT_THROW(load_checkpoint(dir.path()), CheckpointError);
  EXPECT_THROW(load_checkpoint(dir.path() / "missing"), CheckpointError);
}

TEST(Checkpoint, LoadParametersRejectsOtherArchitecture) {
  const Checkpoint c = trained_like_checkpoint();
  ComputationGraph other = build_network(testing::tiny_msdn_spec(), 1);
  EXPECT_THROW(load_parameters(c, other.graph), CheckpointError);
}

}  // namespace
}  // namespace mssr
