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

// Checkpoint directory layout:
//
//   manifest.json  format version, dtype tag, update counter, network spec,
//                  config echo, Adam hyper-parameters and step, and one
//                  record per parameter blob {name, shape, offset, bytes}
//   params.bin     parameter values
//   adam_m.bin     Adam first moments
//   adam_v.bin     Adam second moments
//
// The .bin files are little-endian float32 blobs concatenated in manifest
// order. Each convolution contributes "<name>.weight" then "<name>.bias".

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "mssr/models.hpp"
#include "mssr/optim.hpp"

namespace mssr {

inline constexpr int kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ParamBlob {
  std::string name;
  Shape shape;
  std::vector<float> values;
  std::vector<float> adam_m;
  std::vector<float> adam_v;

  bool operator==(const ParamBlob&) const = default;
};

struct Checkpoint {
  int version = kCheckpointVersion;
  NetworkSpec spec;
  std::int64_t update = 0;
  AdamHyper hyper;
  std::int64_t adam_t = 0;
  std::vector<ParamBlob> blobs;
  std::map<std::string, std::string> config;
};

/// Snapshot of a network and its optimizer state (zeros when `adam` is null).
Checkpoint capture_checkpoint(const ComputationGraph& net,
                              const AdamState* adam, std::int64_t update,
                              std::map<std::string, std::string> config = {});

/// Builds the network described by the checkpoint and loads its weights.
ComputationGraph restore_network(const Checkpoint& ckpt);
AdamState restore_adam(const Checkpoint& ckpt);

/// Copies blob values into a graph with the same parameter layout.
void load_parameters(const Checkpoint& ckpt, Graph& graph);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& dir);
Checkpoint load_checkpoint(const std::filesystem::path& dir);

/// True when `dir` holds a manifest.json.
bool checkpoint_exists(const std::filesystem::path& dir);

}  // namespace mssr
