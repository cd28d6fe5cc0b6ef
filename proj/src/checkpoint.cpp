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

#include "mssr/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace mssr {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kDtype = "float32_le";

json spec_to_json(const NetworkSpec& s) {
  return json{{"kind", to_string(s.kind)},
              {"family", to_string(s.family)},
              {"blocks", s.blocks},
              {"filters", s.filters},
              {"ds2_downscale", s.ds2_downscale},
              {"ds4_downscale", s.ds4_downscale},
              {"ds2_upscale", s.ds2_upscale},
              {"ds4_upscale", s.ds4_upscale},
              {"input_channels", s.input_channels},
              {"output_channels", s.output_channels}};
}

NetworkSpec spec_from_json(const json& j) {
  NetworkSpec s;
  s.kind = parse_model_kind(j.at("kind").get<std::string>());
  s.family = parse_block_family(j.at("family").get<std::string>());
  s.blocks = j.at("blocks").get<std::array<int, 3>>();
  s.filters = j.at("filters").get<std::array<int, 3>>();
  s.ds2_downscale = j.at("ds2_downscale").get<int>();
  s.ds4_downscale = j.at("ds4_downscale").get<std::array<int, 2>>();
  s.ds2_upscale = j.at("ds2_upscale").get<int>();
  s.ds4_upscale = j.at("ds4_upscale").get<std::array<int, 2>>();
  s.input_channels = j.at("input_channels").get<int>();
  s.output_channels = j.at("output_channels").get<int>();
  return s;
}

void append_le(std::string& out, std::span<const float> values) {
  const std::size_t base = out.size();
  out.resize(base + 4 * values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto bits = std::bit_cast<std::uint32_t>(values[i]);
    for (int b = 0; b < 4; ++b) {
      out[base + 4 * i + b] = static_cast<char>((bits >> (8 * b)) & 0xffu);
    }
  }
}

std::vector<float> read_le(const std::string& bytes, std::size_t offset,
                           std::size_t count) {
  std::vector<float> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) {
      bits |= static_cast<std::uint32_t>(
                  static_cast<unsigned char>(bytes[offset + 4 * i + b]))
              << (8 * b);
    }
    values[i] = std::bit_cast<float>(bits);
  }
  return values;
}

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot write '" + path.string() + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError("write failed for '" + path.string() + "'");
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot read '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<const Tensor*> param_tensors(const Graph& g) {
  std::vector<const Tensor*> out;
  for (const auto& p : g.params()) {
    out.push_back(&p.conv.weight);
    out.push_back(&p.conv.bias);
  }
  return out;
}

std::vector<std::string> blob_names(const Graph& g) {
  std::vector<std::string> out;
  for (const auto& p : g.params()) {
    out.push_back(p.name + ".weight");
    out.push_back(p.name + ".bias");
  }
  return out;
}

}  // namespace

Checkpoint capture_checkpoint(const ComputationGraph& net,
                              const AdamState* adam, std::int64_t update,
                              std::map<std::string, std::string> config) {
  if (adam != nullptr && !adam->matches(net.graph)) {
    throw CheckpointError("optimizer state does not match the network");
  }
  Checkpoint ckpt;
  ckpt.spec = net.spec;
  ckpt.update = update;
  ckpt.config = std::move(config);
  if (adam != nullptr) {
    ckpt.hyper = adam->hyper;
    ckpt.adam_t = adam->t;
  }
  const auto tensors = param_tensors(net.graph);
  const auto names = blob_names(net.graph);
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    ParamBlob blob;
    blob.name = names[i];
    blob.shape = tensors[i]->shape();
    blob.values = tensors[i]->storage();
    if (adam != nullptr) {
      blob.adam_m = adam->m[i];
      blob.adam_v = adam->v[i];
    } else {
      blob.adam_m.assign(blob.values.size(), 0.0f);
      blob.adam_v.assign(blob.values.size(), 0.0f);
    }
    ckpt.blobs.push_back(std::move(blob));
  }
  return ckpt;
}

void load_parameters(const Checkpoint& ckpt, Graph& graph) {
  const auto names = blob_names(graph);
  if (names.size() != ckpt.blobs.size()) {
    throw CheckpointError("checkpoint has " + std::to_string(ckpt.blobs.size()) +
                          " parameter blobs, network expects " +
                          std::to_string(names.size()));
  }
  std::size_t i = 0;
  for (auto& p : graph.params()) {
    for (Tensor* t : {&p.conv.weight, &p.conv.bias}) {
      const ParamBlob& blob = ckpt.blobs[i];
      if (blob.name != names[i] || blob.shape != t->shape()) {
        throw CheckpointError("blob '" + blob.name + "' " + blob.shape.str() +
                              " does not match parameter '" + names[i] + "' " +
                              t->shape().str());
      }
      t->storage() = blob.values;
      ++i;
    }
  }
}

ComputationGraph restore_network(const Checkpoint& ckpt) {
  ComputationGraph net = build_topology(ckpt.spec);
  load_parameters(ckpt, net.graph);
  return net;
}

AdamState restore_adam(const Checkpoint& ckpt) {
  AdamState s;
  s.hyper = ckpt.hyper;
  s.t = ckpt.adam_t;
  for (const auto& blob : ckpt.blobs) {
    s.m.push_back(blob.adam_m);
    s.v.push_back(blob.adam_v);
  }
  return s;
}

void save_checkpoint(const Checkpoint& ckpt, const fs::path& dir) {
  fs::create_directories(dir);
  std::string params;
  std::string adam_m;
  std::string adam_v;
  json records = json::array();
  for (const auto& blob : ckpt.blobs) {
    if (blob.values.size() != blob.shape.size() ||
        blob.adam_m.size() != blob.values.size() ||
        blob.adam_v.size() != blob.values.size()) {
      throw CheckpointError("blob '" + blob.name + "' has inconsistent sizes");
    }
    records.push_back({{"name", blob.name},
                       {"shape", {blob.shape.n, blob.shape.c, blob.shape.h,
                                  blob.shape.w}},
                       {"offset", params.size()},
                       {"bytes", 4 * blob.values.size()}});
    append_le(params, blob.values);
    append_le(adam_m, blob.adam_m);
    append_le(adam_v, blob.adam_v);
  }
  json manifest{{"format_version", ckpt.version},
                {"dtype", kDtype},
                {"update", ckpt.update},
                {"spec", spec_to_json(ckpt.spec)},
                {"config", ckpt.config},
                {"adam", {{"t", ckpt.adam_t},
                          {"beta1", ckpt.hyper.beta1},
                          {"beta2", ckpt.hyper.beta2},
                          {"epsilon", ckpt.hyper.epsilon}}},
                {"params", records}};
  write_file(dir / "params.bin", params);
  write_file(dir / "adam_m.bin", adam_m);
  write_file(dir / "adam_v.bin", adam_v);
  // Written last so a present manifest implies complete blobs.
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

bool checkpoint_exists(const fs::path& dir) {
  return fs::is_regular_file(dir / "manifest.json");
}

Checkpoint load_checkpoint(const fs::path& dir) {
  json manifest;
  try {
    manifest = json::parse(read_file(dir / "manifest.json"));
  } catch (const json::exception& e) {
    throw CheckpointError("malformed manifest.json in '" + dir.string() +
                          "': " + e.what());
  }
  Checkpoint ckpt;
  try {
    ckpt.version = manifest.at("format_version").get<int>();
    if (ckpt.version != kCheckpointVersion) {
      throw CheckpointError("checkpoint format version " +
                            std::to_string(ckpt.version) + " is not supported "
                            "(expected " + std::to_string(kCheckpointVersion) +
                            ")");
    }
    if (manifest.at("dtype").get<std::string>() != kDtype) {
      throw CheckpointError("unsupported checkpoint dtype '" +
                            manifest.at("dtype").get<std::string>() + "'");
    }
    ckpt.update = manifest.at("update").get<std::int64_t>();
    ckpt.spec = spec_from_json(manifest.at("spec"));
    ckpt.config =
        manifest.at("config").get<std::map<std::string, std::string>>();
    const json& adam = manifest.at("adam");
    ckpt.adam_t = adam.at("t").get<std::int64_t>();
    ckpt.hyper = {adam.at("beta1").get<double>(), adam.at("beta2").get<double>(),
                  adam.at("epsilon").get<double>()};

    const std::string params = read_file(dir / "params.bin");
    const std::string adam_m = read_file(dir / "adam_m.bin");
    const std::string adam_v = read_file(dir / "adam_v.bin");
    std::size_t expected = 0;
    for (const json& rec : manifest.at("params")) {
      ParamBlob blob;
      blob.name = rec.at("name").get<std::string>();
      const auto dims = rec.at("shape").get<std::array<int, 4>>();
      blob.shape = {dims[0], dims[1], dims[2], dims[3]};
      const auto offset = rec.at("offset").get<std::size_t>();
      const auto bytes = rec.at("bytes").get<std::size_t>();
      if (bytes != 4 * blob.shape.size() || offset != expected) {
        throw CheckpointError("parameter '" + blob.name +
                              "': manifest offset/length disagree with shape " +
                              blob.shape.str());
      }
      for (const auto& [file, data] :
           {std::pair{"params.bin", &params}, std::pair{"adam_m.bin", &adam_m},
            std::pair{"adam_v.bin", &adam_v}}) {
        if (data->size() < offset + bytes) {
          throw CheckpointError(std::string(file) + " is truncated: parameter '" +
                                blob.name + "' needs bytes [" +
                                std::to_string(offset) + ", " +
                                std::to_string(offset + bytes) + ") but the file has " +
                                std::to_string(data->size()));
        }
      }
      blob.values = read_le(params, offset, blob.shape.size());
      blob.adam_m = read_le(adam_m, offset, blob.shape.size());
      blob.adam_v = read_le(adam_v, offset, blob.shape.size());
      expected = offset + bytes;
      ckpt.blobs.push_back(std::move(blob));
    }
    for (const auto& [file, data] :
         {std::pair{"params.bin", &params}, std::pair{"adam_m.bin", &adam_m},
          std::pair{"adam_v.bin", &adam_v}}) {
      if (data->size() != expected) {
        throw CheckpointError(std::string(file) + " has " +
                              std::to_string(data->size()) +
                              " bytes; manifest describes " +
                              std::to_string(expected));
      }
    }
  } catch (const json::exception& e) {
    throw CheckpointError("malformed manifest.json in '" + dir.string() +
                          "': " + e.what());
  }
  return ckpt;
}

}  // namespace mssr
