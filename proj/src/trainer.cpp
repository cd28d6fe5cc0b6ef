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

#include "mssr/trainer.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

#include "mssr/augment.hpp"
#include "mssr/image_io.hpp"
#include "mssr/manifest.hpp"
#include "mssr/metrics.hpp"

namespace mssr {

namespace fs = std::filesystem;

namespace {

const std::set<std::string, std::less<>> kArchKeys = {
    "blocks", "filters", "family", "ds2_downscale", "ds4_downscale",
    "ds2_upscale", "ds4_upscale"};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const auto [ptr, ec] =
      std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw std::invalid_argument("config key '" + std::string(key) +
                                "': cannot parse '" + std::string(value) + "'");
  }
  return out;
}

template <std::size_t N>
std::array<int, N> parse_list(std::string_view key, std::string_view value) {
  std::array<int, N> out{};
  std::size_t i = 0;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = value.find(',', start);
    if (i >= N) {
      throw std::invalid_argument("config key '" + std::string(key) +
                                  "' expects " + std::to_string(N) + " values");
    }
    out[i++] = parse_number<int>(key, trim(value.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (i != N) {
    throw std::invalid_argument("config key '" + std::string(key) + "' expects " +
                                std::to_string(N) + " values");
  }
  return out;
}

template <std::size_t N>
std::string join(const std::array<int, N>& v) {
  std::string s;
  for (std::size_t i = 0; i < N; ++i) {
    if (i > 0) s += ',';
    s += std::to_string(v[i]);
  }
  return s;
}

std::string format_double(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

fs::path resolve(const fs::path& base, std::string_view value) {
  fs::path p{std::string(value)};
  if (p.empty() || p.is_absolute() || base.empty()) return p;
  return (base / p).lexically_normal();
}

}  // namespace

LrSchedule TrainConfig::schedule() const {
  LrSchedule s;
  s.initial = lr_initial;
  s.decay_factor = lr_decay_factor;
  s.decay_start = lr_decay_start.value_or(updates * 6 / 10);
  s.decay_interval = lr_decay_interval.value_or(std::max<std::int64_t>(1, updates / 10));
  return s;
}

NetworkSpec TrainConfig::network_spec() const {
  NetworkSpec spec;
  if (parse_model_kind(model) != ModelKind::custom) spec = preset(model);
  if (overrides.empty()) {
    spec.validate();
    return spec;
  }
  spec.kind = ModelKind::custom;
  const auto get = [&](const char* key) -> const std::string* {
    const auto it = overrides.find(key);
    return it == overrides.end() ? nullptr : &it->second;
  };
  if (const auto* v = get("family")) spec.family = parse_block_family(*v);
  if (const auto* v = get("blocks")) spec.blocks = parse_list<3>("blocks", *v);
  if (const auto* v = get("filters")) {
    spec.filters = parse_list<3>("filters", *v);
    spec.ds2_downscale = spec.filters[1];
    spec.ds4_downscale = {spec.filters[2], spec.filters[2]};
  }
  if (const auto* v = get("ds2_downscale")) {
    spec.ds2_downscale = parse_number<int>("ds2_downscale", *v);
  }
  if (const auto* v = get("ds4_downscale")) {
    spec.ds4_downscale = parse_list<2>("ds4_downscale", *v);
  }
  if (const auto* v = get("ds2_upscale")) {
    spec.ds2_upscale = parse_number<int>("ds2_upscale", *v);
  }
  if (const auto* v = get("ds4_upscale")) {
    spec.ds4_upscale = parse_list<2>("ds4_upscale", *v);
  }
  spec.validate();
  return spec;
}

void TrainConfig::validate() const {
  if (patch_size <= 0 || patch_size % 4 != 0) {
    throw std::invalid_argument("patch_size must be a positive multiple of 4");
  }
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (updates < 0) throw std::invalid_argument("updates must be >= 0");
  if (eval_interval < 0 || ckpt_interval < 0) {
    throw std::invalid_argument("intervals must be >= 0");
  }
  schedule().validate();
  network_spec();
}

std::map<std::string, std::string> TrainConfig::echo() const {
  std::map<std::string, std::string> m = overrides;
  const LrSchedule s = schedule();
  m["model"] = model;
  m["loss"] = std::string(to_string(loss));
  m["patch_size"] = std::to_string(patch_size);
  m["batch_size"] = std::to_string(batch_size);
  m["updates"] = std::to_string(updates);
  m["lr_initial"] = format_double(s.initial);
  m["lr_decay_factor"] = format_double(s.decay_factor);
  m["lr_decay_start"] = std::to_string(s.decay_start);
  m["lr_decay_interval"] = std::to_string(s.decay_interval);
  m["seed"] = std::to_string(seed);
  m["data_manifest"] = data_manifest.string();
  m["ckpt_dir"] = ckpt_dir.string();
  m["eval_interval"] = std::to_string(eval_interval);
  m["ckpt_interval"] = std::to_string(ckpt_interval);
  m["train_split"] = train_split;
  m["val_split"] = val_split;
  return m;
}

TrainConfig parse_train_config(std::string_view text, const fs::path& base_dir) {
  TrainConfig cfg;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected key=value");
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    if (!seen.insert(key).second) {
      throw std::invalid_argument("config key '" + key + "' given twice");
    }
    if (key == "model") {
      cfg.model = std::string(value);
    } else if (key == "loss") {
      cfg.loss = parse_loss_mode(value);
    } else if (key == "patch_size") {
      cfg.patch_size = parse_number<int>(key, value);
    } else if (key == "batch_size") {
      cfg.batch_size = parse_number<int>(key, value);
    } else if (key == "updates") {
      cfg.updates = parse_number<std::int64_t>(key, value);
    } else if (key == "lr_initial") {
      cfg.lr_initial = parse_number<double>(key, value);
    } else if (key == "lr_decay_factor") {
      cfg.lr_decay_factor = parse_number<double>(key, value);
    } else if (key == "lr_decay_start") {
      cfg.lr_decay_start = parse_number<std::int64_t>(key, value);
    } else if (key == "lr_decay_interval") {
      cfg.lr_decay_interval = parse_number<std::int64_t>(key, value);
    } else if (key == "seed") {
      cfg.seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "data_manifest") {
      cfg.data_manifest = resolve(base_dir, value);
    } else if (key == "ckpt_dir") {
      cfg.ckpt_dir = resolve(base_dir, value);
    } else if (key == "eval_interval") {
      cfg.eval_interval = parse_number<std::int64_t>(key, value);
    } else if (key == "ckpt_interval") {
      cfg.ckpt_interval = parse_number<std::int64_t>(key, value);
    } else if (key == "train_split") {
      cfg.train_split = std::string(value);
    } else if (key == "val_split") {
      cfg.val_split = std::string(value);
    } else if (key == "curve_path") {
      cfg.curve_path = resolve(base_dir, value);
    } else if (kArchKeys.contains(key)) {
      cfg.overrides[key] = std::string(value);
    } else {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": unknown key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

TrainConfig load_train_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_train_config(buf.str(), fs::absolute(path).parent_path());
}

int validation_crop_size(int h, int w) {
  return std::min(64, std::min(h, w) / 4 * 4);
}

std::pair<double, double> validate_crops(const ComputationGraph& net,
                                         const std::vector<ImagePair>& pairs) {
  if (pairs.empty()) {
    return {std::numeric_limits<double>::quiet_NaN(),
            std::numeric_limits<double>::quiet_NaN()};
  }
  double p = 0.0;
  double s = 0.0;
  for (const auto& pair : pairs) {
    const int h = pair.lr.shape().h;
    const int w = pair.lr.shape().w;
    const int size = validation_crop_size(h, w);
    const int y0 = (h - size) / 2;
    const int x0 = (w - size) / 2;
    const Tensor lr = crop(pair.lr, y0, x0, size, size);
    const Tensor hr = crop(pair.hr, y0, x0, size, size);
    const Tensor sr = to_tensor(from_tensor(net.forward(lr)));
    p += psnr(sr, hr);
    s += ssim(sr, hr);
  }
  return {p / pairs.size(), s / pairs.size()};
}

void write_curve(const std::vector<CurvePoint>& curve, const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write curve '" + path.string() + "'");
  out << "update\tlr\ttrain_loss\tval_psnr\tval_ssim\n";
  out << std::setprecision(8);
  for (const auto& c : curve) {
    out << c.update << '\t' << c.lr << '\t' << c.train_loss << '\t'
        << c.val_psnr << '\t' << c.val_ssim << '\n';
  }
}

TrainResult train_pairs(const TrainConfig& cfg,
                        const std::vector<ImagePair>& train_set,
                        const std::vector<ImagePair>& val_set,
                        const TrainHooks& hooks) {
  cfg.validate();
  if (train_set.empty()) throw std::invalid_argument("training set is empty");
  for (const auto& p : train_set) {
    const Shape& s = p.lr.shape();
    if (s != p.hr.shape() || s.n != 1 || s.c != 3) {
      throw ShapeError("training pair '" + p.id + "': LR " + s.str() +
                       " and HR " + p.hr.shape().str() +
                       " must be equal 1x3xHxW");
    }
    if (s.h < cfg.patch_size || s.w < cfg.patch_size) {
      throw ShapeError("training pair '" + p.id + "' is smaller than the " +
                       std::to_string(cfg.patch_size) + " pixel patch");
    }
  }

  const NetworkSpec spec = cfg.network_spec();
  const LrSchedule schedule = cfg.schedule();
  TrainResult result{build_network(spec, cfg.seed), {}, {}, {}};
  Graph& graph = result.net.graph;
  result.adam = AdamState::for_graph(graph);

  const SeededRng root(cfg.seed);
  SeededRng crop_rng = root.derive("crop");
  SeededRng augment_rng = root.derive("augment");
  SeededRng shuffle_rng = root.derive("shuffle");

  std::vector<std::size_t> order(train_set.size());
  std::size_t cursor = order.size();
  const auto next_image = [&]() {
    if (cursor == order.size()) {
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      for (std::size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[shuffle_rng.uniform_int(i)]);
      }
      cursor = 0;
    }
    return order[cursor++];
  };

  const auto save = [&](std::int64_t update) {
    if (cfg.ckpt_dir.empty()) return;
    save_checkpoint(capture_checkpoint(result.net, &result.adam, update, cfg.echo()),
                    cfg.ckpt_dir);
  };
  const fs::path curve_path =
      !cfg.curve_path.empty()
          ? cfg.curve_path
          : (cfg.ckpt_dir.empty() ? fs::path() : cfg.ckpt_dir / "curve.tsv");

  ForwardState<float> state;
  std::vector<Tensor> lr_items(cfg.batch_size);
  std::vector<Tensor> hr_items(cfg.batch_size);
  double interval_loss = 0.0;
  std::int64_t interval_count = 0;

  for (std::int64_t u = 0; u < cfg.updates; ++u) {
    for (int b = 0; b < cfg.batch_size; ++b) {
      const ImagePair& pair = train_set[next_image()];
      auto [lr, hr] = crop_patch(pair.lr, pair.hr, cfg.patch_size, crop_rng);
      const GeometricTransform t = sample_augmentation(augment_rng);
      lr_items[b] = apply_geometric(t, lr);
      hr_items[b] = apply_geometric(t, hr);
    }
    const Tensor input = stack_batch<float>(lr_items);
    const Tensor target = stack_batch<float>(hr_items);

    graph.forward(state, std::span<const Tensor>(&input, 1));
    const NodeId out = graph.output();
    const LossResult<float> loss = compute_loss(cfg.loss, state.value(out), target);
    if (!std::isfinite(loss.value)) {
      throw TrainingError("non-finite loss at update " + std::to_string(u + 1) +
                          "; last checkpoint left untouched");
    }
    graph.backward(state, out, loss.grad);
    adam_step(result.adam, graph, lr_at(u, schedule));

    result.losses.push_back(loss.value);
    interval_loss += loss.value;
    ++interval_count;
    if (hooks.on_update) hooks.on_update(u + 1, loss.value);

    const std::int64_t done = u + 1;
    const bool last = done == cfg.updates;
    if ((cfg.eval_interval > 0 && done % cfg.eval_interval == 0) || last) {
      CurvePoint point;
      point.update = done;
      point.lr = lr_at(u, schedule);
      point.train_loss = interval_loss / static_cast<double>(interval_count);
      std::tie(point.val_psnr, point.val_ssim) = validate_crops(result.net, val_set);
      interval_loss = 0.0;
      interval_count = 0;
      result.curve.push_back(point);
      if (!curve_path.empty()) write_curve(result.curve, curve_path);
      if (hooks.on_eval) hooks.on_eval(point);
    }
    if (!last && cfg.ckpt_interval > 0 && done % cfg.ckpt_interval == 0) {
      save(done);
    }
  }
  save(cfg.updates);
  return result;
}

namespace {

std::vector<ImagePair> load_pairs(const std::vector<ManifestEntry>& entries) {
  std::vector<ImagePair> out;
  for (const auto& e : entries) {
    ImagePair p{e.id, to_tensor(read_image(e.lr_path)),
                to_tensor(read_image(e.hr_path))};
    if (p.lr.shape() != p.hr.shape()) {
      throw ShapeError("entry '" + e.id + "': LR and HR sizes differ");
    }
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace

TrainResult train(const TrainConfig& cfg, const TrainHooks& hooks) {
  if (cfg.data_manifest.empty()) {
    throw std::invalid_argument("config has no data_manifest");
  }
  const DatasetManifest manifest =
      load_manifest(cfg.data_manifest, ManifestMode::paired);
  DatasetManifest train_entries = manifest.filter_split(cfg.train_split);
  if (train_entries.empty()) {
    const bool labelled = std::any_of(
        manifest.entries.begin(), manifest.entries.end(),
        [](const ManifestEntry& e) { return !e.split.empty(); });
    if (!labelled) train_entries = manifest;
  }
  if (train_entries.empty()) {
    throw std::invalid_argument("manifest '" + cfg.data_manifest.string() +
                                "' has no '" + cfg.train_split + "' entries");
  }
  const DatasetManifest val_entries = manifest.filter_split(cfg.val_split);
  return train_pairs(cfg, load_pairs(train_entries.entries),
                     load_pairs(val_entries.entries), hooks);
}

}  // namespace mssr
