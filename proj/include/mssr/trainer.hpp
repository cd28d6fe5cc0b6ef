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

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mssr/checkpoint.hpp"
#include "mssr/models.hpp"
#include "mssr/optim.hpp"

namespace mssr {

/// Training configuration, read from key=value text.
///
/// Recognized keys: model, loss, patch_size, batch_size, updates, lr_initial,
/// lr_decay_factor, lr_decay_start, lr_decay_interval, seed, data_manifest,
/// ckpt_dir, eval_interval, ckpt_interval, train_split, val_split,
/// curve_path. Architecture overrides (blocks, filters, family,
/// ds2_downscale, ds4_downscale, ds2_upscale, ds4_upscale) take comma lists
/// where a triple or pair is expected and turn the model into a custom spec.
struct TrainConfig {
  std::string model = "msrn";
  LossMode loss = LossMode::l1;
  int patch_size = 64;
  int batch_size = 16;
  std::int64_t updates = 20'000;
  double lr_initial = 1e-4;
  double lr_decay_factor = 0.2;
  /// Unset: 60% and 10% of `updates`.
  std::optional<std::int64_t> lr_decay_start;
  std::optional<std::int64_t> lr_decay_interval;
  std::uint64_t seed = 0;
  std::filesystem::path data_manifest;
  std::filesystem::path ckpt_dir;
  std::int64_t eval_interval = 1'000;
  /// 0: only the final checkpoint.
  std::int64_t ckpt_interval = 0;
  std::string train_split = "train";
  std::string val_split = "val";
  /// Defaults to <ckpt_dir>/curve.tsv.
  std::filesystem::path curve_path;
  std::map<std::string, std::string> overrides;

  LrSchedule schedule() const;
  NetworkSpec network_spec() const;
  /// Throws std::invalid_argument on inconsistent values.
  void validate() const;
  /// Canonical key=value echo stored in checkpoints.
  std::map<std::string, std::string> echo() const;
};

/// Relative paths resolve against `base_dir`. Unknown keys are errors.
TrainConfig parse_train_config(std::string_view text,
                               const std::filesystem::path& base_dir = {});
TrainConfig load_train_config(const std::filesystem::path& path);

struct ImagePair {
  std::string id;
  Tensor lr;
  Tensor hr;
};

struct CurvePoint {
  std::int64_t update = 0;
  double lr = 0.0;
  /// Mean training loss over the updates since the previous point.
  double train_loss = 0.0;
  /// Validation metrics on fixed center crops; NaN without validation data.
  double val_psnr = 0.0;
  double val_ssim = 0.0;
};

struct TrainHooks {
  std::function<void(const CurvePoint&)> on_eval;
  /// Called after every update with (update count, loss).
  std::function<void(std::int64_t, double)> on_update;
};

struct TrainResult {
  ComputationGraph net;
  AdamState adam;
  std::vector<double> losses;
  std::vector<CurvePoint> curve;
};

/// Side length of the center validation crop for an h x w image: 64, or
/// the largest multiple of 4 that fits.
int validation_crop_size(int h, int w);

/// Training on in-memory pairs. Checkpoints and the curve file are written
/// only when cfg.ckpt_dir is set. A non-finite loss throws TrainingError
/// before any further checkpoint is written.
TrainResult train_pairs(const TrainConfig& cfg, const std::vector<ImagePair>& train,
                        const std::vector<ImagePair>& val,
                        const TrainHooks& hooks = {});

/// Loads the manifest (train/val splits; every entry trains when no entry
/// carries the train label) and runs train_pairs.
TrainResult train(const TrainConfig& cfg, const TrainHooks& hooks = {});

/// Mean (PSNR, SSIM) of `net` on the center crops of `pairs`, scored on
/// 8-bit quantized outputs.
std::pair<double, double> validate_crops(const ComputationGraph& net,
                                         const std::vector<ImagePair>& pairs);

void write_curve(const std::vector<CurvePoint>& curve,
                 const std::filesystem::path& path);

}  // namespace mssr
