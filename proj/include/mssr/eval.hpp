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

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "mssr/manifest.hpp"
#include "mssr/models.hpp"

namespace mssr {

/// Any same-size image-to-image map (1 x 3 x h x w in and out).
using Model = std::function<Tensor(const Tensor&)>;

/// Runs `model` on the eight flip/rotation variants of `image`, undoes each
/// transform on the corresponding output and averages the aligned results.
/// Outputs are summed in transform-index order.
Tensor self_ensemble(const Model& model, const Tensor& image);

/// tile == 0 disables tiling.
struct TileConfig {
  int tile = 0;
  int overlap = 0;
};

/// Smallest overlap accepted by tiled_infer for this network: the receptive
/// field rounded up to a multiple of 4.
int minimum_overlap(const ComputationGraph& net);

/// Reflect-pads the image to the network's size multiple, runs it whole and
/// crops the result back.
Tensor run_network(const ComputationGraph& net, const Tensor& image);

/// Tiled inference. The image is reflect-padded to a multiple of 4; each
/// tile of the grid is run with `overlap` extra context on every side
/// (clipped at the image border) and only its central tile is kept. Throws
/// std::invalid_argument when the tile is not a positive multiple of 4 or
/// the overlap is not a multiple of 4 at least the receptive field.
Tensor tiled_infer(const ComputationGraph& net, const Tensor& image,
                   const TileConfig& cfg);

/// run_network or tiled_infer depending on cfg.tile.
Model make_model(const ComputationGraph& net, TileConfig cfg = {});

struct ImageMetrics {
  std::string id;
  double psnr = 0.0;
  double ssim = 0.0;
  std::string split;
  int camera = 0;
};

struct SkippedPair {
  std::string id;
  std::string reason;
};

/// Group mean. `psnr` is the plain arithmetic mean, so one identical pair
/// makes it +infinity; `finite_psnr` averages only the finite values.
struct Aggregate {
  std::string group;
  std::size_t count = 0;
  double psnr = 0.0;
  double finite_psnr = 0.0;
  std::size_t infinite = 0;
  double ssim = 0.0;
};

struct MetricReport {
  std::vector<ImageMetrics> images;
  std::vector<SkippedPair> skipped;
  /// "all" first, then "cam<N>" per camera tag, then "split:<name>" per
  /// manifest split label, each in order of first appearance.
  std::vector<Aggregate> aggregates;

  const Aggregate* find(std::string_view group) const;
};

struct EvalOptions {
  bool ensemble = true;
  bool y_channel = false;
};

/// Aggregates computed from `images` in order.
std::vector<Aggregate> aggregate_metrics(const std::vector<ImageMetrics>& images);

/// Runs the model on every pair in manifest order. Pairs whose LR and HR
/// sizes differ are skipped and recorded; unreadable files throw.
MetricReport evaluate(const Model& model, const DatasetManifest& manifest,
                      const EvalOptions& options = {});

/// Line-oriented human-readable report.
void write_report_text(const MetricReport& report, std::ostream& out);

/// Tab-separated records with the fixed header
///   record id psnr_db ssim split camera count note
/// "image" rows come first in manifest order, then "aggregate" rows, then
/// "skipped" rows. Infinite PSNR is written as "inf".
void write_report_tsv(const MetricReport& report, std::ostream& out);
void write_report_tsv(const MetricReport& report,
                      const std::filesystem::path& path);

}  // namespace mssr
