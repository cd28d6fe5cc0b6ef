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

#include "mssr/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "mssr/augment.hpp"
#include "mssr/image_io.hpp"
#include "mssr/metrics.hpp"

namespace mssr {

Tensor self_ensemble(const Model& model, const Tensor& image) {
  Tensor sum;
  for (const auto& t : all_transforms()) {
    Tensor out = invert_geometric(t, model(apply_geometric(t, image)));
    if (sum.empty()) {
      sum = std::move(out);
      continue;
    }
    if (out.shape() != sum.shape()) {
      throw ShapeError("self_ensemble: model output " + out.shape().str() +
                       " differs from " + sum.shape().str());
    }
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += out[i];
  }
  for (std::size_t i = 0; i < sum.size(); ++i) sum[i] /= 8.0f;
  return sum;
}

namespace {

int round_up(int v, int m) { return (v + m - 1) / m * m; }

Tensor pad_to_multiple(const Tensor& image, int m) {
  const Shape& s = image.shape();
  const int ph = round_up(s.h, m) - s.h;
  const int pw = round_up(s.w, m) - s.w;
  if (ph == 0 && pw == 0) return image;
  return reflect_pad(image, 0, ph, 0, pw);
}

}  // namespace

int minimum_overlap(const ComputationGraph& net) {
  return round_up(receptive_field(net.graph), 4);
}

Tensor run_network(const ComputationGraph& net, const Tensor& image) {
  const Shape& s = image.shape();
  const Tensor padded = pad_to_multiple(image, net.spec.size_multiple());
  Tensor out = net.forward(padded);
  if (out.shape().h == s.h && out.shape().w == s.w) return out;
  return crop(out, 0, 0, s.h, s.w);
}

Tensor tiled_infer(const ComputationGraph& net, const Tensor& image,
                   const TileConfig& cfg) {
  if (cfg.tile <= 0 || cfg.tile % 4 != 0) {
    throw std::invalid_argument("tile size " + std::to_string(cfg.tile) +
                                " must be a positive multiple of 4");
  }
  const int rf = receptive_field(net.graph);
  if (cfg.overlap < rf || cfg.overlap % 4 != 0) {
    throw std::invalid_argument(
        "overlap " + std::to_string(cfg.overlap) +
        " must be a multiple of 4 and at least the receptive field " +
        std::to_string(rf) + " (minimum " + std::to_string(minimum_overlap(net)) +
        ")");
  }
  const Shape& s = image.shape();
  if (s.n != 1) throw ShapeError("tiled_infer expects a single image");
  const Tensor padded = pad_to_multiple(image, 4);
  const int H = padded.shape().h;
  const int W = padded.shape().w;
  Tensor out({1, net.spec.output_channels, H, W});
  for (int y0 = 0; y0 < H; y0 += cfg.tile) {
    const int y1 = std::min(H, y0 + cfg.tile);
    const int wy0 = std::max(0, y0 - cfg.overlap);
    const int wy1 = std::min(H, y1 + cfg.overlap);
    for (int x0 = 0; x0 < W; x0 += cfg.tile) {
      const int x1 = std::min(W, x0 + cfg.tile);
      const int wx0 = std::max(0, x0 - cfg.overlap);
      const int wx1 = std::min(W, x1 + cfg.overlap);
      const Tensor window = crop(padded, wy0, wx0, wy1 - wy0, wx1 - wx0);
      const Tensor result = net.forward(window);
      for (int c = 0; c < out.shape().c; ++c) {
        for (int y = y0; y < y1; ++y) {
          const float* src = &result.at(0, c, y - wy0, x0 - wx0);
          std::copy(src, src + (x1 - x0), &out.at(0, c, y, x0));
        }
      }
    }
  }
  if (H == s.h && W == s.w) return out;
  return crop(out, 0, 0, s.h, s.w);
}

Model make_model(const ComputationGraph& net, TileConfig cfg) {
  if (cfg.tile > 0) {
    return [&net, cfg](const Tensor& x) { return tiled_infer(net, x, cfg); };
  }
  return [&net](const Tensor& x) { return run_network(net, x); };
}

const Aggregate* MetricReport::find(std::string_view group) const {
  for (const auto& a : aggregates) {
    if (a.group == group) return &a;
  }
  return nullptr;
}

std::vector<Aggregate> aggregate_metrics(const std::vector<ImageMetrics>& images) {
  std::vector<std::string> groups{"all"};
  const auto note = [&](const std::string& g) {
    if (std::find(groups.begin(), groups.end(), g) == groups.end()) {
      groups.push_back(g);
    }
  };
  for (const auto& m : images) {
    if (m.camera > 0) note("cam" + std::to_string(m.camera));
  }
  for (const auto& m : images) {
    if (!m.split.empty()) note("split:" + m.split);
  }
  std::vector<Aggregate> out;
  for (const auto& g : groups) {
    Aggregate a;
    a.group = g;
    double psnr_sum = 0.0;
    double finite_sum = 0.0;
    double ssim_sum = 0.0;
    for (const auto& m : images) {
      const bool member = g == "all" ||
                          (m.camera > 0 && g == "cam" + std::to_string(m.camera)) ||
                          (!m.split.empty() && g == "split:" + m.split);
      if (!member) continue;
      ++a.count;
      psnr_sum += m.psnr;
      ssim_sum += m.ssim;
      if (std::isinf(m.psnr)) {
        ++a.infinite;
      } else {
        finite_sum += m.psnr;
      }
    }
    if (a.count > 0) {
      a.psnr = psnr_sum / static_cast<double>(a.count);
      a.ssim = ssim_sum / static_cast<double>(a.count);
    }
    const std::size_t finite = a.count - a.infinite;
    a.finite_psnr = finite > 0 ? finite_sum / static_cast<double>(finite)
                               : (a.count > 0 ? a.psnr : 0.0);
    out.push_back(a);
  }
  return out;
}

MetricReport evaluate(const Model& model, const DatasetManifest& manifest,
                      const EvalOptions& options) {
  MetricReport report;
  for (const auto& e : manifest.entries) {
    if (!e.has_hr()) {
      throw ManifestError("entry '" + e.id + "' has no HR path to evaluate against");
    }
    const Tensor lr = to_tensor(read_image(e.lr_path));
    const Tensor hr = to_tensor(read_image(e.hr_path));
    if (lr.shape() != hr.shape()) {
      report.skipped.push_back(
          {e.id, "LR " + std::to_string(lr.shape().w) + "x" +
                     std::to_string(lr.shape().h) + " vs HR " +
                     std::to_string(hr.shape().w) + "x" +
                     std::to_string(hr.shape().h)});
      continue;
    }
    Tensor sr = options.ensemble ? self_ensemble(model, lr) : model(lr);
    // Score what would be written to disk.
    sr = to_tensor(from_tensor(sr));
    ImageMetrics m;
    m.id = e.id;
    m.psnr = psnr(sr, hr, options.y_channel);
    m.ssim = ssim(sr, hr);
    m.split = e.split;
    m.camera = e.camera;
    report.images.push_back(std::move(m));
  }
  report.aggregates = aggregate_metrics(report.images);
  return report;
}

namespace {

std::string fmt(double v, int precision) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream s;
  s << std::fixed << std::setprecision(precision) << v;
  return s.str();
}

}  // namespace

void write_report_text(const MetricReport& report, std::ostream& out) {
  for (const auto& m : report.images) {
    out << m.id << ": psnr " << fmt(m.psnr, 4) << " dB, ssim "
        << fmt(m.ssim, 6) << '\n';
  }
  for (const auto& s : report.skipped) {
    out << s.id << ": skipped (" << s.reason << ")\n";
  }
  for (const auto& a : report.aggregates) {
    out << "mean[" << a.group << "] over " << a.count << ": psnr "
        << fmt(a.psnr, 4) << " dB";
    if (a.infinite > 0 && a.infinite < a.count) {
      out << " (finite-only " << fmt(a.finite_psnr, 4) << " dB, " << a.infinite
          << " identical)";
    }
    out << ", ssim " << fmt(a.ssim, 6) << '\n';
  }
}

void write_report_tsv(const MetricReport& report, std::ostream& out) {
  out << "record\tid\tpsnr_db\tssim\tsplit\tcamera\tcount\tnote\n";
  for (const auto& m : report.images) {
    out << "image\t" << m.id << '\t' << fmt(m.psnr, 6) << '\t'
        << fmt(m.ssim, 8) << '\t' << (m.split.empty() ? "-" : m.split) << '\t'
        << (m.camera > 0 ? "cam" + std::to_string(m.camera) : "-")
        << "\t1\t-\n";
  }
  for (const auto& a : report.aggregates) {
    out << "aggregate\t" << a.group << '\t' << fmt(a.psnr, 6) << '\t'
        << fmt(a.ssim, 8) << "\t-\t-\t" << a.count << '\t'
        << "finite_psnr=" << fmt(a.finite_psnr, 6)
        << ";infinite=" << a.infinite << '\n';
  }
  for (const auto& s : report.skipped) {
    out << "skipped\t" << s.id << "\tnan\tnan\t-\t-\t0\t" << s.reason << '\n';
  }
}

void write_report_tsv(const MetricReport& report,
                      const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write report '" + path.string() + "'");
  write_report_tsv(report, out);
}

}  // namespace mssr
