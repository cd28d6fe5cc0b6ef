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

#include "mssr/cli.hpp"

#include <filesystem>
#include <iomanip>
#include <optional>
#include <ostream>
#include <string>

#include "CLI11.hpp"
#include "mssr/checkpoint.hpp"
#include "mssr/eval.hpp"
#include "mssr/image_io.hpp"
#include "mssr/manifest.hpp"
#include "mssr/selftest.hpp"
#include "mssr/trainer.hpp"

namespace mssr {

namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kModels = {"baseline-r", "msrn", "baseline-d", "msdn"};

struct Options {
  std::string model;
  fs::path config;
  fs::path ckpt;
  fs::path manifest;
  fs::path in;
  fs::path out;
  bool ensemble = false;
  bool eval_ensemble = true;
  int tile = 0;
  std::optional<int> overlap;
  std::optional<std::uint64_t> seed;
  std::string loss;
  bool y_channel = false;
  fs::path report;
  bool identity = false;
  bool per_layer = false;
};

// Loads the network named by --ckpt and/or --model. Without a checkpoint the
// preset is initialized from --seed and a warning is printed.
ComputationGraph load_model(const Options& o, std::ostream& err) {
  if (!o.ckpt.empty()) {
    const Checkpoint ckpt = load_checkpoint(o.ckpt);
    if (!o.model.empty() && preset(o.model).kind != ckpt.spec.kind) {
      throw std::invalid_argument("checkpoint '" + o.ckpt.string() + "' holds a " +
                                  std::string(to_string(ckpt.spec.kind)) +
                                  " network, not " + o.model);
    }
    return restore_network(ckpt);
  }
  if (o.model.empty()) {
    throw std::invalid_argument("either --ckpt or --model is required");
  }
  err << "warning: no --ckpt given; using untrained " << o.model
      << " weights (seed " << o.seed.value_or(0) << ")\n";
  return build_network(preset(o.model), o.seed.value_or(0));
}

TileConfig tile_config(const Options& o, const ComputationGraph& net,
                       std::ostream& err) {
  if (o.tile == 0) {
    if (o.overlap) err << "warning: --overlap ignored without --tile\n";
    return {};
  }
  if (o.tile < 0 || o.tile % 4 != 0) {
    throw std::invalid_argument("--tile must be a positive multiple of 4");
  }
  const int minimum = minimum_overlap(net);
  int overlap = o.overlap.value_or(minimum);
  if (overlap < minimum || overlap % 4 != 0) {
    err << "warning: --overlap " << overlap
        << " is below the receptive field or not a multiple of 4; using "
        << minimum << "\n";
    overlap = minimum;
  }
  return {o.tile, overlap};
}

int cmd_train(const Options& o, std::ostream& out, std::ostream& err) {
  TrainConfig cfg = load_train_config(o.config);
  if (!o.model.empty()) cfg.model = o.model;
  if (!o.loss.empty()) cfg.loss = parse_loss_mode(o.loss);
  if (o.seed) cfg.seed = *o.seed;
  if (!o.ckpt.empty()) cfg.ckpt_dir = o.ckpt;
  if (!o.manifest.empty()) cfg.data_manifest = o.manifest;
  cfg.validate();
  if (cfg.ckpt_dir.empty()) {
    throw std::invalid_argument("no checkpoint directory (ckpt_dir or --ckpt)");
  }
  err << "training " << cfg.model << " for " << cfg.updates << " updates, loss "
      << to_string(cfg.loss) << ", batch " << cfg.batch_size << ", patch "
      << cfg.patch_size << "\n";
  TrainHooks hooks;
  hooks.on_eval = [&](const CurvePoint& c) {
    out << "update=" << c.update << " lr=" << c.lr << " loss=" << std::fixed
        << std::setprecision(6) << c.train_loss << " val_psnr=" << std::setprecision(4)
        << c.val_psnr << " val_ssim=" << std::setprecision(6) << c.val_ssim
        << std::defaultfloat << "\n";
  };
  train(cfg, hooks);
  out << "checkpoint written to " << cfg.ckpt_dir.string() << "\n";
  return kExitOk;
}

int cmd_infer(const Options& o, std::ostream& out, std::ostream& err) {
  const ComputationGraph net = load_model(o, err);
  const TileConfig tiles = tile_config(o, net, err);
  const Model base = make_model(net, tiles);
  const auto run = [&](const fs::path& in, const fs::path& dst) {
    const Tensor lr = to_tensor(read_image(in));
    const Tensor sr = o.ensemble ? self_ensemble(base, lr) : base(lr);
    if (dst.has_parent_path()) fs::create_directories(dst.parent_path());
    write_image(from_tensor(sr), dst);
    out << in.string() << " -> " << dst.string() << "\n";
  };
  if (!o.in.empty()) {
    if (o.out.empty()) throw std::invalid_argument("--in needs --out");
    run(o.in, o.out);
    return kExitOk;
  }
  if (o.manifest.empty() || o.out.empty()) {
    throw std::invalid_argument("give --in/--out or --manifest with an --out directory");
  }
  const DatasetManifest m = load_manifest(o.manifest, ManifestMode::inference);
  for (const auto& e : m.entries) run(e.lr_path, o.out / (e.id + ".png"));
  return kExitOk;
}

int cmd_eval(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.manifest.empty()) throw std::invalid_argument("--manifest is required");
  const DatasetManifest m = load_manifest(o.manifest, ManifestMode::paired);
  EvalOptions opt;
  opt.ensemble = o.eval_ensemble;
  opt.y_channel = o.y_channel;
  MetricReport report;
  if (o.identity) {
    opt.ensemble = false;
    report = evaluate([](const Tensor& x) { return x; }, m, opt);
  } else {
    const ComputationGraph net = load_model(o, err);
    report = evaluate(make_model(net, tile_config(o, net, err)), m, opt);
  }
  for (const auto& s : report.skipped) {
    err << "warning: skipped '" << s.id << "': " << s.reason << "\n";
  }
  write_report_text(report, out);
  if (!o.report.empty()) write_report_tsv(report, o.report);
  return kExitOk;
}

int cmd_inspect(const Options& o, std::ostream& out, std::ostream&) {
  NetworkSpec spec;
  if (!o.ckpt.empty()) {
    spec = load_checkpoint(o.ckpt).spec;
  } else if (!o.model.empty()) {
    spec = preset(o.model);
  } else {
    throw std::invalid_argument("--model or --ckpt is required");
  }
  const ComputationGraph net = build_topology(spec);
  const GraphAudit audit = audit_graph(net.graph);
  const ParameterCount params = count_parameters(net.graph);
  const auto triple = [](const std::array<int, 3>& v) {
    return std::to_string(v[0]) + "," + std::to_string(v[1]) + "," +
           std::to_string(v[2]);
  };
  out << "model=" << to_string(spec.kind) << "\n"
      << "family=" << to_string(spec.family) << "\n"
      << "blocks=" << triple(spec.blocks) << "\n"
      << "filters=" << triple(spec.filters) << "\n"
      << "downscale=" << spec.ds2_downscale << ";" << spec.ds4_downscale[0] << ","
      << spec.ds4_downscale[1] << "\n"
      << "upscale=" << spec.ds2_upscale << ";" << spec.ds4_upscale[0] << ","
      << spec.ds4_upscale[1] << "\n"
      << "parameters=" << params.total << "\n"
      << "additions=" << audit.additions << "\n"
      << "concatenations=" << audit.concatenations << "\n"
      << "receptive_field=" << receptive_field(net.graph) << "\n"
      << "min_overlap=" << minimum_overlap(net) << "\n";
  if (o.per_layer) {
    for (const auto& [name, count] : params.per_layer) {
      out << "layer " << name << "=" << count << "\n";
    }
  }
  return kExitOk;
}

int cmd_self_test(std::ostream& out) {
  const auto results = run_self_test(out);
  std::size_t failed = 0;
  for (const auto& r : results) failed += r.passed ? 0 : 1;
  out << (failed == 0 ? "self-test passed" : "self-test FAILED") << " ("
      << results.size() - failed << "/" << results.size() << ")\n";
  return failed == 0 ? kExitOk : kExitFailure;
}

int cmd_split(const Options& o, std::ostream& out) {
  if (o.manifest.empty()) throw std::invalid_argument("--manifest is required");
  const DatasetManifest m = load_manifest(o.manifest, ManifestMode::inference);
  const auto [cam1, cam2] = split_by_camera(m);
  const fs::path dir = o.out.empty() ? fs::absolute(o.manifest).parent_path() : o.out;
  const std::string stem = o.manifest.stem().string();
  const fs::path p1 = dir / (stem + ".cam1.tsv");
  const fs::path p2 = dir / (stem + ".cam2.tsv");
  save_manifest(cam1, p1);
  save_manifest(cam2, p2);
  out << "cam1=" << cam1.size() << " -> " << p1.string() << "\n"
      << "cam2=" << cam2.size() << " -> " << p2.string() << "\n";
  return kExitOk;
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out,
             std::ostream& err) {
  Options o;
  CLI::App app{"Multi-scale residual and dense super-resolution toolkit", "mssr"};
  app.require_subcommand(1);

  const auto add_model = [&](CLI::App* sub) {
    sub->add_option("--model", o.model, "Network preset")
        ->check(CLI::IsMember(kModels));
  };
  const auto add_tiling = [&](CLI::App* sub) {
    sub->add_option("--tile", o.tile, "Tile size in pixels (multiple of 4; 0 = whole image)");
    sub->add_option("--overlap", o.overlap,
                    "Context around each tile (raised to the receptive field if smaller)");
  };

  CLI::App* train = app.add_subcommand("train", "Train a network from a key=value config");
  train->add_option("--config", o.config, "Training config file")->required();
  add_model(train);
  train->add_option("--ckpt", o.ckpt, "Checkpoint directory (overrides ckpt_dir)");
  train->add_option("--manifest", o.manifest, "Dataset manifest (overrides data_manifest)");
  train->add_option("--seed", o.seed, "Random seed (overrides seed)");
  train->add_option("--loss", o.loss, "Training loss")->check(CLI::IsMember({"l1", "l2"}));

  CLI::App* infer = app.add_subcommand("infer", "Super-resolve one image or a manifest");
  add_model(infer);
  infer->add_option("--ckpt", o.ckpt, "Checkpoint directory");
  infer->add_option("--in", o.in, "Input PNG");
  infer->add_option("--out", o.out, "Output PNG, or directory with --manifest");
  infer->add_option("--manifest", o.manifest, "Manifest of LR images");
  infer->add_flag("--ensemble", o.ensemble, "Average over the 8 flip/rotation variants");
  add_tiling(infer);
  infer->add_option("--seed", o.seed, "Seed for untrained weights when no --ckpt");

  CLI::App* eval = app.add_subcommand("eval", "PSNR/SSIM report over a paired manifest");
  add_model(eval);
  eval->add_option("--ckpt", o.ckpt, "Checkpoint directory");
  eval->add_option("--manifest", o.manifest, "Manifest of LR/HR pairs")->required();
  eval->add_flag("--ensemble,!--no-ensemble", o.eval_ensemble,
                 "Self-ensemble (default on)");
  add_tiling(eval);
  eval->add_flag("--y-channel", o.y_channel, "PSNR on BT.601 luma instead of RGB");
  eval->add_option("--report", o.report, "Write the tab-separated report here");
  eval->add_flag("--identity", o.identity, "Score the LR inputs themselves");
  eval->add_option("--seed", o.seed, "Seed for untrained weights when no --ckpt");

  CLI::App* inspect = app.add_subcommand("inspect", "Describe a preset or checkpoint");
  add_model(inspect);
  inspect->add_option("--ckpt", o.ckpt, "Checkpoint directory");
  inspect->add_flag("--per-layer", o.per_layer, "List per-layer parameter counts");

  app.add_subcommand("self-test", "Run built-in gradient and oracle checks");

  CLI::App* split = app.add_subcommand("split", "Split a manifest by camera tag");
  split->add_option("--manifest", o.manifest, "Manifest to split")->required();
  split->add_option("--out", o.out, "Output directory (default: next to the manifest)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    const auto subs = app.get_subcommands();
    out << (subs.empty() ? app.help() : subs.front()->help());
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kExitUsage;
  }

  try {
    if (train->parsed()) return cmd_train(o, out, err);
    if (infer->parsed()) return cmd_infer(o, out, err);
    if (eval->parsed()) return cmd_eval(o, out, err);
    if (inspect->parsed()) return cmd_inspect(o, out, err);
    if (split->parsed()) return cmd_split(o, out);
    return cmd_self_test(out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace mssr
