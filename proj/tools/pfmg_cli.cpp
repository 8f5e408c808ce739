// Copyright 2026 The pfmg Authors
// SPDX-License-Identifier: Apache-2.0
//
// pfmg command-line interface: synth, train, eval, ablate, gradcheck.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pfmg/checkpoint.hpp"
#include "pfmg/features.hpp"
#include "pfmg/gradcheck.hpp"
#include "pfmg/train.hpp"

namespace {

using namespace pfmg;

void write_text(const fs::path& path, const std::string& text) {
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      seeds.push_back(std::stoull(item));
    } catch (const std::exception&) {
      throw ConfigError("bad seed '" + item + "'");
    }
  }
  return seeds;
}

struct SynthArgs {
  SynthOptions options;
  std::string out;
};

struct TrainArgs {
  std::string manifest;
  std::string mode = "supervised";
  std::string motion = "pfme";
  std::string temporal_attention = "on";
  std::string scale_mode = "sqrt";
  std::string out;
  TrainConfig config;
};

struct EvalArgs {
  std::string manifest;
  std::string checkpoint;
  std::string report;
  std::string predictions;
};

struct AblateArgs {
  std::string manifest;
  std::string seeds = "1,2,3,4,5";
  std::string out;
  std::size_t epochs = 200;
  std::size_t batch = 32;
  std::size_t threads = 1;
};

int run_synth(const SynthArgs& a) {
  const DatasetManifest m = synth_dataset(a.options, a.out);
  std::cout << "wrote " << m.entries.size() << " videos to " << a.out << "/manifest.json\n";
  return 0;
}

int run_train(TrainArgs a) {
  a.config.mode = parse_train_mode(a.mode);
  a.config.options.motion = parse_motion_mode(a.motion);
  if (a.temporal_attention != "on" && a.temporal_attention != "off") {
    throw ConfigError("--temporal-attention takes on|off");
  }
  a.config.options.temporal_attention = a.temporal_attention == "on";
  a.config.options.scale_mode = parse_scale_mode(a.scale_mode);
  a.config.out_dir = a.out;

  const DatasetManifest manifest = DatasetManifest::load(a.manifest);
  const TrainResult result =
      train(a.config, manifest, [](std::size_t epoch, double loss) {
        std::printf("epoch %4zu  loss %.6f\n", epoch + 1, loss);
        std::fflush(stdout);
      });
  fs::create_directories(a.out);
  const ModelDims dims{manifest.dims.d_a, manifest.dims.d_v, manifest.dims.classes, a.config.d_h,
                       a.config.d_m};
  save_checkpoint({result.params, dims, a.config.options, a.config.mode, a.config.epochs}, a.out);
  write_text(fs::path(a.out) / "metrics.json", result.report.to_json().dump(1) + "\n");
  std::printf("training segment accuracy %.4f  (%.1f s)\n", result.report.accuracy,
              result.report.wall_time_seconds);
  return 0;
}

int run_eval(const EvalArgs& a) {
  const DatasetManifest manifest = DatasetManifest::load(a.manifest);
  const Checkpoint ck = load_checkpoint(a.checkpoint);
  std::vector<Prediction> preds;
  const MetricsReport report = evaluate(ck, manifest, &preds);
  write_text(a.report, report.to_json().dump(1) + "\n");
  if (!a.predictions.empty()) {
    std::string lines;
    for (const auto& p : preds) lines += prediction_json(p) + "\n";
    write_text(a.predictions, lines);
  }
  std::printf("segment accuracy %.4f over %zu segments\n", report.accuracy, report.segments);
  return 0;
}

int run_ablate(const AblateArgs& a) {
  const DatasetManifest manifest = DatasetManifest::load(a.manifest);
  std::vector<Sample> train_set, held_out;
  split_holdout(load_dataset(manifest), train_set, held_out);
  TrainConfig base;
  base.epochs = a.epochs;
  base.batch_size = a.batch;
  base.threads = a.threads;
  const AblationTable table =
      ablate(base, manifest.dims, train_set, held_out, parse_seeds(a.seeds),
             [](const AblationRun& r) {
               std::printf("%-34s seed %3llu  held-out accuracy %.4f\n", r.variant.c_str(),
                           static_cast<unsigned long long>(r.seed), r.report.accuracy);
               std::fflush(stdout);
             });
  fs::create_directories(a.out);
  write_text(fs::path(a.out) / "ablation.json", table.to_json().dump(1) + "\n");
  write_text(fs::path(a.out) / "ablation.csv", table.to_csv());
  for (const auto& s : table.summary()) {
    std::printf("%-34s mean %.4f  sd %.4f\n", s.variant.c_str(), s.mean, s.sd);
  }
  return 0;
}

int run_gradcheck_cmd(const std::string& module) {
  const auto results = run_gradcheck(module);
  bool ok = true;
  for (const auto& r : results) {
    std::printf("%-5s %-45s points %2zu  coords %5zu  max rel err %.3e\n", r.passed ? "PASS" : "FAIL",
                r.name.c_str(), r.points, r.coordinates, r.max_relative_error);
    ok &= r.passed;
  }
  return ok ? 0 : 1;
}

// Short name of the error class for the one-line message.
const char* error_kind(const pfmg::Error& e) {
  if (dynamic_cast<const pfmg::FormatError*>(&e)) return "format";
  if (dynamic_cast<const pfmg::ConsistencyError*>(&e)) return "consistency";
  if (dynamic_cast<const pfmg::DataError*>(&e)) return "data";
  if (dynamic_cast<const pfmg::IoError*>(&e)) return "io";
  if (dynamic_cast<const pfmg::LabelError*>(&e)) return "label";
  if (dynamic_cast<const pfmg::ConfigError*>(&e)) return "config";
  if (dynamic_cast<const pfmg::DivergenceError*>(&e)) return "divergence";
  if (dynamic_cast<const pfmg::DimensionError*>(&e)) return "dimension";
  return "contract";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Motion-guided audio-visual event localization"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic planted-event dataset");
  synth_cmd->set_help_flag("--help", "print this help message and exit");  // -h is taken by --h
  synth_cmd->add_option("--seed", synth.options.seed)->required();
  synth_cmd->add_option("--out", synth.out)->required();
  synth_cmd->add_option("--videos", synth.options.videos)->required();
  synth_cmd->add_option("--T", synth.options.dims.T)->required();
  synth_cmd->add_option("--da", synth.options.dims.d_a)->required();
  synth_cmd->add_option("--dv", synth.options.dims.d_v)->required();
  synth_cmd->add_option("--h", synth.options.dims.h)->required();
  synth_cmd->add_option("--w", synth.options.dims.w)->required();
  synth_cmd->add_option("--classes", synth.options.dims.classes)->required();
  synth_cmd->add_option("--snr", synth.options.snr)->required();

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "train a model and write a checkpoint");
  train_cmd->add_option("--manifest", tr.manifest)->required();
  train_cmd->add_option("--mode", tr.mode)->check(CLI::IsMember({"supervised", "weak"}));
  train_cmd->add_option("--epochs", tr.config.epochs);
  train_cmd->add_option("--batch", tr.config.batch_size);
  train_cmd->add_option("--lr", tr.config.learning_rate);
  train_cmd->add_option("--seed", tr.config.seed);
  train_cmd->add_option("--out", tr.out)->required();
  train_cmd->add_option("--motion", tr.motion)->check(CLI::IsMember({"pfme", "future-only", "off"}));
  train_cmd->add_option("--temporal-attention", tr.temporal_attention)
      ->check(CLI::IsMember({"on", "off"}));
  train_cmd->add_option("--scale-mode", tr.scale_mode)->check(CLI::IsMember({"sqrt", "linear"}));
  train_cmd->add_option("--threads", tr.config.threads, "data-parallel workers (results unchanged)");
  train_cmd->add_option("--checkpoint-every", tr.config.checkpoint_every,
                        "epochs between intermediate checkpoints (0 = off)");

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
  eval_cmd->add_option("--manifest", ev.manifest)->required();
  eval_cmd->add_option("--checkpoint", ev.checkpoint)->required();
  eval_cmd->add_option("--report", ev.report)->required();
  eval_cmd->add_option("--predictions", ev.predictions, "write one JSON prediction per line");

  AblateArgs ab;
  auto* ablate_cmd = app.add_subcommand("ablate", "run the motion ablation over several seeds");
  ablate_cmd->add_option("--manifest", ab.manifest)->required();
  ablate_cmd->add_option("--seeds", ab.seeds);
  ablate_cmd->add_option("--out", ab.out)->required();
  ablate_cmd->add_option("--epochs", ab.epochs);
  ablate_cmd->add_option("--batch", ab.batch);
  ablate_cmd->add_option("--threads", ab.threads);

  std::string module;
  auto* grad_cmd = app.add_subcommand("gradcheck", "finite-difference gradient suites");
  grad_cmd->add_option("--module", module);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth_cmd) return run_synth(synth);
    if (*train_cmd) return run_train(tr);
    if (*eval_cmd) return run_eval(ev);
    if (*ablate_cmd) return run_ablate(ab);
    if (*grad_cmd) return run_gradcheck_cmd(module);
  } catch (const pfmg::Error& e) {
    std::cerr << error_kind(e) << " error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
