// Copyright 2026 The pfmg Authors
// SPDX-License-Identifier: Apache-2.0
//
// Training loop, evaluation metric and the ablation runner.

#ifndef PFMG_TRAIN_HPP
#define PFMG_TRAIN_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pfmg/checkpoint.hpp"
#include "pfmg/features.hpp"
#include "pfmg/model.hpp"

namespace pfmg {

struct TrainConfig {
  TrainMode mode = TrainMode::supervised;
  std::size_t epochs = 200;
  std::size_t batch_size = 32;
  double learning_rate = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  ModelOptions options;
  std::size_t d_h = 64;
  std::size_t d_m = 64;
  std::uint64_t seed = 0;
  /// Worker threads per batch. Results do not depend on this value.
  std::size_t threads = 1;
  /// Write a checkpoint to out_dir/epoch_NNNN every this many epochs; 0 disables.
  std::size_t checkpoint_every = 0;
  fs::path out_dir;

  void validate() const;
  nlohmann::json to_json() const;
};

struct MetricsReport {
  std::vector<double> loss_curve;  // mean training loss per epoch
  double accuracy = 0.0;           // segment accuracy
  std::size_t segments = 0;
  /// Indexed by segment label, background last; classes without segments report 0.
  std::vector<double> per_class_accuracy;
  std::vector<std::size_t> per_class_segments;
  nlohmann::json config;
  double wall_time_seconds = 0.0;

  nlohmann::json to_json() const;
  static MetricsReport from_json(const nlohmann::json& j);
};

struct TrainResult {
  ModelParams<float> params;
  MetricsReport report;  // accuracy measured on the training data
};

/// Called after every epoch with (epoch index, mean loss).
using EpochCallback = std::function<void(std::size_t, double)>;

/// Mini-batch Adam on the given samples. Throws DivergenceError naming the
/// first stage with a non-finite value when the loss stops being finite.
TrainResult train(const TrainConfig& config, const FeatureDims& dims,
                  const std::vector<Sample>& samples, const EpochCallback& on_epoch = {});

TrainResult train(const TrainConfig& config, const DatasetManifest& manifest,
                  const EpochCallback& on_epoch = {});

/// Loss of one sample and its gradient for every parameter, in for_each order.
struct SampleGradient {
  double loss = 0.0;
  std::vector<Tensor<float>> grads;
};

SampleGradient sample_gradient(const ModelParams<float>& params, const Sample& sample,
                               const ModelOptions& options, TrainMode mode);

/// Fraction of segments whose decoded label equals the ground truth.
double segment_accuracy(const std::vector<Prediction>& predictions,
                        const std::vector<LabelRecord>& labels);

MetricsReport evaluate(const ModelParams<float>& params, const ModelOptions& options,
                       const std::vector<Sample>& samples,
                       std::vector<Prediction>* predictions = nullptr);

/// Throws ConsistencyError when the checkpoint does not fit the manifest.
MetricsReport evaluate(const Checkpoint& checkpoint, const DatasetManifest& manifest,
                       std::vector<Prediction>* predictions = nullptr);

// Ablation.

struct AblationVariant {
  std::string name;
  MotionMode motion;
  bool temporal_attention;
};

/// no-motion, future-only, pfme w/o temporal attention, pfme with it.
const std::vector<AblationVariant>& ablation_variants();

struct AblationRun {
  std::string variant;
  std::uint64_t seed = 0;
  MetricsReport report;  // held-out metrics
};

struct AblationSummary {
  std::string variant;
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation over seeds
};

struct AblationTable {
  std::vector<AblationRun> runs;

  std::vector<AblationSummary> summary() const;
  nlohmann::json to_json() const;
  static AblationTable from_json(const nlohmann::json& j);
  /// Header variant,seed,accuracy.
  std::string to_csv() const;
};

/// Trains every variant for every seed on `train_set` and evaluates on
/// `held_out`. Needs at least two seeds.
AblationTable ablate(const TrainConfig& base, const FeatureDims& dims,
                     const std::vector<Sample>& train_set, const std::vector<Sample>& held_out,
                     const std::vector<std::uint64_t>& seeds,
                     const std::function<void(const AblationRun&)>& on_run = {});

/// Deterministic split: every fourth video (index % 4 == 3) is held out.
void split_holdout(const std::vector<Sample>& all, std::vector<Sample>& train_set,
                   std::vector<Sample>& held_out);

}  // namespace pfmg

#endif  // PFMG_TRAIN_HPP
