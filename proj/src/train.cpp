// Copyright 2026 The pfmg Authors
// SPDX-License-Identifier: Apache-2.0

#include "pfmg/train.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <thread>

#include "pfmg/ops.hpp"
#include "pfmg/rng.hpp"

namespace pfmg {
namespace {

ModelDims model_dims(const TrainConfig& config, const FeatureDims& dims) {
  ModelDims m;
  m.d_a = dims.d_a;
  m.d_v = dims.d_v;
  m.classes = dims.classes;
  m.d_h = config.d_h;
  m.d_m = config.d_m;
  return m;
}

std::vector<std::size_t> epoch_order(std::uint64_t seed, std::size_t epoch, std::size_t n) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = Rng::stream(seed, "shuffle", epoch);
  for (std::size_t i = n; i > 1; --i) {
    std::swap(order[i - 1], order[rng.below(i)]);
  }
  return order;
}

class Adam {
 public:
  Adam(const ModelParams<float>& params, const TrainConfig& config) : config_(config) {
    params.for_each([this](const std::string&, const Tensor<float>& t) {
      first_.emplace_back(t.size(), 0.0f);
      second_.emplace_back(t.size(), 0.0f);
    });
  }

  void step(ModelParams<float>& params, const std::vector<std::vector<float>>& grads) {
    ++steps_;
    const auto b1 = static_cast<float>(config_.beta1);
    const auto b2 = static_cast<float>(config_.beta2);
    const auto lr = static_cast<float>(config_.learning_rate);
    const auto eps = static_cast<float>(config_.epsilon);
    const float c1 = 1.0f - static_cast<float>(std::pow(config_.beta1, steps_));
    const float c2 = 1.0f - static_cast<float>(std::pow(config_.beta2, steps_));
    std::size_t k = 0;
    params.for_each([&](const std::string&, Tensor<float>& t) {
      auto& m = first_[k];
      auto& v = second_[k];
      const auto& g = grads[k];
      std::vector<float> next(t.data().begin(), t.data().end());
      for (std::size_t i = 0; i < next.size(); ++i) {
        m[i] = b1 * m[i] + (1.0f - b1) * g[i];
        v[i] = b2 * v[i] + (1.0f - b2) * g[i] * g[i];
        const float m_hat = m[i] / c1;
        const float v_hat = v[i] / c2;
        next[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
      }
      t = Tensor<float>(t.shape(), std::move(next));
      ++k;
    });
  }

 private:
  const TrainConfig& config_;
  std::vector<std::vector<float>> first_;
  std::vector<std::vector<float>> second_;
  int steps_ = 0;
};

std::string epoch_dir_name(std::size_t epoch) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "epoch_%04zu", epoch);
  return buf;
}

void check_sample_dims(const Sample& s, const FeatureDims& dims) {
  const Shape audio{s.features.segments(), dims.d_a};
  if (s.features.audio.shape() != audio || s.features.visual.extent(3) != dims.d_v) {
    throw ConsistencyError("video '" + s.features.video_id + "' does not match dataset dims");
  }
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs == 0) throw ConfigError("epochs must be positive");
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning rate must be positive and finite");
  }
  if (threads == 0) throw ConfigError("threads must be positive");
  if (d_h == 0 || d_m == 0) throw ConfigError("hidden widths must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0 && epsilon > 0.0)) {
    throw ConfigError("invalid optimizer hyperparameters");
  }
}

nlohmann::json TrainConfig::to_json() const {
  return {{"mode", to_string(mode)},
          {"epochs", epochs},
          {"batch_size", batch_size},
          {"learning_rate", learning_rate},
          {"beta1", beta1},
          {"beta2", beta2},
          {"epsilon", epsilon},
          {"motion", to_string(options.motion)},
          {"temporal_attention", options.temporal_attention},
          {"scale_mode", to_string(options.scale_mode)},
          {"d_h", d_h},
          {"d_m", d_m},
          {"seed", seed}};
}

nlohmann::json MetricsReport::to_json() const {
  return {{"loss_curve", loss_curve},
          {"accuracy", accuracy},
          {"segments", segments},
          {"per_class_accuracy", per_class_accuracy},
          {"per_class_segments", per_class_segments},
          {"config", config},
          {"wall_time_seconds", wall_time_seconds}};
}

MetricsReport MetricsReport::from_json(const nlohmann::json& j) {
  try {
    MetricsReport r;
    r.loss_curve = j.at("loss_curve").get<std::vector<double>>();
    r.accuracy = j.at("accuracy").get<double>();
    r.segments = j.at("segments").get<std::size_t>();
    r.per_class_accuracy = j.at("per_class_accuracy").get<std::vector<double>>();
    r.per_class_segments = j.at("per_class_segments").get<std::vector<std::size_t>>();
    r.config = j.at("config");
    r.wall_time_seconds = j.at("wall_time_seconds").get<double>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("metrics report: ") + e.what());
  }
}

SampleGradient sample_gradient(const ModelParams<float>& params, const Sample& sample,
                               const ModelOptions& options, TrainMode mode) {
  Tape<float> tape;
  ModelParams<float> tracked = params;
  std::vector<Tensor<float>> leaves;
  tracked.for_each([&](const std::string&, Tensor<float>& t) {
    t = tape.variable(t);
    leaves.push_back(t);
  });
  const auto& f = sample.features;
  const ForwardTrace<float> tr = forward_trace(f.audio, f.visual, tracked, options);
  const Tensor<float> loss =
      mode == TrainMode::supervised
          ? supervised_loss(tr.scores, sample.labels).total
          : weak_aggregate_loss(segment_class_logits(tr.fused, tracked.head),
                                sample.labels.video_class);
  if (!std::isfinite(loss.item())) {
    std::string stage = tr.first_non_finite();
    if (stage.empty()) stage = "loss";
    throw DivergenceError("non-finite loss on video '" + f.video_id + "'; first non-finite stage: " +
                          stage);
  }
  SampleGradient out;
  out.loss = loss.item();
  out.grads = tape.backward(loss, leaves);
  return out;
}

TrainResult train(const TrainConfig& config, const FeatureDims& dims,
                  const std::vector<Sample>& samples, const EpochCallback& on_epoch) {
  config.validate();
  dims.validate();
  if (samples.empty()) throw ConfigError("no training samples");
  for (const auto& s : samples) check_sample_dims(s, dims);

  const auto started = std::chrono::steady_clock::now();
  const ModelDims mdims = model_dims(config, dims);
  TrainResult result;
  result.params = init_params(mdims, config.seed, config.options.scale_mode);
  Adam adam(result.params, config);

  std::vector<std::size_t> sizes;
  result.params.for_each([&](const std::string&, const Tensor<float>& t) { sizes.push_back(t.size()); });

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const auto order = epoch_order(config.seed, epoch, samples.size());
    double epoch_loss = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      const std::size_t count = end - begin;
      std::vector<SampleGradient> slots(count);
      std::vector<std::exception_ptr> errors(count);
      auto work = [&](std::size_t lane, std::size_t lanes) {
        for (std::size_t i = lane; i < count; i += lanes) {
          try {
            slots[i] = sample_gradient(result.params, samples[order[begin + i]], config.options,
                                       config.mode);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      };
      const std::size_t lanes = std::min(config.threads, count);
      if (lanes <= 1) {
        work(0, 1);
      } else {
        std::vector<std::thread> pool;
        for (std::size_t lane = 0; lane < lanes; ++lane) pool.emplace_back(work, lane, lanes);
        for (auto& th : pool) th.join();
      }
      for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
      }

      // Fixed-order reduction keeps threaded runs bitwise identical.
      std::vector<std::vector<float>> grads(sizes.size());
      for (std::size_t k = 0; k < sizes.size(); ++k) grads[k].assign(sizes[k], 0.0f);
      for (const auto& slot : slots) {
        epoch_loss += slot.loss;
        for (std::size_t k = 0; k < sizes.size(); ++k) {
          auto g = slot.grads[k].data();
          for (std::size_t i = 0; i < sizes[k]; ++i) grads[k][i] += g[i];
        }
      }
      const float inv = 1.0f / static_cast<float>(count);
      for (auto& g : grads) {
        for (auto& x : g) x *= inv;
      }
      adam.step(result.params, grads);
    }
    epoch_loss /= static_cast<double>(samples.size());
    result.report.loss_curve.push_back(epoch_loss);
    if (on_epoch) on_epoch(epoch, epoch_loss);

    if (config.checkpoint_every > 0 && !config.out_dir.empty() &&
        (epoch + 1) % config.checkpoint_every == 0) {
      save_checkpoint({result.params, mdims, config.options, config.mode, epoch + 1},
                      config.out_dir / epoch_dir_name(epoch + 1));
    }
  }

  MetricsReport eval = evaluate(result.params, config.options, samples);
  eval.loss_curve = std::move(result.report.loss_curve);
  eval.config = config.to_json();
  eval.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  result.report = std::move(eval);
  return result;
}

TrainResult train(const TrainConfig& config, const DatasetManifest& manifest,
                  const EpochCallback& on_epoch) {
  return train(config, manifest.dims, load_dataset(manifest), on_epoch);
}

double segment_accuracy(const std::vector<Prediction>& predictions,
                        const std::vector<LabelRecord>& labels) {
  if (predictions.size() != labels.size()) {
    throw ConsistencyError("prediction and label counts differ");
  }
  std::size_t hit = 0, total = 0;
  for (std::size_t v = 0; v < labels.size(); ++v) {
    const auto& want = labels[v].segment_class;
    const auto& got = predictions[v].decoded;
    if (want.size() != got.size()) throw ConsistencyError("segment counts differ");
    for (std::size_t t = 0; t < want.size(); ++t) hit += want[t] == got[t];
    total += want.size();
  }
  return total ? static_cast<double>(hit) / static_cast<double>(total) : 0.0;
}

MetricsReport evaluate(const ModelParams<float>& params, const ModelOptions& options,
                       const std::vector<Sample>& samples, std::vector<Prediction>* predictions) {
  const auto started = std::chrono::steady_clock::now();
  const std::size_t C = params.head.w_c.extent(1);
  std::vector<Prediction> preds;
  std::vector<LabelRecord> labels;
  preds.reserve(samples.size());
  for (const auto& s : samples) {
    preds.push_back(predict(s.features, params, options));
    labels.push_back(s.labels);
  }

  MetricsReport r;
  r.accuracy = segment_accuracy(preds, labels);
  std::vector<std::size_t> hits(C + 1, 0);
  r.per_class_segments.assign(C + 1, 0);
  for (std::size_t v = 0; v < labels.size(); ++v) {
    for (std::size_t t = 0; t < labels[v].segment_class.size(); ++t) {
      const auto k = static_cast<std::size_t>(labels[v].segment_class[t]);
      if (k > C) throw LabelError("segment label outside [0, C]");
      ++r.per_class_segments[k];
      hits[k] += preds[v].decoded[t] == labels[v].segment_class[t];
      ++r.segments;
    }
  }
  r.per_class_accuracy.assign(C + 1, 0.0);
  for (std::size_t k = 0; k <= C; ++k) {
    if (r.per_class_segments[k]) {
      r.per_class_accuracy[k] =
          static_cast<double>(hits[k]) / static_cast<double>(r.per_class_segments[k]);
    }
  }
  r.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  if (predictions) *predictions = std::move(preds);
  return r;
}

MetricsReport evaluate(const Checkpoint& checkpoint, const DatasetManifest& manifest,
                       std::vector<Prediction>* predictions) {
  const FeatureDims& d = manifest.dims;
  if (checkpoint.dims.d_a != d.d_a || checkpoint.dims.d_v != d.d_v ||
      checkpoint.dims.classes != d.classes) {
    throw ConsistencyError("checkpoint dims do not match the manifest");
  }
  MetricsReport r = evaluate(checkpoint.params, checkpoint.options, load_dataset(manifest),
                             predictions);
  r.config = {{"mode", to_string(checkpoint.mode)},
              {"motion", to_string(checkpoint.options.motion)},
              {"temporal_attention", checkpoint.options.temporal_attention},
              {"scale_mode", to_string(checkpoint.options.scale_mode)},
              {"epoch", checkpoint.epoch},
              {"seed", checkpoint.params.seed}};
  return r;
}

const std::vector<AblationVariant>& ablation_variants() {
  static const std::vector<AblationVariant> variants{
      {"no-motion", MotionMode::off, false},
      {"future-only", MotionMode::future_only, false},
      {"pfme-without-temporal-attention", MotionMode::pfme, false},
      {"pfme-with-temporal-attention", MotionMode::pfme, true},
  };
  return variants;
}

std::vector<AblationSummary> AblationTable::summary() const {
  std::vector<AblationSummary> out;
  for (const auto& v : ablation_variants()) {
    std::vector<double> acc;
    for (const auto& r : runs) {
      if (r.variant == v.name) acc.push_back(r.report.accuracy);
    }
    if (acc.empty()) continue;
    AblationSummary s{v.name, 0.0, 0.0};
    for (double a : acc) s.mean += a;
    s.mean /= static_cast<double>(acc.size());
    if (acc.size() > 1) {
      double ss = 0.0;
      for (double a : acc) ss += (a - s.mean) * (a - s.mean);
      s.sd = std::sqrt(ss / static_cast<double>(acc.size() - 1));
    }
    out.push_back(s);
  }
  return out;
}

nlohmann::json AblationTable::to_json() const {
  nlohmann::json j;
  j["runs"] = nlohmann::json::array();
  for (const auto& r : runs) {
    j["runs"].push_back({{"variant", r.variant}, {"seed", r.seed}, {"report", r.report.to_json()}});
  }
  j["summary"] = nlohmann::json::array();
  for (const auto& s : summary()) {
    j["summary"].push_back({{"variant", s.variant}, {"mean", s.mean}, {"sd", s.sd}});
  }
  return j;
}

AblationTable AblationTable::from_json(const nlohmann::json& j) {
  AblationTable t;
  try {
    for (const auto& r : j.at("runs")) {
      t.runs.push_back({r.at("variant").get<std::string>(), r.at("seed").get<std::uint64_t>(),
                        MetricsReport::from_json(r.at("report"))});
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("ablation table: ") + e.what());
  }
  return t;
}

std::string AblationTable::to_csv() const {
  std::ostringstream os;
  os << "variant,seed,accuracy\n";
  char buf[64];
  for (const auto& r : runs) {
    std::snprintf(buf, sizeof buf, "%.17g", r.report.accuracy);
    os << r.variant << ',' << r.seed << ',' << buf << '\n';
  }
  return os.str();
}

AblationTable ablate(const TrainConfig& base, const FeatureDims& dims,
                     const std::vector<Sample>& train_set, const std::vector<Sample>& held_out,
                     const std::vector<std::uint64_t>& seeds,
                     const std::function<void(const AblationRun&)>& on_run) {
  if (seeds.size() < 2) throw ConfigError("ablation needs at least 2 seeds");
  if (held_out.empty()) throw ConfigError("ablation needs held-out videos");
  AblationTable table;
  for (const auto& variant : ablation_variants()) {
    for (std::uint64_t seed : seeds) {
      TrainConfig config = base;
      config.seed = seed;
      config.options.motion = variant.motion;
      config.options.temporal_attention = variant.temporal_attention;
      config.checkpoint_every = 0;
      const TrainResult trained = train(config, dims, train_set);
      AblationRun run{variant.name, seed, evaluate(trained.params, config.options, held_out)};
      run.report.loss_curve = trained.report.loss_curve;
      run.report.config = config.to_json();
      run.report.wall_time_seconds = trained.report.wall_time_seconds;
      if (on_run) on_run(run);
      table.runs.push_back(std::move(run));
    }
  }
  return table;
}

void split_holdout(const std::vector<Sample>& all, std::vector<Sample>& train_set,
                   std::vector<Sample>& held_out) {
  train_set.clear();
  held_out.clear();
  for (std::size_t i = 0; i < all.size(); ++i) {
    (i % 4 == 3 ? held_out : train_set).push_back(all[i]);
  }
}

}  // namespace pfmg
