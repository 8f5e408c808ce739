// Copyright 2026 The pfmg Authors
// SPDX-License-Identifier: Apache-2.0
//
// Planted-event generator. Inside the event span the audio is the class
// prototype and the visual field carries the class pattern at a location
// that moves by one cell per segment. Distractor videos put the class
// prototype into background audio too, over a visual field that never moves.

#include <cmath>
#include <cstdio>

#include "pfmg/features.hpp"
#include "pfmg/rng.hpp"

namespace pfmg {
namespace {

std::vector<float> unit_vector(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  double norm = 0.0;
  for (auto& x : v) {
    x = rng.normal();
    norm += x * x;
  }
  norm = std::sqrt(norm);
  std::vector<float> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<float>(v[i] / norm);
  return out;
}

// Per-component standard deviation giving a noise vector of RMS norm 1/snr.
double noise_sigma(double snr, std::size_t width) {
  if (std::isinf(snr)) return 0.0;
  return 1.0 / (snr * std::sqrt(static_cast<double>(width)));
}

}  // namespace

SynthPrototypes synth_prototypes(std::uint64_t seed, const FeatureDims& dims) {
  Rng rng = Rng::stream(seed, "prototypes");
  SynthPrototypes p;
  for (std::size_t c = 0; c < dims.classes; ++c) p.audio.push_back(unit_vector(rng, dims.d_a));
  for (std::size_t c = 0; c < dims.classes; ++c) p.visual.push_back(unit_vector(rng, dims.d_v));
  return p;
}

std::vector<SynthVideo> synth_videos(const SynthOptions& options) {
  const FeatureDims& d = options.dims;
  d.validate();
  if (!(options.snr > 0.0)) throw ConfigError("snr must be positive");
  if (options.videos == 0) throw ConfigError("need at least one video");

  const SynthPrototypes protos = synth_prototypes(options.seed, d);
  const double sigma_a = noise_sigma(options.snr, d.d_a);
  const double sigma_v = noise_sigma(options.snr, d.d_v);
  const std::size_t cells = d.h * d.w;

  std::vector<SynthVideo> out;
  out.reserve(options.videos);
  for (std::size_t i = 0; i < options.videos; ++i) {
    Rng rng = Rng::stream(options.seed, "video", i);
    const auto cls = static_cast<int>(rng.below(d.classes));
    const std::size_t length = 1 + rng.below(d.T);
    const std::size_t begin = rng.below(d.T - length + 1);
    const std::size_t end = begin + length;
    const bool distractor = rng.bernoulli(options.distractor_probability);
    const std::size_t start_cell = rng.below(cells);

    std::vector<float> static_field;
    if (distractor) {
      for (std::size_t c = 0; c < cells; ++c) {
        auto u = unit_vector(rng, d.d_v);
        static_field.insert(static_field.end(), u.begin(), u.end());
      }
    }

    std::vector<float> audio(d.T * d.d_a);
    std::vector<float> visual(d.T * cells * d.d_v);
    const auto& pa = protos.audio[static_cast<std::size_t>(cls)];
    const auto& pv = protos.visual[static_cast<std::size_t>(cls)];
    for (std::size_t t = 0; t < d.T; ++t) {
      const bool inside = t >= begin && t < end;
      const bool leak = !inside && distractor;
      float* a = audio.data() + t * d.d_a;
      for (std::size_t j = 0; j < d.d_a; ++j) {
        const double signal = (inside || leak) ? pa[j] : 0.0;
        a[j] = static_cast<float>(signal + sigma_a * rng.normal());
      }
      const std::size_t hot = (start_cell + (t - std::min(t, begin))) % cells;
      for (std::size_t c = 0; c < cells; ++c) {
        float* v = visual.data() + (t * cells + c) * d.d_v;
        for (std::size_t j = 0; j < d.d_v; ++j) {
          double signal = 0.0;
          if (inside && c == hot) signal = pv[j];
          if (leak) signal = static_field[c * d.d_v + j];
          v[j] = static_cast<float>(signal + sigma_v * rng.normal());
        }
      }
    }

    char id[32];
    std::snprintf(id, sizeof id, "vid%05zu", i);
    SynthVideo video;
    video.sample.features.audio = Tensor<float>({d.T, d.d_a}, std::move(audio));
    video.sample.features.visual = Tensor<float>({d.T, d.h, d.w, d.d_v}, std::move(visual));
    video.sample.features.video_id = id;
    video.sample.labels = LabelRecord::from_span(cls, d.T, begin, end, d.classes);
    video.span_begin = begin;
    video.span_end = end;
    video.distractor = distractor;
    video.sample.labels.validate(d.classes, d.T);
    out.push_back(std::move(video));
  }
  return out;
}

DatasetManifest synth_dataset(const SynthOptions& options, const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

  DatasetManifest manifest;
  manifest.dims = options.dims;
  manifest.root = out_dir;
  for (const auto& video : synth_videos(options)) {
    const auto& f = video.sample.features;
    const std::string file = f.video_id + ".avf";
    save_bundle(f, out_dir / file);
    manifest.entries.push_back({f.video_id, file, video.sample.labels});
  }
  manifest.validate();
  manifest.save(out_dir / "manifest.json");
  return manifest;
}

}  // namespace pfmg
