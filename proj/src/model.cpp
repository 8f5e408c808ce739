// Copyright 2026 The pfmg Authors
// SPDX-License-Identifier: Apache-2.0

#include "pfmg/model.hpp"

#include <cmath>

#include "pfmg/ops.hpp"
#include "pfmg/rng.hpp"

namespace pfmg {
namespace {

Tensor<float> fan_in_uniform(std::uint64_t seed, std::string_view name, Shape shape,
                             std::size_t fan_in) {
  Rng rng = Rng::stream(seed, name);
  const double bound = std::sqrt(3.0 / static_cast<double>(fan_in));
  std::vector<float> data(numel(shape));
  for (auto& v : data) v = static_cast<float>(rng.uniform(-bound, bound));
  return Tensor<float>(std::move(shape), std::move(data));
}

// 3 x 3 x d x d kernel: identity channel map at the centre tap, N(0, 0.01^2)
// everywhere else.
Tensor<float> identity_plus_noise(std::uint64_t seed, std::string_view name, std::size_t d) {
  Rng rng = Rng::stream(seed, name);
  constexpr std::size_t k = 3;
  std::vector<float> data(k * k * d * d);
  for (std::size_t tap = 0; tap < k * k; ++tap) {
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t o = 0; o < d; ++o) {
        const bool centre_diag = tap == (k * k) / 2 && i == o;
        const double noise = 0.01 * rng.normal();
        data[(tap * d + i) * d + o] = centre_diag ? 1.0f : static_cast<float>(noise);
      }
    }
  }
  return Tensor<float>({k, k, d, d}, std::move(data));
}

template <Real S>
void expect_shape(const Tensor<S>& t, const Shape& shape, const std::string& name) {
  if (t.shape() != shape) {
    throw DimensionError("parameter " + name + " has shape " + to_string(t.shape()) +
                         ", expected " + to_string(shape));
  }
}

}  // namespace

void ModelDims::validate() const {
  if (d_a == 0 || d_v == 0 || d_h == 0 || d_m == 0) throw ConfigError("model widths must be positive");
  if (classes < 2) throw ConfigError("need at least 2 classes");
}

std::string to_string(MotionMode mode) {
  switch (mode) {
    case MotionMode::pfme: return "pfme";
    case MotionMode::future_only: return "future-only";
    case MotionMode::off: return "off";
  }
  return "?";
}

MotionMode parse_motion_mode(std::string_view text) {
  if (text == "pfme") return MotionMode::pfme;
  if (text == "future-only" || text == "future_only") return MotionMode::future_only;
  if (text == "off") return MotionMode::off;
  throw ConfigError("unknown motion mode '" + std::string(text) + "'");
}

ModelParams<float> init_params(const ModelDims& dims, std::uint64_t seed, ScaleMode scale_mode) {
  dims.validate();
  const std::size_t a = dims.d_a, v = dims.d_v, h = dims.d_h, m = dims.d_m, C = dims.classes;
  ModelParams<float> p;
  p.seed = seed;

  p.pfme.conv1 = fan_in_uniform(seed, "pfme.conv1", {1, 1, v, a}, v);
  p.pfme.conv_p = identity_plus_noise(seed, "pfme.conv_p", a);
  p.pfme.conv_f = identity_plus_noise(seed, "pfme.conv_f", a);
  p.pfme.conv2 = fan_in_uniform(seed, "pfme.conv2", {a, a}, a);

  p.mgaa.w_ta = fan_in_uniform(seed, "mgaa.w_ta", {a, 1}, a);

  p.agva.w_c1 = fan_in_uniform(seed, "agva.w_c1", {a, h}, a);
  p.agva.w_c2 = fan_in_uniform(seed, "agva.w_c2", {v, h}, v);
  p.agva.w_c3 = fan_in_uniform(seed, "agva.w_c3", {v, v}, v);
  p.agva.w_align = fan_in_uniform(seed, "agva.w_align", {h, v}, h);
  p.agva.w_s1 = fan_in_uniform(seed, "agva.w_s1", {a, h}, a);
  p.agva.w_s2 = fan_in_uniform(seed, "agva.w_s2", {v, h}, v);
  p.agva.w_s3 = fan_in_uniform(seed, "agva.w_s3", {h, 1}, h);

  p.proj.p_a = fan_in_uniform(seed, "proj.p_a", {a, m}, a);
  p.proj.p_v = fan_in_uniform(seed, "proj.p_v", {v, m}, v);
  p.proj.p_o = fan_in_uniform(seed, "proj.p_o", {2 * m, m}, 2 * m);

  auto cmra = [&](std::string_view name, std::size_t d_out) {
    const std::string n(name);
    CmraParams<float> c;
    c.w_q = fan_in_uniform(seed, n + ".w_q", {m, m}, m);
    c.w_k = fan_in_uniform(seed, n + ".w_k", {m, m}, m);
    c.w_x = fan_in_uniform(seed, n + ".w_x", {m, d_out}, m);
    c.scale_mode = scale_mode;
    return c;
  };
  p.cmra_v = cmra("cmra_v", m);
  p.cmra_a = cmra("cmra_a", m);
  p.cmra_i = cmra("cmra_i", 2 * m);

  p.head.w_c = fan_in_uniform(seed, "head.w_c", {2 * m, C}, 2 * m);
  p.head.b_c = Tensor<float>::zeros({1, C});
  p.head.w_e = fan_in_uniform(seed, "head.w_e", {2 * m, 1}, 2 * m);
  p.head.b_e = Tensor<float>::zeros({1, 1});
  return p;
}

template <Real S>
void check_param_shapes(const ModelParams<S>& p, const ModelDims& dims) {
  const std::size_t a = dims.d_a, v = dims.d_v, h = dims.d_h, m = dims.d_m, C = dims.classes;
  expect_shape(p.pfme.conv1, {1, 1, v, a}, "pfme.conv1");
  expect_shape(p.pfme.conv_p, {3, 3, a, a}, "pfme.conv_p");
  expect_shape(p.pfme.conv_f, {3, 3, a, a}, "pfme.conv_f");
  expect_shape(p.pfme.conv2, {a, a}, "pfme.conv2");
  expect_shape(p.mgaa.w_ta, {a, 1}, "mgaa.w_ta");
  expect_shape(p.agva.w_c1, {a, h}, "agva.w_c1");
  expect_shape(p.agva.w_c2, {v, h}, "agva.w_c2");
  expect_shape(p.agva.w_c3, {v, v}, "agva.w_c3");
  expect_shape(p.agva.w_align, {h, v}, "agva.w_align");
  expect_shape(p.agva.w_s1, {a, h}, "agva.w_s1");
  expect_shape(p.agva.w_s2, {v, h}, "agva.w_s2");
  expect_shape(p.agva.w_s3, {h, 1}, "agva.w_s3");
  expect_shape(p.proj.p_a, {a, m}, "proj.p_a");
  expect_shape(p.proj.p_v, {v, m}, "proj.p_v");
  expect_shape(p.proj.p_o, {2 * m, m}, "proj.p_o");
  for (const auto* c : {&p.cmra_v, &p.cmra_a}) {
    expect_shape(c->w_q, {m, m}, "cmra.w_q");
    expect_shape(c->w_k, {m, m}, "cmra.w_k");
    expect_shape(c->w_x, {m, m}, "cmra.w_x");
  }
  expect_shape(p.cmra_i.w_q, {m, m}, "cmra_i.w_q");
  expect_shape(p.cmra_i.w_k, {m, m}, "cmra_i.w_k");
  expect_shape(p.cmra_i.w_x, {m, 2 * m}, "cmra_i.w_x");
  expect_shape(p.head.w_c, {2 * m, C}, "head.w_c");
  expect_shape(p.head.b_c, {1, C}, "head.b_c");
  expect_shape(p.head.w_e, {2 * m, 1}, "head.w_e");
  expect_shape(p.head.b_e, {1, 1}, "head.b_e");
}

template <Real S>
std::string ForwardTrace<S>::first_non_finite() const {
  if (!all_finite(motion)) return "pfme";
  if (!all_finite(audio.audio)) return "mgaa";
  if (!all_finite(visual_c) || !all_finite(visual_cs)) return "agva";
  if (!all_finite(relations.audio) || !all_finite(relations.visual)) return "cmra";
  if (!all_finite(fused)) return "interaction";
  if (!all_finite(scores.class_probs) || !all_finite(scores.relevance)) return "head";
  return {};
}

template <Real S>
ForwardTrace<S> forward_trace(const Tensor<S>& audio, const Tensor<S>& visual,
                              const ModelParams<S>& params, const ModelOptions& options) {
  if (audio.rank() != 2 || visual.rank() != 4 || audio.extent(0) != visual.extent(0)) {
    throw DimensionError("forward: audio " + to_string(audio.shape()) + " and visual " +
                         to_string(visual.shape()) + " do not line up");
  }
  ForwardTrace<S> tr;
  switch (options.motion) {
    case MotionMode::off:
      tr.motion = Tensor<S>::zeros(audio.shape());
      break;
    case MotionMode::pfme:
    case MotionMode::future_only:
      tr.motion = pfme(visual, params.pfme, options.motion == MotionMode::pfme, options.past_form).M;
      break;
  }
  tr.audio = mgaa(audio, MotionFeature<S>{tr.motion}, params.mgaa, options.temporal_attention);
  tr.visual_c = agva_channel(tr.audio.audio, visual, params.agva);
  tr.visual_cs = agva_spatial(tr.audio.audio, tr.visual_c, params.agva);

  CmraParams<S> cmra_v = params.cmra_v, cmra_a = params.cmra_a, cmra_i = params.cmra_i;
  cmra_v.scale_mode = cmra_a.scale_mode = cmra_i.scale_mode = options.scale_mode;
  tr.relations = relation_aware(tr.audio.audio, tr.visual_cs, params.proj, cmra_v, cmra_a);
  tr.fused = interaction(tr.relations.audio, tr.relations.visual, params.proj, cmra_i);
  tr.scores = head_scores(tr.fused, params.head);
  return tr;
}

Prediction predict(const FeatureBundle& bundle, const ModelParams<float>& params,
                   const ModelOptions& options) {
  const ForwardTrace<float> tr = forward_trace(bundle.audio, bundle.visual, params, options);
  const auto& s = tr.scores;
  Prediction p = decode({s.relevance.data().begin(), s.relevance.data().end()},
                        {s.class_probs.data().begin(), s.class_probs.data().end()});
  p.video_id = bundle.video_id;
  return p;
}

#define PFMG_INSTANTIATE(S)                                                              \
  template void check_param_shapes(const ModelParams<S>&, const ModelDims&);            \
  template struct ForwardTrace<S>;                                                       \
  template ForwardTrace<S> forward_trace(const Tensor<S>&, const Tensor<S>&,             \
                                         const ModelParams<S>&, const ModelOptions&);

PFMG_INSTANTIATE(float)
PFMG_INSTANTIATE(double)

#undef PFMG_INSTANTIATE

}  // namespace pfmg
