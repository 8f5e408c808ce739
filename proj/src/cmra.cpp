// Copyright 2026 The pfmg Authors
// SPDX-License-Identifier: Apache-2.0

#include "pfmg/cmra.hpp"

#include <cmath>

#include "pfmg/ops.hpp"

namespace pfmg {

std::string to_string(ScaleMode mode) {
  return mode == ScaleMode::inv_dm ? "linear" : "sqrt";
}

ScaleMode parse_scale_mode(std::string_view text) {
  if (text == "sqrt" || text == "inv_sqrt_dm") return ScaleMode::inv_sqrt_dm;
  if (text == "linear" || text == "inv_dm") return ScaleMode::inv_dm;
  throw ConfigError("unknown scale mode '" + std::string(text) + "'");
}

template <Real S>
Attention<S> cmra_attention(const Tensor<S>& x, const Tensor<S>& y, const CmraParams<S>& params) {
  if (x.rank() != 2 || y.rank() != 2 || x.extent(1) != y.extent(1)) {
    throw DimensionError("cmra_attend: streams " + to_string(x.shape()) + " and " +
                         to_string(y.shape()) + " must be T x d with equal d");
  }
  const Tensor<S> g = concat(x, y, 0);
  const Tensor<S> q = matmul(x, params.w_q);
  const Tensor<S> keys = matmul(g, params.w_k);
  const Tensor<S> values = matmul(g, params.w_x);
  if (q.extent(1) != keys.extent(1)) {
    throw DimensionError("cmra_attend: query width " + std::to_string(q.extent(1)) +
                         " differs from key width " + std::to_string(keys.extent(1)));
  }
  const auto d_m = static_cast<S>(q.extent(1));
  const S scale = params.scale_mode == ScaleMode::inv_dm ? S(1) / d_m : S(1) / std::sqrt(d_m);
  Attention<S> a;
  a.weights = softmax(affine(matmul(q, transpose(keys)), scale), 1);
  a.output = matmul(a.weights, values);
  return a;
}

template <Real S>
Relations<S> relation_aware(const Tensor<S>& audio, const Tensor<S>& visual,
                            const ProjectionParams<S>& proj, const CmraParams<S>& params_v,
                            const CmraParams<S>& params_a) {
  const Tensor<S> a = matmul(audio, proj.p_a);
  const Tensor<S> v = matmul(visual, proj.p_v);
  return {cmra_attend(a, v, params_a), cmra_attend(v, a, params_v)};
}

template <Real S>
Tensor<S> interaction(const Tensor<S>& audio_rel, const Tensor<S>& visual_rel,
                      const ProjectionParams<S>& proj, const CmraParams<S>& params) {
  if (audio_rel.shape() != visual_rel.shape()) {
    throw DimensionError("interaction: A_R " + to_string(audio_rel.shape()) + " vs V_R " +
                         to_string(visual_rel.shape()));
  }
  const Tensor<S> fused = mul(audio_rel, visual_rel);
  const Tensor<S> spliced = concat(audio_rel, visual_rel, 1);
  const Tensor<S> o = cmra_attend(fused, matmul(spliced, proj.p_o), params);
  return add(o, spliced);
}

#define PFMG_INSTANTIATE(S)                                                                  \
  template Attention<S> cmra_attention(const Tensor<S>&, const Tensor<S>&,                  \
                                       const CmraParams<S>&);                               \
  template Relations<S> relation_aware(const Tensor<S>&, const Tensor<S>&,                  \
                                       const ProjectionParams<S>&, const CmraParams<S>&,    \
                                       const CmraParams<S>&);                               \
  template Tensor<S> interaction(const Tensor<S>&, const Tensor<S>&, const ProjectionParams<S>&, \
                                 const CmraParams<S>&);

PFMG_INSTANTIATE(float)
PFMG_INSTANTIATE(double)

#undef PFMG_INSTANTIATE

}  // namespace pfmg
