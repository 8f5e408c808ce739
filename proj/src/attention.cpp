// Copyright 2026 The pfmg Authors
// SPDX-License-Identifier: Apache-2.0

#include "pfmg/attention.hpp"

#include "pfmg/ops.hpp"

namespace pfmg {
namespace {

template <Real S>
void expect_audio_visual(const Tensor<S>& audio, const Tensor<S>& visual, const char* what) {
  if (audio.rank() != 2 || visual.rank() != 4 || audio.extent(0) != visual.extent(0)) {
    throw DimensionError(std::string(what) + ": audio " + to_string(audio.shape()) +
                         " and visual " + to_string(visual.shape()) + " do not line up");
  }
}

// T x d -> T x 1 x 1 x d so it broadcasts over spatial cells.
template <Real S>
Tensor<S> per_frame(const Tensor<S>& x) {
  return reshape(x, {x.extent(0), 1, 1, x.extent(1)});
}

}  // namespace

template <Real S>
MgaaResult<S> mgaa(const Tensor<S>& audio, const MotionFeature<S>& motion,
                   const MgaaParams<S>& params, bool temporal_attention) {
  if (audio.rank() != 2 || audio.shape() != motion.M.shape()) {
    throw DimensionError("mgaa: audio " + to_string(audio.shape()) + " vs motion " +
                         to_string(motion.M.shape()));
  }
  MgaaResult<S> r;
  Tensor<S> a1 = audio;
  if (temporal_attention) {
    r.temporal_weights = softmax(matmul(motion.M, params.w_ta), 0);
    a1 = add(audio, mul(r.temporal_weights, audio));
  }
  r.channel_gate = sigmoid(motion.M);
  r.audio = add(a1, mul(r.channel_gate, a1));
  return r;
}

template <Real S>
Tensor<S> agva_channel(const Tensor<S>& audio, const Tensor<S>& visual,
                       const AgvaParams<S>& params) {
  expect_audio_visual(audio, visual, "agva_channel");
  const Tensor<S> audio_h = per_frame(relu(matmul(audio, params.w_c1)));
  const Tensor<S> visual_h = relu(linear(visual, params.w_c2));
  const Tensor<S> joint = mul(audio_h, visual_h);
  const Tensor<S> gate = per_frame(matmul(reduce(Reduction::avg_spatial, joint), params.w_align));
  return mul(gate, linear(visual, params.w_c3));
}

template <Real S>
Tensor<S> agva_spatial(const Tensor<S>& audio, const Tensor<S>& visual_c,
                       const AgvaParams<S>& params) {
  expect_audio_visual(audio, visual_c, "agva_spatial");
  const Tensor<S> audio_h = per_frame(relu(matmul(audio, params.w_s1)));
  const Tensor<S> visual_h = relu(linear(visual_c, params.w_s2));
  const Tensor<S> joint = mul(audio_h, visual_h);
  const Tensor<S> weights = tanh(linear(joint, params.w_s3));  // T x h x w x 1
  const auto cells = static_cast<S>(visual_c.extent(1) * visual_c.extent(2));
  return affine(reduce(Reduction::avg_spatial, mul(weights, visual_c)), cells);
}

#define PFMG_INSTANTIATE(S)                                                                 \
  template MgaaResult<S> mgaa(const Tensor<S>&, const MotionFeature<S>&, const MgaaParams<S>&, \
                              bool);                                                        \
  template Tensor<S> agva_channel(const Tensor<S>&, const Tensor<S>&, const AgvaParams<S>&); \
  template Tensor<S> agva_spatial(const Tensor<S>&, const Tensor<S>&, const AgvaParams<S>&);

PFMG_INSTANTIATE(float)
PFMG_INSTANTIATE(double)

#undef PFMG_INSTANTIATE

}  // namespace pfmg
