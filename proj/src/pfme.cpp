// Copyright 2026 The pfmg Authors
// SPDX-License-Identifier: Apache-2.0

#include "pfmg/pfme.hpp"

#include "pfmg/ops.hpp"

namespace pfmg {

template <Real S>
Tensor<S> channel_align(const Tensor<S>& visual, const PfMeParams<S>& params) {
  if (visual.rank() != 4) {
    throw DimensionError("visual features must be T x h x w x d_v, got " + to_string(visual.shape()));
  }
  return conv2d(visual, params.conv1);
}

template <Real S>
MotionPair<S> past_future_motion(const Tensor<S>& aligned, const PfMeParams<S>& params,
                                 PastMotionForm form) {
  if (aligned.rank() != 4) {
    throw DimensionError("aligned features must be T x h x w x d_a, got " +
                         to_string(aligned.shape()));
  }
  const std::size_t T = aligned.extent(0);
  if (T < 2) throw ContractError("motion needs at least 2 segments, got " + std::to_string(T));

  Shape row = aligned.shape();
  row[0] = 1;
  const auto zero_row = Tensor<S>::zeros(row);
  const Tensor<S> earlier = slice(aligned, 0, 0, T - 1);  // v'_1 .. v'_{T-1}
  const Tensor<S> later = slice(aligned, 0, 1, T);        // v'_2 .. v'_T

  const Tensor<S> past_body = form == PastMotionForm::printed
                                  ? sub(conv2d(later, params.conv_p), earlier)
                                  : sub(conv2d(earlier, params.conv_p), later);
  const Tensor<S> future_body = sub(conv2d(later, params.conv_f), earlier);
  return {concat(zero_row, past_body, 0), concat(future_body, zero_row, 0)};
}

template <Real S>
MotionFeature<S> fuse_and_pool(const Tensor<S>& past, const Tensor<S>& future,
                               const PfMeParams<S>& params) {
  if (past.shape() != future.shape()) {
    throw DimensionError("past motion " + to_string(past.shape()) + " and future motion " +
                         to_string(future.shape()) + " differ");
  }
  const Tensor<S> fused = add(future, past);
  const Tensor<S> pooled = reduce(Reduction::avg_spatial, fused);
  return {matmul(pooled, params.conv2)};
}

template <Real S>
MotionFeature<S> pfme(const Tensor<S>& visual, const PfMeParams<S>& params, bool include_past,
                      PastMotionForm form) {
  const Tensor<S> aligned = channel_align(visual, params);
  if (include_past) {
    MotionPair<S> m = past_future_motion(aligned, params, form);
    return fuse_and_pool(m.past, m.future, params);
  }
  const std::size_t T = aligned.extent(0);
  if (T < 2) throw ContractError("motion needs at least 2 segments, got " + std::to_string(T));
  Shape row = aligned.shape();
  row[0] = 1;
  const Tensor<S> future =
      concat(sub(conv2d(slice(aligned, 0, 1, T), params.conv_f), slice(aligned, 0, 0, T - 1)),
             Tensor<S>::zeros(row), 0);
  return fuse_and_pool(Tensor<S>::zeros(aligned.shape()), future, params);
}

#define PFMG_INSTANTIATE(S)                                                                   \
  template Tensor<S> channel_align(const Tensor<S>&, const PfMeParams<S>&);                  \
  template MotionPair<S> past_future_motion(const Tensor<S>&, const PfMeParams<S>&,          \
                                            PastMotionForm);                                 \
  template MotionFeature<S> fuse_and_pool(const Tensor<S>&, const Tensor<S>&,                \
                                          const PfMeParams<S>&);                             \
  template MotionFeature<S> pfme(const Tensor<S>&, const PfMeParams<S>&, bool, PastMotionForm);

PFMG_INSTANTIATE(float)
PFMG_INSTANTIATE(double)

#undef PFMG_INSTANTIATE

}  // namespace pfmg
