// Copyright 2026 The pfmg Authors
// SPDX-License-Identifier: Apache-2.0
//
// Past-and-future motion excitation: turns the visual stream into a motion
// feature with the audio channel width.
//
//   v'  = conv1 * v                       (1x1, d_v -> d_a)
//   Mp_i = conv_p * v'_i - v'_{i-1},  Mp_1 = 0
//   Mf_i = conv_f * v'_{i+1} - v'_i,  Mf_T = 0
//   M   = conv2(avg_spatial(Mp + Mf))

#ifndef PFMG_PFME_HPP
#define PFMG_PFME_HPP

#include <string_view>

#include "pfmg/tensor.hpp"

namespace pfmg {

template <Real S>
struct PfMeParams {
  Tensor<S> conv1;   // 1 x 1 x d_v x d_a
  Tensor<S> conv_p;  // 3 x 3 x d_a x d_a
  Tensor<S> conv_f;  // 3 x 3 x d_a x d_a
  Tensor<S> conv2;   // d_a x d_a channel map

  template <typename Fn>
  void for_each(Fn&& fn) { visit(*this, fn); }
  template <typename Fn>
  void for_each(Fn&& fn) const { visit(*this, fn); }

  template <typename Self, typename Fn>
  static void visit(Self& self, Fn& fn) {
    fn(std::string_view("conv1"), self.conv1);
    fn(std::string_view("conv_p"), self.conv_p);
    fn(std::string_view("conv_f"), self.conv_f);
    fn(std::string_view("conv2"), self.conv2);
  }
};

/// Which frame the past kernel sees. `printed` convolves the current frame
/// and subtracts the previous one; `neighbor` convolves the previous frame
/// and subtracts the current one, as the future branch does.
enum class PastMotionForm { printed, neighbor };

template <Real S>
struct MotionFeature {
  Tensor<S> M;  // T x d_a
};

template <Real S>
struct MotionPair {
  Tensor<S> past;    // T x h x w x d_a
  Tensor<S> future;  // T x h x w x d_a
};

template <Real S>
Tensor<S> channel_align(const Tensor<S>& visual, const PfMeParams<S>& params);

/// Requires T >= 2 (ContractError otherwise). The first past row and the
/// last future row are exactly zero.
template <Real S>
MotionPair<S> past_future_motion(const Tensor<S>& aligned, const PfMeParams<S>& params,
                                 PastMotionForm form = PastMotionForm::printed);

template <Real S>
MotionFeature<S> fuse_and_pool(const Tensor<S>& past, const Tensor<S>& future,
                               const PfMeParams<S>& params);

/// Full module. With `include_past` false the past branch is replaced by
/// zeros and conv_p is never touched.
template <Real S>
MotionFeature<S> pfme(const Tensor<S>& visual, const PfMeParams<S>& params,
                      bool include_past = true, PastMotionForm form = PastMotionForm::printed);

}  // namespace pfmg

#endif  // PFMG_PFME_HPP
