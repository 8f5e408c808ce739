// Copyright 2026 The pfmg Authors
// SPDX-License-Identifier: Apache-2.0
//
// Motion-guided audio attention and audio-guided visual attention.
//
// Audio, guided by the motion feature M:
//   M_ta = softmax_T(M W_ta)          a_1 = a + M_ta * a
//   M_ca = sigmoid(M)                 a'  = a_1 + M_ca * a_1
//
// Visual, guided by a':
//   v_c  = relu(a' W_c1) * relu(v W_c2)                  per location, d_h
//   v'_c = (mean_n(v_c) W_align) * (v W_c3)               d_v
//   v_cs = relu(a' W_s1) * relu(v'_c W_s2)
//   v'_cs[t] = sum_n tanh(v_cs[t,n] W_s3) v'_c[t,n]      T x d_v
//
// W_align (d_h -> d_v) reconciles the gate width with v W_c3.

#ifndef PFMG_ATTENTION_HPP
#define PFMG_ATTENTION_HPP

#include <string_view>

#include "pfmg/pfme.hpp"
#include "pfmg/tensor.hpp"

namespace pfmg {

template <Real S>
struct MgaaParams {
  Tensor<S> w_ta;  // d_a x 1

  template <typename Fn>
  void for_each(Fn&& fn) { fn(std::string_view("w_ta"), w_ta); }
  template <typename Fn>
  void for_each(Fn&& fn) const { fn(std::string_view("w_ta"), w_ta); }
};

template <Real S>
struct AgvaParams {
  Tensor<S> w_c1;     // d_a x d_h
  Tensor<S> w_c2;     // d_v x d_h
  Tensor<S> w_c3;     // d_v x d_v
  Tensor<S> w_align;  // d_h x d_v
  Tensor<S> w_s1;     // d_a x d_h
  Tensor<S> w_s2;     // d_v x d_h
  Tensor<S> w_s3;     // d_h x 1

  template <typename Fn>
  void for_each(Fn&& fn) { visit(*this, fn); }
  template <typename Fn>
  void for_each(Fn&& fn) const { visit(*this, fn); }

  template <typename Self, typename Fn>
  static void visit(Self& self, Fn& fn) {
    fn(std::string_view("w_c1"), self.w_c1);
    fn(std::string_view("w_c2"), self.w_c2);
    fn(std::string_view("w_c3"), self.w_c3);
    fn(std::string_view("w_align"), self.w_align);
    fn(std::string_view("w_s1"), self.w_s1);
    fn(std::string_view("w_s2"), self.w_s2);
    fn(std::string_view("w_s3"), self.w_s3);
  }
};

template <Real S>
struct MgaaResult {
  Tensor<S> audio;             // a', T x d_a
  Tensor<S> temporal_weights;  // M_ta, T x 1; empty when temporal attention is off
  Tensor<S> channel_gate;      // M_ca, T x d_a
};

template <Real S>
MgaaResult<S> mgaa(const Tensor<S>& audio, const MotionFeature<S>& motion,
                   const MgaaParams<S>& params, bool temporal_attention = true);

template <Real S>
Tensor<S> agva_channel(const Tensor<S>& audio, const Tensor<S>& visual, const AgvaParams<S>& params);

template <Real S>
Tensor<S> agva_spatial(const Tensor<S>& audio, const Tensor<S>& visual_c,
                       const AgvaParams<S>& params);

}  // namespace pfmg

#endif  // PFMG_ATTENTION_HPP
