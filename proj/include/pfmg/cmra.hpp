// Copyright 2026 The pfmg Authors
// SPDX-License-Identifier: Apache-2.0
//
// Cross-modality relation-aware attention. A query stream x attends over the
// time-wise concatenation of x and a second stream y:
//
//   g = [x; y]  (2T x d)    q = x W_Q    K = g W_K    X = g W_X
//   out = softmax(q K^T * scale) X
//
// The relation-aware branches run it both ways on projected a' and v'_cs,
// and the interaction module fuses the two results into the classifier input.

#ifndef PFMG_CMRA_HPP
#define PFMG_CMRA_HPP

#include <string>
#include <string_view>

#include "pfmg/tensor.hpp"

namespace pfmg {

enum class ScaleMode {
  inv_sqrt_dm,  // 1 / sqrt(d_m)
  inv_dm,       // 1 / d_m
};

std::string to_string(ScaleMode mode);
ScaleMode parse_scale_mode(std::string_view text);

template <Real S>
struct CmraParams {
  Tensor<S> w_q;  // d_x x d_m
  Tensor<S> w_k;  // d_g x d_m
  Tensor<S> w_x;  // d_g x d_out
  ScaleMode scale_mode = ScaleMode::inv_sqrt_dm;

  template <typename Fn>
  void for_each(Fn&& fn) { visit(*this, fn); }
  template <typename Fn>
  void for_each(Fn&& fn) const { visit(*this, fn); }

  template <typename Self, typename Fn>
  static void visit(Self& self, Fn& fn) {
    fn(std::string_view("w_q"), self.w_q);
    fn(std::string_view("w_k"), self.w_k);
    fn(std::string_view("w_x"), self.w_x);
  }
};

template <Real S>
struct ProjectionParams {
  Tensor<S> p_a;  // d_a x d_m
  Tensor<S> p_v;  // d_v x d_m
  Tensor<S> p_o;  // 2 d_m x d_m

  template <typename Fn>
  void for_each(Fn&& fn) { visit(*this, fn); }
  template <typename Fn>
  void for_each(Fn&& fn) const { visit(*this, fn); }

  template <typename Self, typename Fn>
  static void visit(Self& self, Fn& fn) {
    fn(std::string_view("p_a"), self.p_a);
    fn(std::string_view("p_v"), self.p_v);
    fn(std::string_view("p_o"), self.p_o);
  }
};

template <Real S>
struct Attention {
  Tensor<S> output;   // T x d_out
  Tensor<S> weights;  // T x 2T, rows sum to 1
};

/// x and y must have the same width.
template <Real S>
Attention<S> cmra_attention(const Tensor<S>& x, const Tensor<S>& y, const CmraParams<S>& params);

template <Real S>
Tensor<S> cmra_attend(const Tensor<S>& x, const Tensor<S>& y, const CmraParams<S>& params) {
  return cmra_attention(x, y, params).output;
}

template <Real S>
struct Relations {
  Tensor<S> audio;   // A_R, T x d_m
  Tensor<S> visual;  // V_R, T x d_m
};

template <Real S>
Relations<S> relation_aware(const Tensor<S>& audio, const Tensor<S>& visual,
                            const ProjectionParams<S>& proj, const CmraParams<S>& params_v,
                            const CmraParams<S>& params_a);

/// O_f = CMRA(A_R * V_R, [A_R, V_R] P_o) + [A_R, V_R], T x 2 d_m.
template <Real S>
Tensor<S> interaction(const Tensor<S>& audio_rel, const Tensor<S>& visual_rel,
                      const ProjectionParams<S>& proj, const CmraParams<S>& params);

}  // namespace pfmg

#endif  // PFMG_CMRA_HPP
