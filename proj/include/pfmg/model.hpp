// Copyright 2026 The pfmg Authors
// SPDX-License-Identifier: Apache-2.0
//
// End-to-end model: parameters, seeded initialization and the forward pass
//   pfme -> mgaa -> agva_channel -> agva_spatial -> relation_aware
//        -> interaction -> head

#ifndef PFMG_MODEL_HPP
#define PFMG_MODEL_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "pfmg/attention.hpp"
#include "pfmg/cmra.hpp"
#include "pfmg/features.hpp"
#include "pfmg/head.hpp"
#include "pfmg/pfme.hpp"

namespace pfmg {

struct ModelDims {
  std::size_t d_a = 32;
  std::size_t d_v = 64;
  std::size_t classes = 4;
  std::size_t d_h = 64;  // hidden width of the visual attention
  std::size_t d_m = 64;  // relation-aware width

  bool operator==(const ModelDims&) const = default;
  void validate() const;
};

enum class MotionMode {
  pfme,         // past and future motion
  future_only,  // past branch zeroed
  off,          // M = 0
};

std::string to_string(MotionMode mode);
MotionMode parse_motion_mode(std::string_view text);

struct ModelOptions {
  MotionMode motion = MotionMode::pfme;
  bool temporal_attention = true;
  ScaleMode scale_mode = ScaleMode::inv_sqrt_dm;
  PastMotionForm past_form = PastMotionForm::printed;

  bool operator==(const ModelOptions&) const = default;
};

template <Real S>
struct ModelParams {
  PfMeParams<S> pfme;
  MgaaParams<S> mgaa;
  AgvaParams<S> agva;
  ProjectionParams<S> proj;
  CmraParams<S> cmra_v;
  CmraParams<S> cmra_a;
  CmraParams<S> cmra_i;
  HeadParams<S> head;
  std::uint64_t seed = 0;

  /// Visits every tensor as ("group.name", tensor) in a fixed order.
  template <typename Fn>
  void for_each(Fn&& fn) { visit(*this, fn); }
  template <typename Fn>
  void for_each(Fn&& fn) const { visit(*this, fn); }

  template <typename Self, typename Fn>
  static void visit(Self& self, Fn& fn) {
    auto group = [&fn](std::string_view prefix, auto& params) {
      params.for_each([&](std::string_view name, auto& t) {
        fn(std::string(prefix) + "." + std::string(name), t);
      });
    };
    group("pfme", self.pfme);
    group("mgaa", self.mgaa);
    group("agva", self.agva);
    group("proj", self.proj);
    group("cmra_v", self.cmra_v);
    group("cmra_a", self.cmra_a);
    group("cmra_i", self.cmra_i);
    group("head", self.head);
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for_each([&n](const std::string&, const Tensor<S>& t) { n += t.size(); });
    return n;
  }

  /// Same weights in another precision, untracked.
  template <Real T>
  ModelParams<T> cast() const;

  /// Applies `scale_mode` to every CMRA block.
  void set_scale_mode(ScaleMode mode) {
    cmra_v.scale_mode = cmra_a.scale_mode = cmra_i.scale_mode = mode;
  }
};

template <Real S>
template <Real T>
ModelParams<T> ModelParams<S>::cast() const {
  std::vector<Tensor<T>> flat;
  for_each([&flat](const std::string&, const Tensor<S>& t) { flat.push_back(t.template cast<T>()); });
  ModelParams<T> out;
  std::size_t i = 0;
  out.for_each([&](const std::string&, Tensor<T>& t) { t = flat[i++]; });
  out.cmra_v.scale_mode = cmra_v.scale_mode;
  out.cmra_a.scale_mode = cmra_a.scale_mode;
  out.cmra_i.scale_mode = cmra_i.scale_mode;
  out.seed = seed;
  return out;
}

/// Fan-in scaled uniform weights, zero biases, identity-plus-noise pf-ME
/// temporal kernels. Every parameter group draws from its own stream of `seed`.
ModelParams<float> init_params(const ModelDims& dims, std::uint64_t seed,
                               ScaleMode scale_mode = ScaleMode::inv_sqrt_dm);

/// Throws DimensionError when a tensor does not have its expected shape.
template <Real S>
void check_param_shapes(const ModelParams<S>& params, const ModelDims& dims);

/// Intermediate results of one forward pass, in pipeline order.
template <Real S>
struct ForwardTrace {
  Tensor<S> motion;         // M
  MgaaResult<S> audio;      // a'
  Tensor<S> visual_c;       // v'_c
  Tensor<S> visual_cs;      // v'_cs
  Relations<S> relations;   // A_R, V_R
  Tensor<S> fused;          // O_f
  Scores<S> scores;         // S_c, S_e

  /// Name of the first stage holding a non-finite value, or empty.
  std::string first_non_finite() const;
};

template <Real S>
ForwardTrace<S> forward_trace(const Tensor<S>& audio, const Tensor<S>& visual,
                              const ModelParams<S>& params, const ModelOptions& options);

Prediction predict(const FeatureBundle& bundle, const ModelParams<float>& params,
                   const ModelOptions& options);

}  // namespace pfmg

#endif  // PFMG_MODEL_HPP
