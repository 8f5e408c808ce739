// Copyright 2026 The pfmg Authors
// SPDX-License-Identifier: Apache-2.0
//
// Classifier heads, event decoding and losses.

#ifndef PFMG_HEAD_HPP
#define PFMG_HEAD_HPP

#include <string>
#include <string_view>
#include <vector>

#include "pfmg/features.hpp"
#include "pfmg/tensor.hpp"

namespace pfmg {

template <Real S>
struct HeadParams {
  Tensor<S> w_c;  // 2 d_m x C
  Tensor<S> b_c;  // 1 x C
  Tensor<S> w_e;  // 2 d_m x 1
  Tensor<S> b_e;  // 1 x 1

  template <typename Fn>
  void for_each(Fn&& fn) { visit(*this, fn); }
  template <typename Fn>
  void for_each(Fn&& fn) const { visit(*this, fn); }

  template <typename Self, typename Fn>
  static void visit(Self& self, Fn& fn) {
    fn(std::string_view("w_c"), self.w_c);
    fn(std::string_view("b_c"), self.b_c);
    fn(std::string_view("w_e"), self.w_e);
    fn(std::string_view("b_e"), self.b_e);
  }
};

template <Real S>
struct Scores {
  Tensor<S> class_probs;  // S_c, 1 x C
  Tensor<S> relevance;    // S_e, T x 1
};

/// S_c = softmax(maxpool_T(O_f) W_c + b_c);  S_e[t] = sigmoid(O_f[t] W_e + b_e).
template <Real S>
Scores<S> head_scores(const Tensor<S>& fused, const HeadParams<S>& params);

/// Per-segment class logits O_f[t] W_c + b_c, T x C, used by weak training.
template <Real S>
Tensor<S> segment_class_logits(const Tensor<S>& fused, const HeadParams<S>& params);

struct Prediction {
  std::string video_id;
  std::vector<float> relevance;    // S_e, one per segment
  std::vector<float> class_probs;  // S_c
  std::vector<int> decoded;        // class per segment, C for background
};

/// The video class goes to every segment whose relevance exceeds 0.5; the
/// rest are background. Ties in S_c resolve to the lowest class index.
Prediction decode(std::vector<float> relevance, std::vector<float> class_probs);

/// head_scores followed by decode.
Prediction classify(const Tensor<float>& fused, const HeadParams<float>& params);

template <Real S>
struct SupervisedLoss {
  Tensor<S> total;  // class_term + event_term
  Tensor<S> class_term;
  Tensor<S> event_term;
};

inline constexpr double kLogFloor = 1e-12;

/// Cross-entropy on S_c plus time-averaged binary cross-entropy on S_e.
template <Real S>
SupervisedLoss<S> supervised_loss(const Scores<S>& scores, const LabelRecord& labels);

/// Softmax of the time-summed per-segment logits against the video class.
template <Real S>
Tensor<S> weak_aggregate_loss(const Tensor<S>& segment_logits, int video_class);

/// JSON record {video_id, S_e, S_c, decoded}.
std::string prediction_json(const Prediction& p);
Prediction parse_prediction_json(std::string_view text);

}  // namespace pfmg

#endif  // PFMG_HEAD_HPP
