// Copyright 2026 The pfmg Authors
// SPDX-License-Identifier: Apache-2.0

#include "pfmg/head.hpp"

#include <json.hpp>

#include "pfmg/ops.hpp"

namespace pfmg {

template <Real S>
Scores<S> head_scores(const Tensor<S>& fused, const HeadParams<S>& params) {
  if (fused.rank() != 2 || fused.extent(1) != params.w_c.extent(0) ||
      fused.extent(1) != params.w_e.extent(0)) {
    throw DimensionError("classifier expects T x " + std::to_string(params.w_c.extent(0)) +
                         ", got " + to_string(fused.shape()));
  }
  const Tensor<S> pooled = reduce(Reduction::max_time, fused);
  Scores<S> s;
  s.class_probs = softmax(add(matmul(pooled, params.w_c), params.b_c), 1);
  s.relevance = sigmoid(add(matmul(fused, params.w_e), params.b_e));
  return s;
}

template <Real S>
Tensor<S> segment_class_logits(const Tensor<S>& fused, const HeadParams<S>& params) {
  if (fused.rank() != 2 || fused.extent(1) != params.w_c.extent(0)) {
    throw DimensionError("classifier expects T x " + std::to_string(params.w_c.extent(0)) +
                         ", got " + to_string(fused.shape()));
  }
  return add(matmul(fused, params.w_c), params.b_c);
}

Prediction decode(std::vector<float> relevance, std::vector<float> class_probs) {
  Prediction p;
  std::size_t best = 0;
  for (std::size_t c = 1; c < class_probs.size(); ++c) {
    if (class_probs[c] > class_probs[best]) best = c;
  }
  const int background = static_cast<int>(class_probs.size());
  p.decoded.reserve(relevance.size());
  for (float r : relevance) p.decoded.push_back(r > 0.5f ? static_cast<int>(best) : background);
  p.relevance = std::move(relevance);
  p.class_probs = std::move(class_probs);
  return p;
}

Prediction classify(const Tensor<float>& fused, const HeadParams<float>& params) {
  const Scores<float> s = head_scores(fused, params);
  return decode({s.relevance.data().begin(), s.relevance.data().end()},
                {s.class_probs.data().begin(), s.class_probs.data().end()});
}

template <Real S>
SupervisedLoss<S> supervised_loss(const Scores<S>& scores, const LabelRecord& labels) {
  const std::size_t C = scores.class_probs.size();
  const std::size_t T = scores.relevance.size();
  if (labels.video_class < 0 || static_cast<std::size_t>(labels.video_class) >= C) {
    throw LabelError("video class " + std::to_string(labels.video_class) + " outside [0, " +
                     std::to_string(C) + ")");
  }
  if (labels.segment_relevance.size() != T) {
    throw LabelError("relevance labels cover " + std::to_string(labels.segment_relevance.size()) +
                     " segments, scores cover " + std::to_string(T));
  }
  const S floor = static_cast<S>(kLogFloor);

  std::vector<S> onehot(C, S(0));
  onehot[static_cast<std::size_t>(labels.video_class)] = S(1);
  const Tensor<S> target({1, C}, std::move(onehot));
  SupervisedLoss<S> loss;
  loss.class_term = affine(sum(mul(target, log_clamped(scores.class_probs, floor))), S(-1));

  std::vector<S> y(T), not_y(T);
  for (std::size_t t = 0; t < T; ++t) {
    y[t] = static_cast<S>(labels.segment_relevance[t]);
    not_y[t] = S(1) - y[t];
  }
  const Shape col{T, 1};
  const Tensor<S> hit = mul(Tensor<S>(col, std::move(y)), log_clamped(scores.relevance, floor));
  const Tensor<S> miss = mul(Tensor<S>(col, std::move(not_y)),
                             log_clamped(affine(scores.relevance, S(-1), S(1)), floor));
  loss.event_term = affine(sum(add(hit, miss)), S(-1) / static_cast<S>(T));
  loss.total = add(loss.class_term, loss.event_term);
  return loss;
}

template <Real S>
Tensor<S> weak_aggregate_loss(const Tensor<S>& segment_logits, int video_class) {
  if (segment_logits.rank() != 2) {
    throw DimensionError("segment logits must be T x K, got " + to_string(segment_logits.shape()));
  }
  const std::size_t K = segment_logits.extent(1);
  if (video_class < 0 || static_cast<std::size_t>(video_class) >= K) {
    throw LabelError("video class " + std::to_string(video_class) + " outside [0, " +
                     std::to_string(K) + ")");
  }
  const Tensor<S> probs = softmax(reduce(Reduction::sum_time, segment_logits), 1);
  const Tensor<S> picked = slice(probs, 1, static_cast<std::size_t>(video_class),
                                 static_cast<std::size_t>(video_class) + 1);
  return affine(log_clamped(picked, static_cast<S>(kLogFloor)), S(-1));
}

std::string prediction_json(const Prediction& p) {
  nlohmann::json j;
  j["video_id"] = p.video_id;
  j["S_e"] = p.relevance;
  j["S_c"] = p.class_probs;
  j["decoded"] = p.decoded;
  return j.dump();
}

Prediction parse_prediction_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    Prediction p;
    p.video_id = j.at("video_id").get<std::string>();
    p.relevance = j.at("S_e").get<std::vector<float>>();
    p.class_probs = j.at("S_c").get<std::vector<float>>();
    p.decoded = j.at("decoded").get<std::vector<int>>();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("prediction record: ") + e.what());
  }
}

#define PFMG_INSTANTIATE(S)                                                                \
  template Scores<S> head_scores(const Tensor<S>&, const HeadParams<S>&);                 \
  template Tensor<S> segment_class_logits(const Tensor<S>&, const HeadParams<S>&);        \
  template SupervisedLoss<S> supervised_loss(const Scores<S>&, const LabelRecord&);       \
  template Tensor<S> weak_aggregate_loss(const Tensor<S>&, int);

PFMG_INSTANTIATE(float)
PFMG_INSTANTIATE(double)

#undef PFMG_INSTANTIATE

}  // namespace pfmg
