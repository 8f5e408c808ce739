// Copyright 2026 The pfmg Authors
// SPDX-License-Identifier: Apache-2.0

#include "pfmg/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "pfmg/attention.hpp"
#include "pfmg/cmra.hpp"
#include "pfmg/head.hpp"
#include "pfmg/model.hpp"
#include "pfmg/ops.hpp"
#include "pfmg/pfme.hpp"
#include "pfmg/rng.hpp"

namespace pfmg {
namespace {

using T64 = Tensor<double>;
using Inputs = std::span<const T64>;

T64 randn(Rng& rng, Shape shape, double scale = 1.0) {
  std::vector<double> data(numel(shape));
  for (auto& v : data) v = scale * rng.normal();
  return T64(std::move(shape), std::move(data));
}

T64 rand_uniform(Rng& rng, Shape shape, double lo, double hi) {
  std::vector<double> data(numel(shape));
  for (auto& v : data) v = rng.uniform(lo, hi);
  return T64(std::move(shape), std::move(data));
}

// Random linear functional, turning a tensor-valued op into a scalar one.
T64 project(const T64& x, const T64& weights) { return sum(mul(x, weights)); }

struct Case {
  ScalarFn fn;
  std::vector<T64> inputs;
};

struct Suite {
  std::string module;
  std::string name;
  std::function<Case(Rng&)> make;
  // End-to-end suites chain enough saturating stages that many gradients sit
  // near 1e-8, where central differences carry ~1e-10 of roundoff. They are
  // measured against max(|analytic|, |numeric|, deep_floor) instead.
  double deep_floor = 0.0;
};

// Unary op on one input, projected with a fixed random functional.
Suite unary(std::string name, Shape in, std::function<T64(const T64&)> op, double lo = 0.0,
            double hi = 0.0) {
  return {"tensor", std::move(name), [in, op, lo, hi](Rng& rng) {
            T64 x = hi > lo ? rand_uniform(rng, in, lo, hi) : randn(rng, in);
            const T64 out = op(x);
            const T64 r = randn(rng, out.shape());
            return Case{[op, r](Inputs v) { return project(op(v[0]), r); }, {x}};
          }};
}

Suite binary(std::string name, Shape a, Shape b, std::function<T64(const T64&, const T64&)> op) {
  return {"tensor", std::move(name), [a, b, op](Rng& rng) {
            T64 x = randn(rng, a);
            T64 y = randn(rng, b);
            const T64 r = randn(rng, op(x, y).shape());
            return Case{[op, r](Inputs v) { return project(op(v[0], v[1]), r); }, {x, y}};
          }};
}

PfMeParams<double> pfme_from(Inputs v, std::size_t at) {
  return {v[at], v[at + 1], v[at + 2], v[at + 3]};
}

Suite pfme_suite(std::string name, bool include_past, PastMotionForm form) {
  return {"pfme", std::move(name), [include_past, form](Rng& rng) {
            const std::size_t T = 3, h = 2, w = 3, dv = 3, da = 2;
            std::vector<T64> in{randn(rng, {T, h, w, dv}), randn(rng, {1, 1, dv, da}, 0.7),
                                randn(rng, {3, 3, da, da}, 0.5), randn(rng, {3, 3, da, da}, 0.5),
                                randn(rng, {da, da}, 0.7)};
            const T64 r = randn(rng, {T, da});
            return Case{[=](Inputs v) {
                          return project(pfme(v[0], pfme_from(v, 1), include_past, form).M, r);
                        },
                        in};
          }};
}

Suite mgaa_suite(std::string name, bool temporal) {
  return {"mgaa", std::move(name), [temporal](Rng& rng) {
            std::vector<T64> in{randn(rng, {4, 3}), randn(rng, {4, 3}), randn(rng, {3, 1})};
            const T64 r = randn(rng, {4, 3});
            return Case{[=](Inputs v) {
                          return project(
                              mgaa(v[0], MotionFeature<double>{v[1]}, MgaaParams<double>{v[2]},
                                   temporal)
                                  .audio,
                              r);
                        },
                        in};
          }};
}

AgvaParams<double> agva_from(Inputs v, std::size_t at) {
  AgvaParams<double> p;
  std::size_t i = at;
  p.for_each([&](std::string_view, T64& t) { t = v[i++]; });
  return p;
}

Suite agva_suite(std::string name, bool spatial) {
  return {"agva", std::move(name), [spatial](Rng& rng) {
            const std::size_t T = 3, h = 2, w = 2, da = 2, dv = 3, dh = 4;
            std::vector<T64> in{randn(rng, {T, da}), randn(rng, {T, h, w, dv}),
                                randn(rng, {da, dh}, 0.7), randn(rng, {dv, dh}, 0.7),
                                randn(rng, {dv, dv}, 0.7), randn(rng, {dh, dv}, 0.7),
                                randn(rng, {da, dh}, 0.7), randn(rng, {dv, dh}, 0.7),
                                randn(rng, {dh, 1}, 0.7)};
            const T64 r = spatial ? randn(rng, {T, dv}) : randn(rng, {T, h, w, dv});
            return Case{[=](Inputs v) {
                          const auto p = agva_from(v, 2);
                          return spatial ? project(agva_spatial(v[0], v[1], p), r)
                                         : project(agva_channel(v[0], v[1], p), r);
                        },
                        in};
          }};
}

Suite cmra_suite(std::string name, ScaleMode mode) {
  return {"cmra", std::move(name), [mode](Rng& rng) {
            std::vector<T64> in{randn(rng, {3, 2}), randn(rng, {3, 2}), randn(rng, {2, 3}),
                                randn(rng, {2, 3}), randn(rng, {2, 4})};
            const T64 r = randn(rng, {3, 4});
            return Case{[=](Inputs v) {
                          return project(cmra_attend(v[0], v[1], CmraParams<double>{v[2], v[3], v[4], mode}),
                                         r);
                        },
                        in};
          }};
}

Suite relation_suite() {
  return {"cmra", "relation_aware", [](Rng& rng) {
            const std::size_t T = 3, da = 2, dv = 3, dm = 3;
            std::vector<T64> in{randn(rng, {T, da}),     randn(rng, {T, dv}),
                                randn(rng, {da, dm}, .7), randn(rng, {dv, dm}, .7),
                                randn(rng, {dm, dm}, .7), randn(rng, {dm, dm}, .7),
                                randn(rng, {dm, dm}, .7), randn(rng, {dm, dm}, .7),
                                randn(rng, {dm, dm}, .7), randn(rng, {dm, dm}, .7)};
            const T64 ra = randn(rng, {T, dm});
            const T64 rv = randn(rng, {T, dm});
            return Case{[=](Inputs v) {
                          ProjectionParams<double> proj{v[2], v[3], T64::zeros({2 * dm, dm})};
                          const auto rel = relation_aware(
                              v[0], v[1], proj, CmraParams<double>{v[4], v[5], v[6]},
                              CmraParams<double>{v[7], v[8], v[9]});
                          return add(project(rel.audio, ra), project(rel.visual, rv));
                        },
                        in};
          }};
}

Suite interaction_suite() {
  return {"interaction", "interaction", [](Rng& rng) {
            const std::size_t T = 3, dm = 2;
            std::vector<T64> in{randn(rng, {T, dm}),         randn(rng, {T, dm}),
                                randn(rng, {2 * dm, dm}, .7), randn(rng, {dm, dm}, .7),
                                randn(rng, {dm, dm}, .7),     randn(rng, {dm, 2 * dm}, .7)};
            const T64 r = randn(rng, {T, 2 * dm});
            return Case{[=](Inputs v) {
                          ProjectionParams<double> proj{T64::zeros({1, dm}), T64::zeros({1, dm}), v[2]};
                          return project(
                              interaction(v[0], v[1], proj, CmraParams<double>{v[3], v[4], v[5]}), r);
                        },
                        in};
          }};
}

LabelRecord random_labels(Rng& rng, std::size_t T, std::size_t C) {
  LabelRecord labels;
  labels.video_class = static_cast<int>(rng.below(C));
  for (std::size_t t = 0; t < T; ++t) {
    const int rel = static_cast<int>(rng.below(2));
    labels.segment_relevance.push_back(rel);
    labels.segment_class.push_back(rel ? labels.video_class : static_cast<int>(C));
  }
  return labels;
}

Suite loss_suite(std::string name, bool weak) {
  return {"losses", std::move(name), [weak](Rng& rng) {
            const std::size_t T = 4, d = 4, C = 3;
            std::vector<T64> in{randn(rng, {T, d}), randn(rng, {d, C}, .7), randn(rng, {1, C}, .3),
                                randn(rng, {d, 1}, .7), randn(rng, {1, 1}, .3)};
            const LabelRecord labels = random_labels(rng, T, C);
            return Case{[=](Inputs v) {
                          HeadParams<double> head{v[1], v[2], v[3], v[4]};
                          if (weak) {
                            return weak_aggregate_loss(segment_class_logits(v[0], head),
                                                       labels.video_class);
                          }
                          return supervised_loss(head_scores(v[0], head), labels).total;
                        },
                        in};
          }};
}

Suite model_suite(std::string name, ModelOptions options, bool weak) {
  return {"model", std::move(name), [options, weak](Rng& rng) {
            ModelDims dims;
            dims.d_a = 2;
            dims.d_v = 3;
            dims.classes = 3;
            dims.d_h = 3;
            dims.d_m = 2;
            const std::size_t T = 3, h = 2, w = 2;
            ModelParams<double> shape_source =
                init_params(dims, rng.below(1u << 30), options.scale_mode).cast<double>();
            std::vector<T64> in{randn(rng, {T, dims.d_a}), randn(rng, {T, h, w, dims.d_v})};
            shape_source.for_each([&](const std::string&, const T64& t) {
              in.push_back(randn(rng, t.shape(), 0.6));
            });
            const LabelRecord labels = random_labels(rng, T, dims.classes);
            return Case{[=](Inputs v) {
                          ModelParams<double> p = shape_source;
                          std::size_t i = 2;
                          p.for_each([&](const std::string&, T64& t) { t = v[i++]; });
                          const auto tr = forward_trace(v[0], v[1], p, options);
                          if (weak) {
                            return weak_aggregate_loss(segment_class_logits(tr.fused, p.head),
                                                       labels.video_class);
                          }
                          return supervised_loss(tr.scores, labels).total;
                        },
                        in};
          },
          1e-5};
}

std::vector<Suite> all_suites() {
  std::vector<Suite> s;
  s.push_back(binary("matmul", {3, 4}, {4, 2}, [](const T64& a, const T64& b) { return matmul(a, b); }));
  s.push_back(binary("conv2d_3x3", {2, 3, 3, 2}, {3, 3, 2, 3},
                     [](const T64& a, const T64& b) { return conv2d(a, b); }));
  s.push_back(binary("conv2d_1x1", {2, 2, 2, 3}, {1, 1, 3, 2},
                     [](const T64& a, const T64& b) { return conv2d(a, b); }));
  s.push_back(unary("relu", {3, 4}, [](const T64& x) { return relu(x); }));
  s.push_back(unary("sigmoid", {3, 4}, [](const T64& x) { return sigmoid(x); }));
  s.push_back(unary("tanh", {3, 4}, [](const T64& x) { return pfmg::tanh(x); }));
  s.push_back(unary("softmax_axis0", {4, 3}, [](const T64& x) { return softmax(x, 0); }));
  s.push_back(unary("softmax_axis1", {4, 3}, [](const T64& x) { return softmax(x, 1); }));
  s.push_back(unary("softmax_rank4", {2, 2, 3, 2}, [](const T64& x) { return softmax(x, 2); }));
  s.push_back(unary("avg_spatial", {2, 2, 3, 3},
                    [](const T64& x) { return reduce(Reduction::avg_spatial, x); }));
  s.push_back(unary("max_time", {4, 3}, [](const T64& x) { return reduce(Reduction::max_time, x); }));
  s.push_back(unary("sum_time", {4, 3}, [](const T64& x) { return reduce(Reduction::sum_time, x); }));
  s.push_back(binary("add_broadcast", {3, 4}, {1, 4}, [](const T64& a, const T64& b) { return add(a, b); }));
  s.push_back(binary("add_broadcast_column", {3, 1}, {3, 4},
                     [](const T64& a, const T64& b) { return add(a, b); }));
  s.push_back(binary("mul_broadcast", {3, 1}, {3, 4}, [](const T64& a, const T64& b) { return mul(a, b); }));
  s.push_back(binary("mul_broadcast_rank4", {2, 1, 1, 3}, {2, 2, 2, 3},
                     [](const T64& a, const T64& b) { return mul(a, b); }));
  s.push_back(binary("concat_axis0", {2, 3}, {3, 3},
                     [](const T64& a, const T64& b) { return concat(a, b, 0); }));
  s.push_back(binary("concat_axis1", {2, 3}, {2, 2},
                     [](const T64& a, const T64& b) { return concat(a, b, 1); }));
  s.push_back(unary("sum", {3, 2}, [](const T64& x) { return sum(x); }));
  s.push_back(unary("affine", {3, 2}, [](const T64& x) { return affine(x, 1.7, 0.3); }));
  s.push_back(unary("log_clamped", {3, 2}, [](const T64& x) { return log_clamped(x, 1e-12); },
                    0.5, 2.0));
  s.push_back(unary("transpose", {2, 3}, [](const T64& x) { return transpose(x); }));
  s.push_back(unary("reshape", {2, 3}, [](const T64& x) { return reshape(x, {3, 2}); }));
  s.push_back(unary("slice", {4, 3}, [](const T64& x) { return slice(x, 0, 1, 3); }));
  s.push_back(binary("linear_rank4", {2, 2, 2, 3}, {3, 2},
                     [](const T64& a, const T64& b) { return linear(a, b); }));

  s.push_back(pfme_suite("pfme", true, PastMotionForm::printed));
  s.push_back(pfme_suite("pfme_neighbor_form", true, PastMotionForm::neighbor));
  s.push_back(pfme_suite("pfme_future_only", false, PastMotionForm::printed));
  s.push_back(mgaa_suite("mgaa", true));
  s.push_back(mgaa_suite("mgaa_without_temporal_attention", false));
  s.push_back(agva_suite("agva_channel", false));
  s.push_back(agva_suite("agva_spatial", true));
  s.push_back(cmra_suite("cmra_attend_sqrt", ScaleMode::inv_sqrt_dm));
  s.push_back(cmra_suite("cmra_attend_linear", ScaleMode::inv_dm));
  s.push_back(relation_suite());
  s.push_back(interaction_suite());
  s.push_back(loss_suite("supervised_loss", false));
  s.push_back(loss_suite("weak_aggregate_loss", true));
  s.push_back(model_suite("model_supervised", ModelOptions{}, false));
  s.push_back(model_suite("model_weak", ModelOptions{}, true));
  ModelOptions ablated;
  ablated.motion = MotionMode::future_only;
  ablated.temporal_attention = false;
  ablated.scale_mode = ScaleMode::inv_dm;
  s.push_back(model_suite("model_future_only_linear_scale", ablated, false));
  return s;
}

}  // namespace

void check_point(const ScalarFn& fn, const std::vector<T64>& inputs, const GradCheckOptions& options,
                 GradCheckResult& result, double deep_floor) {
  Tape<double> tape;
  std::vector<T64> leaves;
  leaves.reserve(inputs.size());
  for (const auto& in : inputs) leaves.push_back(tape.variable(in));
  const T64 loss = fn(leaves);
  const std::vector<T64> grads = tape.backward(loss, leaves);

  std::vector<T64> probe = inputs;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    std::vector<double> values(inputs[i].data().begin(), inputs[i].data().end());
    for (std::size_t j = 0; j < values.size(); ++j) {
      const double saved = values[j];
      values[j] = saved + options.epsilon;
      probe[i] = T64(inputs[i].shape(), values);
      const double up = fn(probe).item();
      values[j] = saved - options.epsilon;
      probe[i] = T64(inputs[i].shape(), values);
      const double down = fn(probe).item();
      values[j] = saved;

      const double numeric = (up - down) / (2.0 * options.epsilon);
      const double analytic = grads[i][j];
      const double diff = std::abs(analytic - numeric);
      const double scale = std::max(std::abs(analytic), std::abs(numeric));
      if (deep_floor > 0.0) {
        const double rel = diff / std::max(scale, deep_floor);
        result.max_relative_error = std::max(result.max_relative_error, rel);
        if (!(rel < options.tolerance)) result.passed = false;
      } else if (scale > options.floor) {
        const double rel = diff / scale;
        result.max_relative_error = std::max(result.max_relative_error, rel);
        if (!(rel < options.tolerance)) result.passed = false;
      } else {
        result.max_absolute_error_small = std::max(result.max_absolute_error_small, diff);
        if (!(diff < options.floor)) result.passed = false;
      }
      ++result.coordinates;
    }
    probe[i] = inputs[i];
  }
  ++result.points;
}

const std::vector<std::string>& gradcheck_modules() {
  static const std::vector<std::string> modules{"tensor", "pfme", "mgaa", "agva",
                                                "cmra", "interaction", "losses", "model"};
  return modules;
}

std::vector<GradCheckResult> run_gradcheck(std::string_view module, const GradCheckOptions& options) {
  if (!module.empty() &&
      std::find(gradcheck_modules().begin(), gradcheck_modules().end(), module) ==
          gradcheck_modules().end()) {
    throw ConfigError("unknown gradcheck module '" + std::string(module) + "'");
  }
  std::vector<GradCheckResult> results;
  for (const auto& suite : all_suites()) {
    if (!module.empty() && suite.module != module) continue;
    GradCheckResult r;
    r.name = suite.module + "/" + suite.name;
    for (std::size_t p = 0; p < options.points; ++p) {
      Rng rng = Rng::stream(options.seed, suite.name, p);
      const Case c = suite.make(rng);
      check_point(c.fn, c.inputs, options, r, suite.deep_floor);
    }
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace pfmg
