// Copyright 2026 The pfmg Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "pfmg/attention.hpp"
#include "pfmg/gradcheck.hpp"
#include "pfmg/ops.hpp"
#include "test_util.hpp"

using namespace pfmg;
using pfmg::test::make;

namespace {

AgvaParams<float> random_agva(Rng& rng, std::size_t da, std::size_t dv, std::size_t dh) {
  return {test::random(rng, {da, dh}, 0.5), test::random(rng, {dv, dh}, 0.5),
          test::random(rng, {dv, dv}, 0.5), test::random(rng, {dh, dv}, 0.5),
          test::random(rng, {da, dh}, 0.5), test::random(rng, {dv, dh}, 0.5),
          test::random(rng, {dh, 1}, 0.5)};
}

double relu(double x) { return x > 0.0 ? x : 0.0; }

}  // namespace

TEST_CASE("zero motion scales audio by 1.65 at T = 10") {
  Rng rng(1);
  const auto a = test::random(rng, {10, 4});
  const MgaaParams<float> p{test::random(rng, {4, 1})};
  const auto r = mgaa(a, MotionFeature<float>{Tensor<float>::zeros({10, 4})}, p);
  for (float w : r.temporal_weights.data()) CHECK(std::abs(w - 0.1f) < 1e-7);
  CHECK(test::max_abs_diff(r.audio, affine(a, 1.65f)) < 1e-6);
}

TEST_CASE("zero audio stays zero") {
  for (std::uint64_t draw = 0; draw < 20; ++draw) {
    Rng rng = Rng::stream(draw, "mgaa-null");
    const MgaaParams<float> p{test::random(rng, {3, 1})};
    const auto r = mgaa(Tensor<float>::zeros({5, 3}),
                        MotionFeature<float>{test::random(rng, {5, 3}, 3.0)}, p);
    CHECK(test::bit_equal(r.audio, Tensor<float>::zeros({5, 3})));
  }
}

TEST_CASE("two-segment hand case") {
  const auto a = make({2, 1}, {1.f, 1.f});
  const MotionFeature<float> m{make({2, 1}, {0.f, static_cast<float>(std::log(3.0))})};
  const MgaaParams<float> p{make({1, 1}, {1.f})};
  const auto r = mgaa(a, m, p);
  CHECK(r.temporal_weights[0] == doctest::Approx(0.25).epsilon(1e-6));
  CHECK(r.temporal_weights[1] == doctest::Approx(0.75).epsilon(1e-6));
  CHECK(r.channel_gate[1] == doctest::Approx(0.75).epsilon(1e-6));
  CHECK(r.audio[0] == doctest::Approx(1.875).epsilon(1e-6));
  CHECK(r.audio[1] == doctest::Approx(3.0625).epsilon(1e-6));
}

TEST_CASE("temporal attention off keeps only the channel gate") {
  Rng rng(2);
  const auto a = test::random(rng, {4, 3});
  const auto m = test::random(rng, {4, 3});
  const auto r = mgaa(a, MotionFeature<float>{m}, MgaaParams<float>{test::random(rng, {3, 1})}, false);
  CHECK(r.temporal_weights.empty());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double gate = 1.0 / (1.0 + std::exp(-double(m[i])));
    CHECK(std::abs(r.audio[i] - a[i] * (1.0 + gate)) < 1e-6);
  }
}

TEST_CASE("temporal weights are a distribution and ignore constant shifts") {
  for (std::uint64_t draw = 0; draw < 20; ++draw) {
    Rng rng = Rng::stream(draw, "mgaa-weights");
    const auto a = test::random(rng, {6, 3});
    const auto w = test::random(rng, {3, 1});
    const auto m = test::random(rng, {6, 3}, 2.0);
    const auto r = mgaa(a, MotionFeature<float>{m}, MgaaParams<float>{w});
    double total = 0.0;
    for (float x : r.temporal_weights.data()) {
      CHECK(x >= 0.f);
      total += x;
    }
    CHECK(std::abs(total - 1.0) < 1e-6);

    // Moving every row of M along w / |w|^2 adds the same constant to M w.
    double norm2 = 0.0;
    for (float x : w.data()) norm2 += double(x) * x;
    std::vector<float> shifted(m.data().begin(), m.data().end());
    for (std::size_t t = 0; t < 6; ++t)
      for (std::size_t j = 0; j < 3; ++j) shifted[t * 3 + j] += float(1.7 * w[j] / norm2);
    const auto r2 = mgaa(a, MotionFeature<float>{make({6, 3}, shifted)}, MgaaParams<float>{w});
    CHECK(test::max_abs_diff(r.temporal_weights, r2.temporal_weights) < 1e-6);
  }
}

TEST_CASE("mgaa rejects mismatched shapes") {
  CHECK_THROWS_AS(mgaa(Tensor<float>::zeros({4, 3}), MotionFeature<float>{Tensor<float>::zeros({5, 3})},
                       MgaaParams<float>{Tensor<float>::zeros({3, 1})}),
                  DimensionError);
}

TEST_CASE("visual attention null chains") {
  for (std::uint64_t draw = 0; draw < 20; ++draw) {
    Rng rng = Rng::stream(draw, "agva-null");
    const auto p = random_agva(rng, 3, 4, 5);
    const auto a = test::random(rng, {3, 3});
    const auto v = test::random(rng, {3, 2, 2, 4});
    const auto za = Tensor<float>::zeros({3, 3});
    CHECK(test::bit_equal(agva_channel(za, v, p), Tensor<float>::zeros({3, 2, 2, 4})));
    CHECK(test::bit_equal(agva_channel(a, Tensor<float>::zeros({3, 2, 2, 4}), p),
                          Tensor<float>::zeros({3, 2, 2, 4})));
    CHECK(test::bit_equal(agva_spatial(za, v, p), Tensor<float>::zeros({3, 4})));
    CHECK(test::bit_equal(agva_spatial(a, Tensor<float>::zeros({3, 2, 2, 4}), p),
                          Tensor<float>::zeros({3, 4})));
  }
}

TEST_CASE("spatial attention output is T x d_v") {
  Rng rng(3);
  const auto p = random_agva(rng, 3, 6, 4);
  const auto vc = agva_channel(test::random(rng, {5, 3}), test::random(rng, {5, 3, 2, 6}), p);
  CHECK(vc.shape() == Shape{5, 3, 2, 6});
  CHECK(agva_spatial(test::random(rng, {5, 3}), vc, p).shape() == Shape{5, 6});
  CHECK_THROWS_AS(agva_channel(test::random(rng, {4, 3}), test::random(rng, {5, 3, 2, 6}), p),
                  DimensionError);
}

TEST_CASE("single location spatial attention") {
  Rng rng(4);
  const std::size_t T = 3, da = 2, dv = 3, dh = 4;
  const auto p = random_agva(rng, da, dv, dh);
  const auto a = test::random(rng, {T, da});
  const auto vc = test::random(rng, {T, 1, 1, dv});
  const auto out = agva_spatial(a, vc, p);
  for (std::size_t t = 0; t < T; ++t) {
    double score = 0.0;
    for (std::size_t k = 0; k < dh; ++k) {
      double ah = 0.0, vh = 0.0;
      for (std::size_t i = 0; i < da; ++i) ah += double(a.at({t, i})) * p.w_s1.at({i, k});
      for (std::size_t i = 0; i < dv; ++i) vh += double(vc.at({t, 0, 0, i})) * p.w_s2.at({i, k});
      score += relu(ah) * relu(vh) * p.w_s3.at({k, 0});
    }
    for (std::size_t i = 0; i < dv; ++i) {
      CHECK(std::abs(out.at({t, i}) - std::tanh(score) * vc.at({t, 0, 0, i})) < 1e-6);
    }
  }
}

TEST_CASE("channel attention against a straight-line evaluation") {
  Rng rng(5);
  const std::size_t T = 2, H = 2, W = 2, N = 4, da = 3, dv = 3, dh = 2;
  const auto p = random_agva(rng, da, dv, dh);
  const auto a = test::random(rng, {T, da});
  const auto v = test::random(rng, {T, H, W, dv});
  const auto out = agva_channel(a, v, p);
  for (std::size_t t = 0; t < T; ++t) {
    std::vector<double> ah(dh, 0.0), avg(dh, 0.0);
    for (std::size_t k = 0; k < dh; ++k) {
      for (std::size_t i = 0; i < da; ++i) ah[k] += double(a.at({t, i})) * p.w_c1.at({i, k});
      ah[k] = relu(ah[k]);
    }
    for (std::size_t n = 0; n < N; ++n) {
      for (std::size_t k = 0; k < dh; ++k) {
        double vh = 0.0;
        for (std::size_t i = 0; i < dv; ++i) vh += double(v.at({t, n / W, n % W, i})) * p.w_c2.at({i, k});
        avg[k] += ah[k] * relu(vh) / double(N);
      }
    }
    for (std::size_t n = 0; n < N; ++n) {
      for (std::size_t j = 0; j < dv; ++j) {
        double gate = 0.0, proj = 0.0;
        for (std::size_t k = 0; k < dh; ++k) gate += avg[k] * p.w_align.at({k, j});
        for (std::size_t i = 0; i < dv; ++i) proj += double(v.at({t, n / W, n % W, i})) * p.w_c3.at({i, j});
        CHECK(std::abs(out.at({t, n / W, n % W, j}) - gate * proj) < 1e-6);
      }
    }
  }
}

TEST_CASE("attention finite-difference suites") {
  for (const char* module : {"mgaa", "agva"}) {
    for (const auto& r : run_gradcheck(module)) {
      INFO(r.name << " max rel err " << r.max_relative_error);
      CHECK(r.passed);
    }
  }
}
