// Copyright 2026 The pfmg Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "pfmg/gradcheck.hpp"
#include "pfmg/ops.hpp"
#include "pfmg/pfme.hpp"
#include "test_util.hpp"

using namespace pfmg;
using pfmg::test::make;

namespace {

Tensor<float> identity_kernel(std::size_t k, std::size_t c) {
  std::vector<float> w(k * k * c * c, 0.f);
  const std::size_t center = (k / 2) * k + k / 2;
  for (std::size_t i = 0; i < c; ++i) w[(center * c + i) * c + i] = 1.f;
  return Tensor<float>({k, k, c, c}, std::move(w));
}

Tensor<float> identity_matrix(std::size_t c) {
  std::vector<float> w(c * c, 0.f);
  for (std::size_t i = 0; i < c; ++i) w[i * c + i] = 1.f;
  return Tensor<float>({c, c}, std::move(w));
}

PfMeParams<float> identity_params(std::size_t c) {
  return {identity_kernel(1, c), identity_kernel(3, c), identity_kernel(3, c), identity_matrix(c)};
}

PfMeParams<float> random_params(Rng& rng, std::size_t dv, std::size_t da) {
  return {test::random(rng, {1, 1, dv, da}, 0.5), test::random(rng, {3, 3, da, da}, 0.3),
          test::random(rng, {3, 3, da, da}, 0.3), test::random(rng, {da, da}, 0.5)};
}

}  // namespace

TEST_CASE("channel alignment") {
  Rng rng(1);
  const auto v = test::random(rng, {3, 2, 2, 4});
  CHECK(test::bit_equal(channel_align(v, identity_params(4)), v));

  auto p = random_params(rng, 4, 3);
  CHECK(test::bit_equal(channel_align(v, p), conv2d(v, p.conv1)));
  p.conv1 = Tensor<float>::zeros({1, 1, 4, 3});
  CHECK(test::bit_equal(channel_align(v, p), Tensor<float>::zeros({3, 2, 2, 3})));
  CHECK_THROWS_AS(channel_align(test::random(rng, {3, 2, 2, 5}), p), DimensionError);
}

TEST_CASE("two-frame hand case") {
  const auto p = identity_params(1);
  const auto aligned = make({2, 1, 1, 1}, {2.f, 5.f});
  const auto mp = past_future_motion(aligned, p);
  CHECK(test::bit_equal(mp.past, make({2, 1, 1, 1}, {0.f, 3.f})));
  CHECK(test::bit_equal(mp.future, make({2, 1, 1, 1}, {3.f, 0.f})));
  const auto m = fuse_and_pool(mp.past, mp.future, p);
  CHECK(test::bit_equal(m.M, make({2, 1}, {3.f, 3.f})));
  // Fusion is symmetric in its two branches.
  CHECK(test::bit_equal(fuse_and_pool(mp.future, mp.past, p).M, m.M));
}

TEST_CASE("neighbor past form on the hand case") {
  const auto p = identity_params(1);
  const auto mp = past_future_motion(make({2, 1, 1, 1}, {2.f, 5.f}), p, PastMotionForm::neighbor);
  // conv_p applied to the previous frame, minus the current one.
  CHECK(test::bit_equal(mp.past, make({2, 1, 1, 1}, {0.f, -3.f})));
}

TEST_CASE("single frame is rejected") {
  CHECK_THROWS_AS(past_future_motion(Tensor<float>::zeros({1, 2, 2, 1}), identity_params(1)),
                  ContractError);
}

TEST_CASE("boundary rows are exactly zero for random draws") {
  for (std::uint64_t draw = 0; draw < 20; ++draw) {
    Rng rng = Rng::stream(draw, "pfme-boundary");
    const auto p = random_params(rng, 5, 3);
    const auto aligned = test::random(rng, {4, 3, 3, 3}, 4.0);
    for (auto form : {PastMotionForm::printed, PastMotionForm::neighbor}) {
      const auto mp = past_future_motion(aligned, p, form);
      const std::size_t row = 3 * 3 * 3;
      for (std::size_t i = 0; i < row; ++i) {
        CHECK(mp.past[i] == 0.f);
        CHECK(mp.future[3 * row + i] == 0.f);
      }
    }
  }
}

TEST_CASE("static scene gives no motion") {
  for (std::uint64_t draw = 0; draw < 20; ++draw) {
    Rng rng = Rng::stream(draw, "pfme-static");
    auto p = identity_params(3);
    p.conv1 = test::random(rng, {1, 1, 4, 3});
    p.conv2 = test::random(rng, {3, 3});
    const auto frame = test::random(rng, {1, 2, 3, 4});
    Tensor<float> v = frame;
    for (int t = 1; t < 6; ++t) v = concat(v, frame, 0);
    const auto m = pfme(v, p);
    for (float x : m.M.data()) CHECK(std::abs(x) < 1e-6);
  }
}

TEST_CASE("zero branches give zero motion") {
  const auto z = Tensor<float>::zeros({3, 2, 2, 2});
  Rng rng(3);
  const auto m = fuse_and_pool(z, z, random_params(rng, 2, 2));
  CHECK(test::bit_equal(m.M, Tensor<float>::zeros({3, 2})));
  CHECK_THROWS_AS(fuse_and_pool(z, Tensor<float>::zeros({2, 2, 2, 2}), random_params(rng, 2, 2)),
                  DimensionError);
}

TEST_CASE("motion is linear in the aligned features") {
  Rng rng(4);
  const auto p = random_params(rng, 3, 3);
  const auto a = test::random(rng, {5, 3, 3, 3});
  const auto once = past_future_motion(a, p);
  const auto twice = past_future_motion(affine(a, 2.f), p);
  const auto m1 = fuse_and_pool(once.past, once.future, p).M;
  const auto m2 = fuse_and_pool(twice.past, twice.future, p).M;
  CHECK(test::max_abs_diff(m2, affine(m1, 2.f)) < 1e-5);
}

TEST_CASE("pfme against a direct loop") {
  Rng rng(5);
  const std::size_t T = 3, H = 2, W = 2, dv = 3, da = 2;
  const auto p = random_params(rng, dv, da);
  const auto v = test::random(rng, {T, H, W, dv});
  const auto m = pfme(v, p).M;

  // v' by hand.
  std::vector<double> al(T * H * W * da, 0.0);
  for (std::size_t i = 0; i < T * H * W; ++i)
    for (std::size_t o = 0; o < da; ++o)
      for (std::size_t c = 0; c < dv; ++c) al[i * da + o] += double(v[i * dv + c]) * p.conv1[c * da + o];
  auto at = [&](std::size_t t, int y, int x, std::size_t c) -> double {
    if (y < 0 || x < 0 || y >= int(H) || x >= int(W)) return 0.0;
    return al[((t * H + std::size_t(y)) * W + std::size_t(x)) * da + c];
  };
  auto conv = [&](const Tensor<float>& k, std::size_t t, std::size_t y, std::size_t x, std::size_t o) {
    double acc = 0.0;
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx)
        for (std::size_t c = 0; c < da; ++c)
          acc += at(t, int(y) + dy, int(x) + dx, c) *
                 k.at({std::size_t(dy + 1), std::size_t(dx + 1), c, o});
    return acc;
  };
  for (std::size_t t = 0; t < T; ++t) {
    std::vector<double> pooled(da, 0.0);
    for (std::size_t y = 0; y < H; ++y)
      for (std::size_t x = 0; x < W; ++x)
        for (std::size_t c = 0; c < da; ++c) {
          double s = 0.0;
          if (t > 0) s += conv(p.conv_p, t, y, x, c) - at(t - 1, int(y), int(x), c);
          if (t + 1 < T) s += conv(p.conv_f, t + 1, y, x, c) - at(t, int(y), int(x), c);
          pooled[c] += s / double(H * W);
        }
    for (std::size_t o = 0; o < da; ++o) {
      double acc = 0.0;
      for (std::size_t c = 0; c < da; ++c) acc += pooled[c] * p.conv2.at({c, o});
      CHECK(std::abs(m.at({t, o}) - acc) < 1e-5);
    }
  }
}

TEST_CASE("future-only mode never touches the past kernel") {
  Rng rng(6);
  auto p = random_params(rng, 3, 2);
  const auto v = test::random(rng, {4, 2, 2, 3});
  const auto ref = pfme(v, p, false).M;
  p.conv_p = Tensor<float>::full({3, 3, 2, 2}, 1e6f);
  CHECK(test::bit_equal(pfme(v, p, false).M, ref));
}

TEST_CASE("pfme finite-difference suites") {
  for (const auto& r : run_gradcheck("pfme")) {
    INFO(r.name << " max rel err " << r.max_relative_error);
    CHECK(r.passed);
  }
}
