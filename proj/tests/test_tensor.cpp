// Copyright 2026 The pfmg Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <numeric>

#include "pfmg/gradcheck.hpp"
#include "pfmg/ops.hpp"
#include "test_util.hpp"

using namespace pfmg;
using pfmg::test::make;
using pfmg::test::random;

TEST_CASE("shape validation") {
  CHECK_THROWS_AS(validate_shape({}), DimensionError);
  CHECK_THROWS_AS(validate_shape({2, 0}), DimensionError);
  CHECK_THROWS_AS(validate_shape({1, 1, 1, 1, 1}), DimensionError);
  CHECK_NOTHROW(validate_shape({2, 3, 4, 5}));
  CHECK_THROWS_AS(make({2, 2}, {1.f, 2.f, 3.f}), DimensionError);
}

TEST_CASE("matmul small cases") {
  const auto a = make({2, 2}, {1.f, 2.f, 3.f, 4.f});
  const auto eye = make({2, 2}, {1.f, 0.f, 0.f, 1.f});
  CHECK(test::bit_equal(matmul(a, eye), a));
  const auto r = matmul(make({1, 3}, {1.f, 2.f, 3.f}), make({3, 1}, {4.f, 5.f, 6.f}));
  CHECK(r.item() == 32.f);
  CHECK_THROWS_AS(matmul(a, make({3, 1}, {1.f, 1.f, 1.f})), DimensionError);
}

TEST_CASE("matmul agrees with a triple loop") {
  Rng rng(11);
  const auto a = random(rng, {5, 7});
  const auto b = random(rng, {7, 3});
  const auto c = matmul(a, b);
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < 7; ++k) acc += double(a.at({i, k})) * b.at({k, j});
      CHECK(std::abs(c.at({i, j}) - acc) < 1e-5);
    }
  }
}

TEST_CASE("conv2d") {
  Rng rng(3);
  const auto x = random(rng, {2, 3, 3, 4});
  std::vector<float> k(16, 0.f);
  for (std::size_t c = 0; c < 4; ++c) k[c * 4 + c] = 1.f;
  SUBCASE("1x1 identity kernel is exact") {
    CHECK(test::bit_equal(conv2d(x, make({1, 1, 4, 4}, k)), x));
  }
  SUBCASE("even kernel is rejected") {
    CHECK_THROWS_AS(conv2d(x, Tensor<float>::zeros({2, 2, 4, 4})), ConfigError);
  }
  SUBCASE("3x3 against a padded loop") {
    const auto w = random(rng, {3, 3, 4, 2});
    const auto y = conv2d(x, w);
    REQUIRE(y.shape() == Shape{2, 3, 3, 2});
    for (std::size_t t = 0; t < 2; ++t)
      for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
          for (std::size_t o = 0; o < 2; ++o) {
            double acc = 0.0;
            for (int di = -1; di <= 1; ++di)
              for (int dj = -1; dj <= 1; ++dj) {
                const int ii = int(i) + di, jj = int(j) + dj;
                if (ii < 0 || jj < 0 || ii > 2 || jj > 2) continue;
                for (std::size_t c = 0; c < 4; ++c)
                  acc += double(x.at({t, std::size_t(ii), std::size_t(jj), c})) *
                         w.at({std::size_t(di + 1), std::size_t(dj + 1), c, o});
              }
            CHECK(std::abs(y.at({t, i, j, o}) - acc) < 1e-5);
          }
  }
}

TEST_CASE("activations") {
  const auto s = softmax(Tensor<float>::zeros({1, 3}), 1);
  for (float v : s.data()) CHECK(v == doctest::Approx(1.0 / 3.0));
  CHECK(sigmoid(Tensor<float>::scalar(0.f)).item() == 0.5f);
  CHECK(pfmg::tanh(Tensor<float>::scalar(0.f)).item() == 0.f);
  CHECK(relu(Tensor<float>::scalar(-1.f)).item() == 0.f);
}

TEST_CASE("softmax is shift invariant and normalized") {
  Rng rng(5);
  for (int draw = 0; draw < 20; ++draw) {
    const auto x = random(rng, {4, 6}, 3.0);
    const auto y = softmax(x, 1);
    const auto z = softmax(affine(x, 1.f, 7.3f), 1);
    CHECK(test::max_abs_diff(y, z) < 1e-6);
    for (std::size_t r = 0; r < 4; ++r) {
      double row = 0.0;
      for (std::size_t c = 0; c < 6; ++c) {
        CHECK(y.at({r, c}) >= 0.f);
        row += y.at({r, c});
      }
      CHECK(std::abs(row - 1.0) < 1e-6);
    }
    const auto cols = softmax(x, 0);
    for (std::size_t c = 0; c < 6; ++c) {
      double col = 0.0;
      for (std::size_t r = 0; r < 4; ++r) col += cols.at({r, c});
      CHECK(std::abs(col - 1.0) < 1e-6);
    }
  }
}

TEST_CASE("softmax survives large logits") {
  const auto y = softmax(make({1, 3}, {1000.f, 0.f, -1000.f}), 1);
  CHECK(all_finite(y));
  CHECK(y[0] == 1.f);
}

TEST_CASE("reductions") {
  CHECK(test::bit_equal(reduce(Reduction::avg_spatial, Tensor<float>::full({3, 2, 2, 5}, 2.f)),
                        Tensor<float>::full({3, 5}, 2.f)));
  CHECK(test::bit_equal(reduce(Reduction::max_time, make({2, 2}, {1.f, 5.f, 3.f, 2.f})),
                        make({1, 2}, {3.f, 5.f})));
  Rng rng(9);
  const auto x = random(rng, {10, 4});
  const auto s = reduce(Reduction::sum_time, x);
  for (std::size_t c = 0; c < 4; ++c) {
    double acc = 0.0;
    for (std::size_t t = 0; t < 10; ++t) acc += x.at({t, c});
    CHECK(std::abs(s[c] - acc) < 1e-6);
  }
  CHECK_THROWS_AS(reduce(Reduction::avg_spatial, x), DimensionError);
}

TEST_CASE("max_time ties send the gradient to the first row") {
  Tape<float> tape;
  const auto x = tape.variable(make({3, 1}, {2.f, 2.f, 1.f}));
  const auto g = tape.backward(sum(reduce(Reduction::max_time, x)), std::span(&x, 1));
  CHECK(test::bit_equal(g[0], make({3, 1}, {1.f, 0.f, 0.f})));
}

TEST_CASE("combine") {
  Rng rng(2);
  const auto x = random(rng, {3, 4});
  CHECK(test::bit_equal(add(x, Tensor<float>::zeros({3, 4})), x));
  CHECK(test::bit_equal(mul(Tensor<float>::full({3, 1}, 0.5f), Tensor<float>::full({3, 4}, 1.f)),
                        Tensor<float>::full({3, 4}, 0.5f)));
  const auto y = random(rng, {3, 4});
  const auto c = concat(x, y, 1);
  REQUIRE(c.shape() == Shape{3, 8});
  for (std::size_t t = 0; t < 3; ++t) {
    for (std::size_t j = 0; j < 4; ++j) {
      CHECK(c.at({t, j}) == x.at({t, j}));
      CHECK(c.at({t, 4 + j}) == y.at({t, j}));
    }
  }
  CHECK_THROWS_AS(add(x, Tensor<float>::zeros({2, 4})), DimensionError);
  CHECK_THROWS_AS(concat(x, Tensor<float>::zeros({2, 4}), 1), DimensionError);
}

TEST_CASE("backward basics") {
  SUBCASE("sum gives ones") {
    Tape<float> tape;
    const auto x = tape.variable(Tensor<float>::full({2, 3, 2}, 4.f));
    const auto g = tape.backward(sum(x), std::span(&x, 1));
    CHECK(test::bit_equal(g[0], Tensor<float>::full({2, 3, 2}, 1.f)));
  }
  SUBCASE("sum of squares") {
    Tape<float> tape;
    const auto x = tape.variable(make({2}, {1.f, 2.f}));
    const auto g = tape.backward(sum(mul(x, x)), std::span(&x, 1));
    CHECK(test::bit_equal(g[0], make({2}, {2.f, 4.f})));
  }
  SUBCASE("unreachable leaf gets zeros") {
    Tape<float> tape;
    const std::vector<Tensor<float>> leaves{tape.variable(make({2}, {1.f, 2.f})),
                                            tape.variable(make({3}, {1.f, 2.f, 3.f}))};
    const auto g = tape.backward(sum(leaves[0]), leaves);
    CHECK(test::bit_equal(g[1], Tensor<float>::zeros({3})));
  }
  SUBCASE("non-scalar loss") {
    Tape<float> tape;
    const auto x = tape.variable(make({2}, {1.f, 2.f}));
    CHECK_THROWS_AS(tape.backward(x, std::span(&x, 1)), ContractError);
  }
  SUBCASE("double backward") {
    Tape<float> tape;
    const auto x = tape.variable(make({2}, {1.f, 2.f}));
    const auto loss = sum(x);
    tape.backward(loss, std::span(&x, 1));
    CHECK_THROWS_AS(tape.backward(loss, std::span(&x, 1)), ContractError);
  }
  SUBCASE("mixed tapes") {
    Tape<float> t1, t2;
    const auto a = t1.variable(make({2}, {1.f, 2.f}));
    const auto b = t2.variable(make({2}, {1.f, 2.f}));
    CHECK_THROWS_AS(add(a, b), ContractError);
  }
}

TEST_CASE("add passes the gradient through and concat splits it") {
  Rng rng(4);
  Tape<double> tape;
  const std::vector<Tensor<double>> leaves{tape.variable(random<double>(rng, {3, 2})),
                                           tape.variable(random<double>(rng, {3, 5}))};
  const auto weights = random<double>(rng, {3, 7});
  const auto loss = sum(mul(concat(leaves[0], leaves[1], 1), weights));
  const auto g = tape.backward(loss, leaves);
  for (std::size_t t = 0; t < 3; ++t) {
    for (std::size_t j = 0; j < 2; ++j) CHECK(g[0].at({t, j}) == weights.at({t, j}));
    for (std::size_t j = 0; j < 5; ++j) CHECK(g[1].at({t, j}) == weights.at({t, 2 + j}));
  }

  Tape<double> tape2;
  const auto x = tape2.variable(random<double>(rng, {2, 3}));
  const auto up = random<double>(rng, {2, 3});
  const auto gx = tape2.backward(sum(mul(add(x, Tensor<double>::full({2, 3}, 9.0)), up)),
                                 std::span(&x, 1));
  CHECK(test::bit_equal(gx[0], up));
}

TEST_CASE("gradient accumulates over reuse") {
  Tape<double> tape;
  const auto x = tape.variable(make<double>({1}, {3.0}));
  const auto g = tape.backward(add(mul(x, x), x), std::span(&x, 1));
  CHECK(g[0].item() == 7.0);
}

TEST_CASE("tensor finite-difference suites") {
  for (const auto& r : run_gradcheck("tensor")) {
    INFO(r.name << " max rel err " << r.max_relative_error);
    CHECK(r.points == 10);
    CHECK(r.passed);
  }
}
