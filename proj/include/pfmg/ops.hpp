// Copyright 2026 The pfmg Authors
// SPDX-License-Identifier: Apache-2.0
//
// Differentiable operations. Each one computes its value eagerly and, when
// any input is tracked, records a backward closure on that input's tape.

#ifndef PFMG_OPS_HPP
#define PFMG_OPS_HPP

#include <cstddef>

#include "pfmg/tensor.hpp"

namespace pfmg {

enum class Activation { relu, sigmoid, tanh, softmax };

enum class Reduction {
  avg_spatial,  // T x h x w x c -> T x c
  max_time,     // T x d -> 1 x d, gradient to the first maximal row
  sum_time,     // T x d -> 1 x d
};

enum class Combination { add_broadcast, mul_broadcast, concat };

/// m x k times k x n.
template <Real S>
Tensor<S> matmul(const Tensor<S>& a, const Tensor<S>& b);

/// Same-padded, stride-1 spatial cross-correlation applied per time index.
/// x is T x h x w x c_in, kernel is k x k x c_in x c_out with k odd.
template <Real S>
Tensor<S> conv2d(const Tensor<S>& x, const Tensor<S>& kernel);

/// `axis` is only read for softmax.
template <Real S>
Tensor<S> apply_activation(Activation kind, const Tensor<S>& x, std::size_t axis = 0);

template <Real S>
Tensor<S> reduce(Reduction kind, const Tensor<S>& x);

/// Broadcasting needs equal ranks; on each axis the extents match or one is 1.
/// `axis` is only read for concat.
template <Real S>
Tensor<S> combine(Combination kind, const Tensor<S>& x, const Tensor<S>& y,
                  std::size_t axis = 0);

/// Sum of all entries, shape {1}.
template <Real S>
Tensor<S> sum(const Tensor<S>& x);

/// scale * x + shift, elementwise.
template <Real S>
Tensor<S> affine(const Tensor<S>& x, S scale, S shift = S(0));

/// log(max(x, floor)); no gradient flows where the floor is active.
template <Real S>
Tensor<S> log_clamped(const Tensor<S>& x, S floor);

template <Real S>
Tensor<S> transpose(const Tensor<S>& x);

template <Real S>
Tensor<S> reshape(const Tensor<S>& x, Shape shape);

/// Entries [begin, end) along `axis`.
template <Real S>
Tensor<S> slice(const Tensor<S>& x, std::size_t axis, std::size_t begin, std::size_t end);

// Shorthands.

template <Real S>
Tensor<S> relu(const Tensor<S>& x) { return apply_activation(Activation::relu, x); }
template <Real S>
Tensor<S> sigmoid(const Tensor<S>& x) { return apply_activation(Activation::sigmoid, x); }
template <Real S>
Tensor<S> tanh(const Tensor<S>& x) { return apply_activation(Activation::tanh, x); }
template <Real S>
Tensor<S> softmax(const Tensor<S>& x, std::size_t axis) {
  return apply_activation(Activation::softmax, x, axis);
}
template <Real S>
Tensor<S> add(const Tensor<S>& x, const Tensor<S>& y) {
  return combine(Combination::add_broadcast, x, y);
}
template <Real S>
Tensor<S> sub(const Tensor<S>& x, const Tensor<S>& y) {
  return combine(Combination::add_broadcast, x, affine(y, S(-1)));
}
template <Real S>
Tensor<S> mul(const Tensor<S>& x, const Tensor<S>& y) {
  return combine(Combination::mul_broadcast, x, y);
}
template <Real S>
Tensor<S> concat(const Tensor<S>& x, const Tensor<S>& y, std::size_t axis) {
  return combine(Combination::concat, x, y, axis);
}
template <Real S>
Tensor<S> mean(const Tensor<S>& x) {
  return affine(sum(x), S(1) / static_cast<S>(x.size()));
}

/// Applies a d_in x d_out map to the last axis of a tensor of any rank.
template <Real S>
Tensor<S> linear(const Tensor<S>& x, const Tensor<S>& weight);

/// True when every entry is finite.
template <Real S>
bool all_finite(const Tensor<S>& x);

}  // namespace pfmg

#endif  // PFMG_OPS_HPP
