// Copyright 2026 The pfmg Authors
// SPDX-License-Identifier: Apache-2.0
//
// Dense tensors and the reverse-mode differentiation tape.
//
// A Tensor is an immutable value: a shape plus a shared, read-only buffer.
// Tensors produced by operations on tracked inputs carry a handle into the
// Tape that recorded them. Gradients live on the tape, never in the tensor.
//
// Storage precision is the template argument. Model code runs on
// Tensor<float>; finite-difference checks instantiate the same code with
// double.

#ifndef PFMG_TENSOR_HPP
#define PFMG_TENSOR_HPP

#include <concepts>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pfmg/error.hpp"

namespace pfmg {

template <typename S>
concept Real = std::same_as<S, float> || std::same_as<S, double>;

/// Up to four extents, all >= 1.
using Shape = std::vector<std::size_t>;

inline constexpr std::size_t kMaxRank = 4;

std::size_t numel(const Shape& shape);
std::string to_string(const Shape& shape);

/// Throws DimensionError unless rank is in [1, kMaxRank] and all extents >= 1.
void validate_shape(const Shape& shape);

template <Real S>
class Tape;

using NodeId = std::size_t;

template <Real S>
class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<S> data);

  static Tensor zeros(Shape shape);
  static Tensor full(Shape shape, S value);
  static Tensor scalar(S value) { return full({1}, value); }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t extent(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const { return data_ ? data_->size() : 0; }
  bool empty() const { return !data_; }

  std::span<const S> data() const {
    return data_ ? std::span<const S>(*data_) : std::span<const S>();
  }
  S operator[](std::size_t i) const { return (*data_)[i]; }
  /// Value of a single-element tensor.
  S item() const;

  /// Row-major flat offset of a multi-index.
  std::size_t offset(std::initializer_list<std::size_t> index) const;
  S at(std::initializer_list<std::size_t> index) const {
    return (*data_)[offset(index)];
  }

  Tape<S>* tape() const { return tape_; }
  std::optional<NodeId> node() const {
    return tape_ ? std::optional<NodeId>(node_) : std::nullopt;
  }
  bool tracked() const { return tape_ != nullptr; }

  /// Same values, no tape handle.
  Tensor detach() const;

  /// Same values converted to another precision, untracked.
  template <Real T>
  Tensor<T> cast() const {
    std::vector<T> out(size());
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = static_cast<T>((*data_)[i]);
    }
    return Tensor<T>(shape_, std::move(out));
  }

 private:
  friend class Tape<S>;

  Shape shape_;
  std::shared_ptr<const std::vector<S>> data_;
  Tape<S>* tape_ = nullptr;
  NodeId node_ = 0;
};

/// Accumulates gradient into each tracked input given the output gradient.
/// `input_grads[i]` is null when input i is not on the tape.
template <Real S>
using BackwardFn = std::function<void(std::span<const S> output_grad,
                                      std::span<std::vector<S>* const> input_grads)>;

/// Records operations in execution order and replays them in reverse.
/// A tape is single-use: backward() may run once.
template <Real S>
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Registers `value` as a differentiable leaf.
  Tensor<S> variable(const Tensor<S>& value);

  /// Registers the result of an operation. Untracked inputs are allowed and
  /// simply receive no gradient.
  Tensor<S> record(Shape shape, std::vector<S> data,
                   std::vector<const Tensor<S>*> inputs, BackwardFn<S> backward);

  /// Gradient of the single-element `loss` with respect to each leaf.
  /// Leaves that do not influence the loss get zeros.
  std::vector<Tensor<S>> backward(const Tensor<S>& loss,
                                  std::span<const Tensor<S>> leaves);

  std::size_t size() const { return nodes_.size(); }
  bool consumed() const { return consumed_; }

 private:
  struct Node {
    Shape shape;
    std::vector<std::optional<NodeId>> inputs;
    BackwardFn<S> backward;  // empty for leaves
  };

  std::vector<Node> nodes_;
  bool consumed_ = false;
};

/// The tape shared by the tracked inputs, or null when none is tracked.
/// Throws ContractError if inputs belong to different tapes.
template <Real S>
Tape<S>* common_tape(std::initializer_list<const Tensor<S>*> inputs);

extern template class Tensor<float>;
extern template class Tensor<double>;
extern template class Tape<float>;
extern template class Tape<double>;

}  // namespace pfmg

#endif  // PFMG_TENSOR_HPP
