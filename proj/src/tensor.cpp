// Copyright 2026 The pfmg Authors
// SPDX-License-Identifier: Apache-2.0

#include "pfmg/tensor.hpp"

#include <sstream>

namespace pfmg {

std::size_t numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t e : shape) n *= e;
  return n;
}

std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

void validate_shape(const Shape& shape) {
  if (shape.empty() || shape.size() > kMaxRank) {
    throw DimensionError("tensor rank must be in [1, 4], got shape " + to_string(shape));
  }
  for (std::size_t e : shape) {
    if (e == 0) throw DimensionError("zero extent in shape " + to_string(shape));
  }
}

template <Real S>
Tensor<S>::Tensor(Shape shape, std::vector<S> data) : shape_(std::move(shape)) {
  validate_shape(shape_);
  if (numel(shape_) != data.size()) {
    throw DimensionError("shape " + to_string(shape_) + " holds " +
                         std::to_string(numel(shape_)) + " values, got " +
                         std::to_string(data.size()));
  }
  data_ = std::make_shared<const std::vector<S>>(std::move(data));
}

template <Real S>
Tensor<S> Tensor<S>::zeros(Shape shape) {
  return full(std::move(shape), S(0));
}

template <Real S>
Tensor<S> Tensor<S>::full(Shape shape, S value) {
  validate_shape(shape);
  std::vector<S> data(numel(shape), value);
  return Tensor(std::move(shape), std::move(data));
}

template <Real S>
S Tensor<S>::item() const {
  if (size() != 1) {
    throw ContractError("item() on tensor of shape " + to_string(shape_));
  }
  return (*data_)[0];
}

template <Real S>
std::size_t Tensor<S>::offset(std::initializer_list<std::size_t> index) const {
  if (index.size() != shape_.size()) {
    throw DimensionError("index rank " + std::to_string(index.size()) +
                         " for shape " + to_string(shape_));
  }
  std::size_t flat = 0;
  std::size_t axis = 0;
  for (std::size_t i : index) {
    if (i >= shape_[axis]) {
      throw DimensionError("index out of range for shape " + to_string(shape_));
    }
    flat = flat * shape_[axis] + i;
    ++axis;
  }
  return flat;
}

template <Real S>
Tensor<S> Tensor<S>::detach() const {
  Tensor out = *this;
  out.tape_ = nullptr;
  out.node_ = 0;
  return out;
}

template <Real S>
Tensor<S> Tape<S>::variable(const Tensor<S>& value) {
  if (consumed_) throw ContractError("tape already consumed by backward()");
  if (value.empty()) throw ContractError("cannot register an empty tensor");
  nodes_.push_back(Node{value.shape(), {}, {}});
  Tensor<S> out = value;
  out.tape_ = this;
  out.node_ = nodes_.size() - 1;
  return out;
}

template <Real S>
Tensor<S> Tape<S>::record(Shape shape, std::vector<S> data,
                          std::vector<const Tensor<S>*> inputs, BackwardFn<S> backward) {
  if (consumed_) throw ContractError("tape already consumed by backward()");
  Tensor<S> out(std::move(shape), std::move(data));
  Node node{out.shape(), {}, std::move(backward)};
  node.inputs.reserve(inputs.size());
  for (const Tensor<S>* in : inputs) {
    if (in->tape_ == this) {
      node.inputs.emplace_back(in->node_);
    } else if (in->tape_ == nullptr) {
      node.inputs.emplace_back(std::nullopt);
    } else {
      throw ContractError("operation mixes tensors from different tapes");
    }
  }
  nodes_.push_back(std::move(node));
  out.tape_ = this;
  out.node_ = nodes_.size() - 1;
  return out;
}

template <Real S>
std::vector<Tensor<S>> Tape<S>::backward(const Tensor<S>& loss,
                                         std::span<const Tensor<S>> leaves) {
  if (consumed_) {
    throw ContractError("backward() already ran on this tape; higher-order gradients are not supported");
  }
  if (loss.tape() != this) throw ContractError("loss is not recorded on this tape");
  if (loss.size() != 1) {
    throw ContractError("backward() needs a scalar loss, got shape " + to_string(loss.shape()));
  }
  for (const auto& leaf : leaves) {
    if (leaf.tape() != this) throw ContractError("requested leaf is not on this tape");
  }
  consumed_ = true;

  std::vector<std::vector<S>> grads(nodes_.size());
  const NodeId root = *loss.node();
  grads[root].assign(1, S(1));

  std::vector<std::vector<S>*> input_grads;
  for (NodeId id = root + 1; id-- > 0;) {
    Node& node = nodes_[id];
    if (grads[id].empty() || !node.backward) continue;
    input_grads.clear();
    for (const auto& in : node.inputs) {
      if (!in) {
        input_grads.push_back(nullptr);
        continue;
      }
      auto& g = grads[*in];
      if (g.empty()) g.assign(numel(nodes_[*in].shape), S(0));
      input_grads.push_back(&g);
    }
    node.backward(grads[id], input_grads);
    // Intermediate buffers are no longer needed once propagated.
    if (id != root) {
      bool is_leaf_requested = false;
      for (const auto& leaf : leaves) is_leaf_requested |= (*leaf.node() == id);
      if (!is_leaf_requested) std::vector<S>().swap(grads[id]);
    }
  }

  std::vector<Tensor<S>> out;
  out.reserve(leaves.size());
  for (const auto& leaf : leaves) {
    auto& g = grads[*leaf.node()];
    if (g.empty()) {
      out.push_back(Tensor<S>::zeros(leaf.shape()));
    } else {
      out.emplace_back(leaf.shape(), g);
    }
  }
  nodes_.clear();
  return out;
}

template <Real S>
Tape<S>* common_tape(std::initializer_list<const Tensor<S>*> inputs) {
  Tape<S>* tape = nullptr;
  for (const Tensor<S>* in : inputs) {
    if (!in->tape()) continue;
    if (tape && tape != in->tape()) {
      throw ContractError("operation mixes tensors from different tapes");
    }
    tape = in->tape();
  }
  return tape;
}

template class Tensor<float>;
template class Tensor<double>;
template class Tape<float>;
template class Tape<double>;
template Tape<float>* common_tape(std::initializer_list<const Tensor<float>*>);
template Tape<double>* common_tape(std::initializer_list<const Tensor<double>*>);

}  // namespace pfmg
