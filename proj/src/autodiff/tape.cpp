// Copyright 2026 The toporeform Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "toporeform/autodiff/tape.hpp"

#include <array>
#include <utility>

#include "toporeform/error.hpp"

namespace toporeform {

namespace {

constexpr std::array<std::pair<OpKind, std::string_view>, 19> kOpNames{{
    {OpKind::leaf, "leaf"},
    {OpKind::add, "add"},
    {OpKind::sub, "sub"},
    {OpKind::mul, "mul"},
    {OpKind::matmul, "matmul"},
    {OpKind::conv2d, "conv2d"},
    {OpKind::maxpool2x2, "maxpool2x2"},
    {OpKind::relu, "relu"},
    {OpKind::sigmoid, "sigmoid"},
    {OpKind::tanh, "tanh"},
    {OpKind::exp, "exp"},
    {OpKind::reshape, "reshape"},
    {OpKind::concat, "concat"},
    {OpKind::mse, "mse"},
    {OpKind::softmax_cross_entropy, "softmax_cross_entropy"},
    {OpKind::gaussian_kl, "gaussian_kl"},
    {OpKind::reparameterize, "reparameterize"},
    {OpKind::clip01, "clip01"},
    {OpKind::custom, "custom"},
}};

}  // namespace

std::string_view op_name(OpKind kind) noexcept {
  for (const auto& [k, name] : kOpNames) {
    if (k == kind) {
      return name;
    }
  }
  return "unknown";
}

std::optional<OpKind> op_from_name(std::string_view name) noexcept {
  for (const auto& [k, n] : kOpNames) {
    if (n == name) {
      return k;
    }
  }
  return std::nullopt;
}

Tensor Tape::leaf(const Tensor& value) {
  TapeNode node;
  node.kind = OpKind::leaf;
  node.shape = value.shape();
  nodes_.push_back(std::move(node));
  return value.with_node(NodeId{nodes_.size() - 1});
}

NodeId Tape::record(OpKind kind, std::span<const Tensor* const> inputs, const Shape& shape,
                    BackwardRule rule) {
  TapeNode node;
  node.kind = kind;
  node.shape = shape;
  node.backward = std::move(rule);
  node.inputs.reserve(inputs.size());
  for (const Tensor* t : inputs) {
    if (t->tracked()) {
      require(t->node()->value < nodes_.size(), ErrorCode::DanglingNode,
              "op input refers to a node that is not on this tape");
    }
    node.inputs.push_back(t->node());
  }
  nodes_.push_back(std::move(node));
  return NodeId{nodes_.size() - 1};
}

const TapeNode& Tape::node(NodeId id) const {
  require(id.value < nodes_.size(), ErrorCode::DanglingNode,
          "node " + std::to_string(id.value) + " is not on the tape");
  return nodes_[id.value];
}

Gradients::Gradients(std::vector<std::vector<double>> by_node, std::vector<Shape> shapes)
    : by_node_(std::move(by_node)), shapes_(std::move(shapes)) {}

Tensor Gradients::of(const Tensor& t) const {
  if (!t.tracked() || t.node()->value >= by_node_.size()) {
    return Tensor(t.shape(), 0.0);
  }
  return at(*t.node());
}

Tensor Gradients::at(NodeId id) const {
  require(id.value < by_node_.size(), ErrorCode::DanglingNode,
          "no gradient slot for node " + std::to_string(id.value));
  const auto& g = by_node_[id.value];
  if (g.empty()) {
    return Tensor(shapes_[id.value], 0.0);
  }
  return Tensor(shapes_[id.value], g);
}

Gradients vjp(const Tape& tape, const Tensor& output, std::span<const double> seed) {
  require(output.tracked(), ErrorCode::DanglingNode, "backward from an untracked tensor");
  const NodeId root = *output.node();
  require(root.value < tape.size(), ErrorCode::DanglingNode, "output node is not on this tape");
  require(seed.size() == element_count(tape.node(root).shape), ErrorCode::ShapeMismatch,
          "seed size does not match output node");

  std::vector<std::vector<double>> grads(root.value + 1);
  std::vector<Shape> shapes(root.value + 1);
  for (std::size_t k = 0; k <= root.value; ++k) {
    shapes[k] = tape.node(NodeId{k}).shape;
  }
  grads[root.value].assign(seed.begin(), seed.end());

  std::vector<std::vector<double>*> slots;
  for (std::size_t k = root.value + 1; k-- > 0;) {
    const TapeNode& node = tape.node(NodeId{k});
    if (grads[k].empty() || node.kind == OpKind::leaf) {
      continue;
    }
    slots.assign(node.inputs.size(), nullptr);
    for (std::size_t i = 0; i < node.inputs.size(); ++i) {
      if (!node.inputs[i]) {
        continue;
      }
      const std::size_t parent = node.inputs[i]->value;
      require(parent < k, ErrorCode::DanglingNode, "tape order violated");
      if (grads[parent].empty()) {
        grads[parent].assign(element_count(shapes[parent]), 0.0);
      }
      slots[i] = &grads[parent];
    }
    node.backward(grads[k], slots);
  }
  return Gradients(std::move(grads), std::move(shapes));
}

Gradients backward(const Tape& tape, const Tensor& loss) {
  require(loss.size() == 1, ErrorCode::NotScalarLoss,
          "backward needs a scalar loss, got shape " + shape_string(loss.shape()));
  const double one = 1.0;
  return vjp(tape, loss, std::span<const double>(&one, 1));
}

}  // namespace toporeform
