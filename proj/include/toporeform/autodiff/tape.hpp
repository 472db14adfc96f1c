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

#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "toporeform/autodiff/tensor.hpp"

namespace toporeform {

enum class OpKind {
  leaf,
  add,
  sub,
  mul,
  matmul,
  conv2d,
  maxpool2x2,
  relu,
  sigmoid,
  tanh,
  exp,
  reshape,
  concat,
  mse,
  softmax_cross_entropy,
  gaussian_kl,
  reparameterize,
  clip01,
  custom,
};

std::string_view op_name(OpKind kind) noexcept;
std::optional<OpKind> op_from_name(std::string_view name) noexcept;

/// Accumulator slots handed to a backward rule, one per op input. A slot is
/// null when the corresponding input is not tracked, so rules can skip work.
using GradSlots = std::span<std::vector<double>* const>;
using BackwardRule = std::function<void(std::span<const double> upstream, GradSlots inputs)>;

struct TapeNode {
  OpKind kind = OpKind::leaf;
  std::vector<std::optional<NodeId>> inputs;
  Shape shape;
  BackwardRule backward;
};

/// Append-only record of a computation. Node ids are insertion indices, so
/// every parent id is smaller than its child's.
class Tape {
 public:
  Tensor leaf(const Tensor& value);
  NodeId record(OpKind kind, std::span<const Tensor* const> inputs, const Shape& shape,
                BackwardRule rule);

  std::size_t size() const noexcept { return nodes_.size(); }
  const TapeNode& node(NodeId id) const;

 private:
  std::vector<TapeNode> nodes_;
};

/// Per-node gradients of one backward sweep.
class Gradients {
 public:
  Gradients() = default;
  explicit Gradients(std::vector<std::vector<double>> by_node, std::vector<Shape> shapes);

  /// dLoss/dNode for a tracked tensor; zeros when the node was unreachable or
  /// the tensor is detached.
  Tensor of(const Tensor& t) const;
  Tensor at(NodeId id) const;

 private:
  std::vector<std::vector<double>> by_node_;
  std::vector<Shape> shapes_;
};

/// Reverse sweep seeded with 1 at a scalar loss. The tape is not modified.
Gradients backward(const Tape& tape, const Tensor& loss);

/// Vector-Jacobian product: reverse sweep seeded with `seed` at `output`.
Gradients vjp(const Tape& tape, const Tensor& output, std::span<const double> seed);

}  // namespace toporeform
