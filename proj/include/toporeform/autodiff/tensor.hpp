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

#include <cstddef>
#include <compare>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace toporeform {

using Shape = std::vector<std::size_t>;

std::size_t element_count(const Shape& shape) noexcept;
std::string shape_string(const Shape& shape);

/// Index of a node on a Tape.
struct NodeId {
  std::size_t value = 0;
  auto operator<=>(const NodeId&) const = default;
};

/// Dense row-major array of doubles.
///
/// Storage is shared between copies and duplicated on the first mutable
/// access, so tensors behave as values while tape closures can hold inputs
/// without copying. A tensor produced by a recorded op carries the id of its
/// tape node; a detached tensor carries none and is treated as a constant.
class Tensor {
 public:
  Tensor();
  Tensor(Shape shape, std::vector<double> data);
  explicit Tensor(Shape shape, double fill = 0.0);

  static Tensor scalar(double value);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const noexcept { return data_->size(); }

  std::span<const double> data() const noexcept { return *data_; }
  std::span<double> mutable_data();
  const double* raw() const noexcept { return data_->data(); }

  double operator[](std::size_t i) const noexcept { return (*data_)[i]; }
  double item() const;

  std::optional<NodeId> node() const noexcept { return node_; }
  bool tracked() const noexcept { return node_.has_value(); }

  Tensor detached() const;
  Tensor with_node(NodeId id) const;
  /// Same storage, new shape of equal element count; drops the node id.
  Tensor reshaped(Shape shape) const;

  bool all_finite() const noexcept;

 private:
  Shape shape_;
  std::shared_ptr<std::vector<double>> data_;
  std::optional<NodeId> node_;
};

/// Bitwise equality of shape and contents.
bool identical(const Tensor& a, const Tensor& b) noexcept;

}  // namespace toporeform
