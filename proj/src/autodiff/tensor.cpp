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

#include "toporeform/autodiff/tensor.hpp"

#include <cmath>
#include <cstring>
#include <functional>
#include <numeric>

#include "toporeform/error.hpp"

namespace toporeform {

std::size_t element_count(const Shape& shape) noexcept {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) {
      out += ",";
    }
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

Tensor::Tensor() : shape_{0}, data_(std::make_shared<std::vector<double>>()) {}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::make_shared<std::vector<double>>(std::move(data))) {
  if (element_count(shape_) != data_->size()) {
    fail(ErrorCode::ShapeMismatch, "tensor shape " + shape_string(shape_) + " does not hold " +
                                       std::to_string(data_->size()) + " elements");
  }
}

Tensor::Tensor(Shape shape, double fill)
    : shape_(std::move(shape)),
      data_(std::make_shared<std::vector<double>>(element_count(shape_), fill)) {}

Tensor Tensor::scalar(double value) { return Tensor(Shape{1}, std::vector<double>{value}); }

std::span<double> Tensor::mutable_data() {
  if (data_.use_count() > 1) {
    data_ = std::make_shared<std::vector<double>>(*data_);
  }
  return *data_;
}

double Tensor::item() const {
  require(size() == 1, ErrorCode::ShapeMismatch, "item() on tensor of shape " + shape_string(shape_));
  return (*data_)[0];
}

Tensor Tensor::detached() const {
  Tensor out = *this;
  out.node_.reset();
  return out;
}

Tensor Tensor::with_node(NodeId id) const {
  Tensor out = *this;
  out.node_ = id;
  return out;
}

Tensor Tensor::reshaped(Shape shape) const {
  require(element_count(shape) == size(), ErrorCode::ShapeMismatch,
          "cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
  Tensor out = *this;
  out.shape_ = std::move(shape);
  out.node_.reset();
  return out;
}

bool Tensor::all_finite() const noexcept {
  for (double v : *data_) {
    if (!std::isfinite(v)) {
      return false;
    }
  }
  return true;
}

bool identical(const Tensor& a, const Tensor& b) noexcept {
  if (a.shape() != b.shape()) {
    return false;
  }
  return a.size() == 0 || std::memcmp(a.raw(), b.raw(), a.size() * sizeof(double)) == 0;
}

}  // namespace toporeform
