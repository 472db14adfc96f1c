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

#include <cstdint>
#include <vector>

#include "toporeform/models/layers.hpp"

namespace toporeform::models {

/// Convolutions come in pairs, each pair followed by 2x2 max pooling, then a
/// stack of ReLU dense layers and a linear output layer.
struct ClassifierSpec {
  std::vector<std::size_t> conv_channels{32, 32, 64, 64};
  std::size_t kernel = 3;
  std::vector<std::size_t> dense{200, 200};
  int classes = 10;
};

class ClassifierModel {
 public:
  ClassifierModel(const ClassifierSpec& spec, std::uint64_t seed);
  ClassifierModel(const ClassifierModel& other);
  ClassifierModel& operator=(const ClassifierModel& other);

  const ClassifierSpec& spec() const noexcept { return spec_; }
  ParameterList parameters();
  std::vector<const Parameter*> parameters() const;

  /// x [B,1,28,28] -> logits [B, classes].
  Tensor forward(Graph& g, const Tensor& x) const;

 private:
  ClassifierSpec spec_;
  std::vector<Conv> convs_;
  std::vector<Dense> dense_;
};

Tensor classifier_forward(Graph& g, const ClassifierModel& model, const Tensor& x);

/// Row-wise argmax, ties to the lowest index.
std::vector<int> argmax_rows(const Tensor& logits);

void check_image_batch(const Tensor& x);

}  // namespace toporeform::models
