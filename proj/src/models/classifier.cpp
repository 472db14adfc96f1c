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

#include "toporeform/models/classifier.hpp"

#include <string>

#include "toporeform/error.hpp"
#include "toporeform/random.hpp"

namespace toporeform::models {

void check_image_batch(const Tensor& x) {
  require(x.rank() == 4 && x.dim(1) == 1 && x.dim(2) == 28 && x.dim(3) == 28, ErrorCode::ShapeMismatch,
          "expected images [B,1,28,28], got " + shape_string(x.shape()));
}

ClassifierModel::ClassifierModel(const ClassifierSpec& spec, std::uint64_t seed) : spec_(spec) {
  require(spec.classes >= 2, ErrorCode::InvalidArgument, "classifier needs at least two classes");
  require(spec.conv_channels.size() % 2 == 0, ErrorCode::InvalidArgument,
          "classifier convolutions come in pairs");
  std::size_t channels = 1, side = 28;
  std::uint64_t layer = 0;
  for (std::size_t k = 0; k < spec.conv_channels.size(); ++k) {
    convs_.emplace_back("classifier.conv" + std::to_string(k), channels, spec.conv_channels[k], spec.kernel,
                        ops::Padding::valid, derive_seed(seed, layer++));
    channels = spec.conv_channels[k];
    side = conv_output_side(side, spec.kernel, ops::Padding::valid);
    if (k % 2 == 1) {
      side /= 2;
    }
  }
  std::size_t width = channels * side * side;
  for (std::size_t k = 0; k < spec.dense.size(); ++k) {
    dense_.emplace_back("classifier.dense" + std::to_string(k), width, spec.dense[k], derive_seed(seed, layer++));
    width = spec.dense[k];
  }
  dense_.emplace_back("classifier.logits", width, static_cast<std::size_t>(spec.classes),
                      derive_seed(seed, layer++), Init::output);
}

ClassifierModel::ClassifierModel(const ClassifierModel& other) = default;
ClassifierModel& ClassifierModel::operator=(const ClassifierModel& other) = default;

ParameterList ClassifierModel::parameters() {
  ParameterList out;
  for (Conv& c : convs_) {
    append(out, c);
  }
  for (Dense& d : dense_) {
    append(out, d);
  }
  return out;
}

std::vector<const Parameter*> ClassifierModel::parameters() const {
  const ParameterList list = const_cast<ClassifierModel*>(this)->parameters();
  return {list.begin(), list.end()};
}

Tensor ClassifierModel::forward(Graph& g, const Tensor& x) const {
  check_image_batch(x);
  Tape& t = g.tape();
  Tensor h = x;
  for (std::size_t k = 0; k < convs_.size(); ++k) {
    h = ops::relu(t, convs_[k](g, h));
    if (k % 2 == 1) {
      h = ops::maxpool2x2(t, h);
    }
  }
  h = flatten(g, h);
  for (std::size_t k = 0; k + 1 < dense_.size(); ++k) {
    h = ops::relu(t, dense_[k](g, h));
  }
  return dense_.back()(g, h);
}

Tensor classifier_forward(Graph& g, const ClassifierModel& model, const Tensor& x) { return model.forward(g, x); }

std::vector<int> argmax_rows(const Tensor& logits) {
  require(logits.rank() == 2, ErrorCode::ShapeMismatch, "argmax_rows expects [B,C]");
  const std::size_t rows = logits.dim(0), cols = logits.dim(1);
  std::vector<int> out(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < cols; ++c) {
      if (logits[r * cols + c] > logits[r * cols + best]) {
        best = c;
      }
    }
    out[r] = static_cast<int>(best);
  }
  return out;
}

}  // namespace toporeform::models
