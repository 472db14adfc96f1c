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

#include "toporeform/models/layers.hpp"

#include <algorithm>
#include <cmath>

#include "toporeform/error.hpp"
#include "toporeform/random.hpp"

namespace toporeform::models {

namespace {

Tensor init_uniform(const Shape& shape, double bound, std::uint64_t seed) {
  return uniform_tensor(shape, -bound, bound, seed, 0);
}

}  // namespace

Dense::Dense(const std::string& name, std::size_t in, std::size_t out, std::uint64_t seed, Init init) {
  double bound = init == Init::he ? std::sqrt(6.0 / static_cast<double>(in))
                                  : std::sqrt(6.0 / static_cast<double>(in + out));
  if (init == Init::output) {
    bound *= 0.25;
  }
  weight = {name + ".weight", init_uniform({in, out}, bound, seed)};
  bias = {name + ".bias", Tensor({out}, 0.0)};
}

Tensor Dense::operator()(Graph& g, const Tensor& x) const {
  Tape& t = g.tape();
  return ops::add(t, ops::matmul(t, x, g.bind(weight)), g.bind(bias));
}

Conv::Conv(const std::string& name, std::size_t in_channels, std::size_t out_channels, std::size_t kernel,
           ops::Padding pad, std::uint64_t seed)
    : padding(pad) {
  const double bound = std::sqrt(6.0 / static_cast<double>(in_channels * kernel * kernel));
  weight = {name + ".weight", init_uniform({out_channels, in_channels, kernel, kernel}, bound, seed)};
  bias = {name + ".bias", Tensor({out_channels}, 0.0)};
}

Tensor Conv::operator()(Graph& g, const Tensor& x) const {
  return ops::conv2d(g.tape(), x, g.bind(weight), g.bind(bias), padding);
}

void append(ParameterList& list, Dense& layer) {
  list.push_back(&layer.weight);
  list.push_back(&layer.bias);
}

void append(ParameterList& list, Conv& layer) {
  list.push_back(&layer.weight);
  list.push_back(&layer.bias);
}

void set_frozen(const ParameterList& list, bool frozen) {
  for (Parameter* p : list) {
    p->frozen = frozen;
  }
}

bool all_frozen(const ParameterList& list) {
  return std::all_of(list.begin(), list.end(), [](const Parameter* p) { return p->frozen; });
}

std::size_t conv_output_side(std::size_t side, std::size_t kernel, ops::Padding padding) {
  if (padding == ops::Padding::same) {
    return side;
  }
  require(side >= kernel, ErrorCode::ShapeMismatch, "feature map smaller than the kernel");
  return side - kernel + 1;
}

Tensor flatten(Graph& g, const Tensor& x) {
  const std::size_t batch = x.dim(0);
  return ops::reshape(g.tape(), x, {batch, x.size() / std::max<std::size_t>(batch, 1)});
}

}  // namespace toporeform::models
