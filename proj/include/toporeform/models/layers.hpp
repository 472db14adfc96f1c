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
#include <string>
#include <vector>

#include "toporeform/autodiff/graph.hpp"
#include "toporeform/autodiff/ops.hpp"
#include "toporeform/autodiff/optim.hpp"

namespace toporeform::models {

/// he: ReLU layers. glorot: linear heads. output: glorot scaled by 1/4 so
/// fresh classifiers start near uniform predictions.
enum class Init { he, glorot, output };

/// y = x W + b with W [in, out].
struct Dense {
  Parameter weight;
  Parameter bias;

  Dense() = default;
  Dense(const std::string& name, std::size_t in, std::size_t out, std::uint64_t seed, Init init = Init::he);
  Tensor operator()(Graph& g, const Tensor& x) const;
  std::size_t out_features() const { return weight.value.dim(1); }
};

struct Conv {
  Parameter weight;
  Parameter bias;
  ops::Padding padding = ops::Padding::valid;

  Conv() = default;
  Conv(const std::string& name, std::size_t in_channels, std::size_t out_channels, std::size_t kernel,
       ops::Padding padding, std::uint64_t seed);
  Tensor operator()(Graph& g, const Tensor& x) const;
};

using ParameterList = std::vector<Parameter*>;

void append(ParameterList& list, Dense& layer);
void append(ParameterList& list, Conv& layer);
void set_frozen(const ParameterList& list, bool frozen);
bool all_frozen(const ParameterList& list);

/// Spatial size after a stride-1 convolution.
std::size_t conv_output_side(std::size_t side, std::size_t kernel, ops::Padding padding);

/// Flattens [B, ...] to [B, prod(...)].
Tensor flatten(Graph& g, const Tensor& x);

}  // namespace toporeform::models
