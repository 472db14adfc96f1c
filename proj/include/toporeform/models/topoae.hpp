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

#include "toporeform/models/layers.hpp"

namespace toporeform::models {

/// Encoder: two "same" 3x3 convolutions, each followed by ReLU and pooling,
/// then a linear map to the latent code. Decoder: one ReLU hidden layer and
/// a sigmoid output reshaped to the image.
struct TopoAESpec {
  std::size_t channels1 = 8;
  std::size_t channels2 = 16;
  std::size_t latent = 16;
  std::size_t decoder_hidden = 256;
  double lambda = 1.0;
};

class TopoAEModel {
 public:
  TopoAEModel(const TopoAESpec& spec, std::uint64_t seed);

  const TopoAESpec& spec() const noexcept { return spec_; }
  double lambda() const noexcept { return spec_.lambda; }
  ParameterList parameters();
  std::vector<const Parameter*> parameters() const;

  Tensor encode(Graph& g, const Tensor& x) const;
  Tensor decode(Graph& g, const Tensor& z) const;

 private:
  TopoAESpec spec_;
  Conv conv1_, conv2_;
  Dense to_latent_;
  Dense hidden_, to_image_;
};

struct TopoAEOutput {
  Tensor z;      // [B, latent]
  Tensor x_hat;  // [B,1,28,28]
};

/// BatchTooSmall for fewer than two samples in training mode.
TopoAEOutput topoae_forward(Graph& g, const TopoAEModel& model, const Tensor& x);

struct TopoAELoss {
  Tensor total;
  double reconstruction = 0.0;
  double topological = 0.0;
};

/// Mean squared reconstruction error plus lambda times the two-sided
/// pairing-distance mismatch between the flattened batch and its codes. The
/// topological term enters the tape as a custom node whose pairings are
/// fixed at forward time. With lambda = 0 the term is reported but not added.
TopoAELoss topoae_loss(Graph& g, const Tensor& x, const Tensor& x_hat, const Tensor& z, double lambda);

/// Differentiable topological term on its own; rows of `a` and `b` are
/// points.
Tensor topological_term(Tape& tape, const Tensor& a, const Tensor& b);

}  // namespace toporeform::models
