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
#include <span>

#include "toporeform/models/layers.hpp"

namespace toporeform::models {

/// Encoder: one ReLU hidden layer on the flattened image, then linear heads
/// for the mean and log-variance. Decoder: one ReLU hidden layer on the
/// bottleneck and a sigmoid image output.
struct ReformerSpec {
  std::size_t encoder_hidden = 256;
  std::size_t latent = 16;
  std::size_t aux = 8;
  std::size_t decoder_hidden = 256;
};

class ReformerVAE {
 public:
  ReformerVAE(const ReformerSpec& spec, std::uint64_t seed);

  const ReformerSpec& spec() const noexcept { return spec_; }
  ParameterList encoder_parameters();
  ParameterList decoder_parameters();
  ParameterList parameters();
  std::vector<const Parameter*> parameters() const;

  void freeze_encoder(bool frozen);
  void freeze_decoder(bool frozen);

  struct Posterior {
    Tensor mu;
    Tensor logvar;
  };
  Posterior encode(Graph& g, const Tensor& x) const;
  /// bottleneck [B, latent + aux] -> image [B,1,28,28].
  Tensor decode(Graph& g, const Tensor& bottleneck) const;

 private:
  ReformerSpec spec_;
  Dense enc_hidden_, enc_mu_, enc_logvar_;
  Dense dec_hidden_, dec_out_;
};

struct AuxSpec {
  std::size_t input = 16;
  std::size_t hidden = 32;
  std::size_t output = 8;
};

/// Projects the TopoAE code into the reformer bottleneck.
class AuxModule {
 public:
  AuxModule(const AuxSpec& spec, std::uint64_t seed);

  const AuxSpec& spec() const noexcept { return spec_; }
  ParameterList parameters();
  std::vector<const Parameter*> parameters() const;
  Tensor forward(Graph& g, const Tensor& z) const;

 private:
  AuxSpec spec_;
  Dense hidden_, out_;
};

struct ReformerOutput {
  Tensor x_ref;
  Tensor mu;
  Tensor logvar;
  Tensor bottleneck;
};

/// `aux` may be null, in which case a zero auxiliary vector of the VAE's
/// configured width is concatenated.
ReformerOutput reformer_forward(Graph& g, const ReformerVAE& vae, const AuxModule* aux, const Tensor& x_pure,
                                const Tensor& z_topo, const Tensor& noise);

struct LossWeights {
  double reconstruction = 1.0;
  double classification = 0.5;
  double kl = 0.5;
};

struct ReformerLoss {
  Tensor total;
  double reconstruction = 0.0;
  double classification = 0.0;
  double kl = 0.0;
};

ReformerLoss reformer_loss(Graph& g, const Tensor& x_ref, const Tensor& target, const Tensor& logits,
                           std::span<const int> labels, const Tensor& mu, const Tensor& logvar,
                           const LossWeights& weights);

}  // namespace toporeform::models
