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

#include "toporeform/models/reformer.hpp"

#include <array>

#include "toporeform/error.hpp"
#include "toporeform/models/classifier.hpp"
#include "toporeform/random.hpp"

namespace toporeform::models {

ReformerVAE::ReformerVAE(const ReformerSpec& spec, std::uint64_t seed)
    : spec_(spec),
      enc_hidden_("reformer.enc_hidden", 784, spec.encoder_hidden, derive_seed(seed, 0)),
      enc_mu_("reformer.enc_mu", spec.encoder_hidden, spec.latent, derive_seed(seed, 1), Init::glorot),
      enc_logvar_("reformer.enc_logvar", spec.encoder_hidden, spec.latent, derive_seed(seed, 2), Init::glorot),
      dec_hidden_("reformer.dec_hidden", spec.latent + spec.aux, spec.decoder_hidden, derive_seed(seed, 3)),
      dec_out_("reformer.dec_out", spec.decoder_hidden, 784, derive_seed(seed, 4), Init::glorot) {}

ParameterList ReformerVAE::encoder_parameters() {
  ParameterList out;
  append(out, enc_hidden_);
  append(out, enc_mu_);
  append(out, enc_logvar_);
  return out;
}

ParameterList ReformerVAE::decoder_parameters() {
  ParameterList out;
  append(out, dec_hidden_);
  append(out, dec_out_);
  return out;
}

ParameterList ReformerVAE::parameters() {
  ParameterList out = encoder_parameters();
  for (Parameter* p : decoder_parameters()) {
    out.push_back(p);
  }
  return out;
}

std::vector<const Parameter*> ReformerVAE::parameters() const {
  const ParameterList list = const_cast<ReformerVAE*>(this)->parameters();
  return {list.begin(), list.end()};
}

void ReformerVAE::freeze_encoder(bool frozen) { set_frozen(encoder_parameters(), frozen); }
void ReformerVAE::freeze_decoder(bool frozen) { set_frozen(decoder_parameters(), frozen); }

ReformerVAE::Posterior ReformerVAE::encode(Graph& g, const Tensor& x) const {
  check_image_batch(x);
  const Tensor h = ops::relu(g.tape(), enc_hidden_(g, flatten(g, x)));
  return {enc_mu_(g, h), enc_logvar_(g, h)};
}

Tensor ReformerVAE::decode(Graph& g, const Tensor& bottleneck) const {
  require(bottleneck.rank() == 2 && bottleneck.dim(1) == spec_.latent + spec_.aux, ErrorCode::ShapeMismatch,
          "reformer bottleneck has shape " + shape_string(bottleneck.shape()));
  Tape& t = g.tape();
  const Tensor h = ops::relu(t, dec_hidden_(g, bottleneck));
  return ops::reshape(t, ops::sigmoid(t, dec_out_(g, h)), {bottleneck.dim(0), 1, 28, 28});
}

AuxModule::AuxModule(const AuxSpec& spec, std::uint64_t seed)
    : spec_(spec),
      hidden_("aux.hidden", spec.input, spec.hidden, derive_seed(seed, 0)),
      out_("aux.out", spec.hidden, spec.output, derive_seed(seed, 1), Init::glorot) {}

ParameterList AuxModule::parameters() {
  ParameterList out;
  append(out, hidden_);
  append(out, out_);
  return out;
}

std::vector<const Parameter*> AuxModule::parameters() const {
  const ParameterList list = const_cast<AuxModule*>(this)->parameters();
  return {list.begin(), list.end()};
}

Tensor AuxModule::forward(Graph& g, const Tensor& z) const {
  require(z.rank() == 2 && z.dim(1) == spec_.input, ErrorCode::ShapeMismatch,
          "aux input has shape " + shape_string(z.shape()));
  return out_(g, ops::relu(g.tape(), hidden_(g, z)));
}

ReformerOutput reformer_forward(Graph& g, const ReformerVAE& vae, const AuxModule* aux, const Tensor& x_pure,
                                const Tensor& z_topo, const Tensor& noise) {
  Tape& t = g.tape();
  ReformerOutput out;
  const auto posterior = vae.encode(g, x_pure);
  out.mu = posterior.mu;
  out.logvar = posterior.logvar;
  require(noise.shape() == out.mu.shape(), ErrorCode::ShapeMismatch,
          "noise shape " + shape_string(noise.shape()) + " does not match " + shape_string(out.mu.shape()));
  const Tensor sample = ops::reparameterize(t, out.mu, out.logvar, noise);
  const Tensor side = aux != nullptr ? aux->forward(g, z_topo) : Tensor({x_pure.dim(0), vae.spec().aux}, 0.0);
  const std::array<Tensor, 2> parts{sample, side};
  out.bottleneck = ops::concat(t, parts, 1);
  out.x_ref = vae.decode(g, out.bottleneck);
  return out;
}

ReformerLoss reformer_loss(Graph& g, const Tensor& x_ref, const Tensor& target, const Tensor& logits,
                           std::span<const int> labels, const Tensor& mu, const Tensor& logvar,
                           const LossWeights& weights) {
  require(x_ref.shape() == target.shape(), ErrorCode::ShapeMismatch, "reformer output and target differ in shape");
  Tape& t = g.tape();
  const Tensor rec = ops::mse(t, x_ref, target);
  const Tensor ce = ops::softmax_cross_entropy(t, logits, labels);
  const Tensor kl = ops::gaussian_kl(t, mu, logvar);
  ReformerLoss out;
  out.reconstruction = rec.item();
  out.classification = ce.item();
  out.kl = kl.item();
  Tensor total = ops::mul(t, rec, Tensor::scalar(weights.reconstruction));
  total = ops::add(t, total, ops::mul(t, ce, Tensor::scalar(weights.classification)));
  out.total = ops::add(t, total, ops::mul(t, kl, Tensor::scalar(weights.kl)));
  return out;
}

}  // namespace toporeform::models
