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

#include "toporeform/models/topoae.hpp"

#include <array>

#include "toporeform/error.hpp"
#include "toporeform/models/classifier.hpp"
#include "toporeform/random.hpp"
#include "toporeform/topology/persistence.hpp"
#include "toporeform/topology/topo_loss.hpp"

namespace toporeform::models {

namespace {

topology::PointCloud rows_as_cloud(const Tensor& t) {
  const std::size_t n = t.dim(0);
  const std::size_t d = t.size() / n;
  return topology::PointCloud(n, d, std::vector<double>(t.data().begin(), t.data().end()));
}

}  // namespace

TopoAEModel::TopoAEModel(const TopoAESpec& spec, std::uint64_t seed)
    : spec_(spec),
      conv1_("topoae.conv1", 1, spec.channels1, 3, ops::Padding::same, derive_seed(seed, 0)),
      conv2_("topoae.conv2", spec.channels1, spec.channels2, 3, ops::Padding::same, derive_seed(seed, 1)),
      to_latent_("topoae.latent", spec.channels2 * 7 * 7, spec.latent, derive_seed(seed, 2), Init::glorot),
      hidden_("topoae.dec_hidden", spec.latent, spec.decoder_hidden, derive_seed(seed, 3)),
      to_image_("topoae.dec_out", spec.decoder_hidden, 784, derive_seed(seed, 4), Init::glorot) {
  require(spec.lambda >= 0.0, ErrorCode::InvalidArgument, "topological weight must be nonnegative");
}

ParameterList TopoAEModel::parameters() {
  ParameterList out;
  append(out, conv1_);
  append(out, conv2_);
  append(out, to_latent_);
  append(out, hidden_);
  append(out, to_image_);
  return out;
}

std::vector<const Parameter*> TopoAEModel::parameters() const {
  const ParameterList list = const_cast<TopoAEModel*>(this)->parameters();
  return {list.begin(), list.end()};
}

Tensor TopoAEModel::encode(Graph& g, const Tensor& x) const {
  check_image_batch(x);
  Tape& t = g.tape();
  Tensor h = ops::maxpool2x2(t, ops::relu(t, conv1_(g, x)));
  h = ops::maxpool2x2(t, ops::relu(t, conv2_(g, h)));
  return to_latent_(g, flatten(g, h));
}

Tensor TopoAEModel::decode(Graph& g, const Tensor& z) const {
  Tape& t = g.tape();
  const Tensor h = ops::relu(t, hidden_(g, z));
  const Tensor out = ops::sigmoid(t, to_image_(g, h));
  return ops::reshape(t, out, {z.dim(0), 1, 28, 28});
}

TopoAEOutput topoae_forward(Graph& g, const TopoAEModel& model, const Tensor& x) {
  if (g.mode() == Graph::Mode::training) {
    require(x.rank() >= 1 && x.dim(0) >= 2, ErrorCode::BatchTooSmall, "TopoAE training needs at least two samples");
  }
  TopoAEOutput out;
  out.z = model.encode(g, x);
  out.x_hat = model.decode(g, out.z);
  return out;
}

Tensor topological_term(Tape& tape, const Tensor& a, const Tensor& b) {
  require(a.rank() >= 1 && b.rank() >= 1 && a.dim(0) == b.dim(0), ErrorCode::ShapeMismatch,
          "topological term needs matching batch sizes");
  require(a.dim(0) >= 2, ErrorCode::BatchTooSmall, "topological term needs at least two points");
  const auto cloud_a = rows_as_cloud(a);
  const auto cloud_b = rows_as_cloud(b);
  const auto dist_a = topology::pairwise_distances(cloud_a);
  const auto dist_b = topology::pairwise_distances(cloud_b);
  auto pairing_a = topology::persistence0(dist_a).pairing;
  auto pairing_b = topology::persistence0(dist_b).pairing;
  const double value = topology::topo_loss(dist_a, dist_b, pairing_a, pairing_b).total;

  const std::array<const Tensor*, 2> inputs{&a, &b};
  return ops::custom(tape, inputs, Tensor::scalar(value),
                     [cloud_a, cloud_b, pairing_a, pairing_b](std::span<const double> upstream, GradSlots slots) {
                       const auto grads = topology::topo_loss_backward(cloud_a, cloud_b, pairing_a, pairing_b);
                       const double scale = upstream[0];
                       if (slots[0] != nullptr) {
                         for (std::size_t k = 0; k < grads.d_x.size(); ++k) {
                           (*slots[0])[k] += scale * grads.d_x[k];
                         }
                       }
                       if (slots[1] != nullptr) {
                         for (std::size_t k = 0; k < grads.d_z.size(); ++k) {
                           (*slots[1])[k] += scale * grads.d_z[k];
                         }
                       }
                     });
}

TopoAELoss topoae_loss(Graph& g, const Tensor& x, const Tensor& x_hat, const Tensor& z, double lambda) {
  require(lambda >= 0.0, ErrorCode::InvalidArgument, "topological weight must be nonnegative");
  Tape& t = g.tape();
  TopoAELoss out;
  const Tensor rec = ops::mse(t, x_hat, x);
  const Tensor topo = topological_term(t, x, z);
  out.reconstruction = rec.item();
  out.topological = topo.item();
  out.total = lambda == 0.0 ? rec : ops::add(t, rec, ops::mul(t, topo, Tensor::scalar(lambda)));
  return out;
}

}  // namespace toporeform::models
