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

#include "toporeform/pipeline/inference.hpp"

#include <algorithm>
#include <numeric>

#include "toporeform/dataio/dataset.hpp"
#include "toporeform/error.hpp"
#include "toporeform/random.hpp"

namespace toporeform::pipeline {

Tensor draw_noise(std::size_t batch, std::size_t dims, const attacks::NoiseDraw& noise) {
  if (!noise.sample) {
    return Tensor({batch, dims}, 0.0);
  }
  return normal_tensor({batch, dims}, noise.seed, noise.stream);
}

Tensor purify(Graph& g, const Tensor& x, const models::TopoAEModel& topoae, const models::ReformerVAE& vae,
              const models::AuxModule* aux, const attacks::NoiseDraw& noise) {
  const Tensor z = topoae.encode(g, x);
  const Tensor x_pure = topoae.decode(g, z);
  const Tensor eps = draw_noise(x.dim(0), vae.spec().latent, noise);
  return models::reformer_forward(g, vae, aux, x_pure, z, eps).x_ref;
}

std::vector<int> predict(const Tensor& x, const ModelBundle& bundle, const attacks::NoiseDraw& noise,
                         std::size_t chunk) {
  require(bundle.classifier.has_value(), ErrorCode::MissingModel, "predict needs a classifier");
  require(!(bundle.vae || bundle.aux) || bundle.topoae, ErrorCode::MissingModel,
          "a reformer in the bundle needs the TopoAE in front of it");
  require(!bundle.aux || bundle.vae, ErrorCode::MissingModel, "an auxiliary module needs the reformer VAE");
  models::check_image_batch(x);
  const std::size_t n = x.dim(0);
  chunk = std::max<std::size_t>(chunk, 1);
  std::vector<int> out;
  out.reserve(n);
  dataio::Dataset all{x, std::vector<int>(n, 0), 1};
  for (std::size_t start = 0; start < n; start += chunk) {
    std::vector<std::size_t> idx(std::min(chunk, n - start));
    std::iota(idx.begin(), idx.end(), start);
    const Tensor part = all.subset(idx).images;
    Graph g(Graph::Mode::inference);
    Tensor u = part;
    if (bundle.vae) {
      u = purify(g, part, *bundle.topoae, *bundle.vae, bundle.aux ? &*bundle.aux : nullptr, noise);
    } else if (bundle.topoae) {
      u = bundle.topoae->decode(g, bundle.topoae->encode(g, part));
    }
    const auto labels = models::argmax_rows(bundle.classifier->forward(g, u));
    out.insert(out.end(), labels.begin(), labels.end());
  }
  return out;
}

std::string_view stage_name(Stage stage) noexcept {
  switch (stage) {
    case Stage::no_defense:
      return "No Defense";
    case Stage::topoae:
      return "+ TopoAE";
    case Stage::reformer:
      return "+ Reformer";
    case Stage::aux:
      return "+ Aux";
    case Stage::warmup:
      return "+ Warmup";
  }
  return "unknown";
}

std::optional<Stage> stage_from_name(std::string_view name) noexcept {
  static constexpr std::pair<std::string_view, Stage> kKeys[] = {
      {"no_defense", Stage::no_defense}, {"topoae", Stage::topoae}, {"reformer", Stage::reformer},
      {"aux", Stage::aux},               {"warmup", Stage::warmup},
  };
  for (const auto& [key, stage] : kKeys) {
    if (name == key || name == stage_name(stage)) {
      return stage;
    }
  }
  return std::nullopt;
}

ModelBundle stage_bundle(const StageModels& m, Stage stage) {
  auto need = [&](bool present) {
    require(present, ErrorCode::StageMissing, std::string("stage ") + std::string(stage_name(stage)) + " is not trained");
  };
  ModelBundle b;
  need(m.classifier.has_value());
  b.classifier = m.classifier;
  if (stage == Stage::no_defense) {
    return b;
  }
  need(m.topoae.has_value());
  b.topoae = m.topoae;
  switch (stage) {
    case Stage::reformer:
      need(m.plain_vae.has_value());
      b.vae = m.plain_vae;
      break;
    case Stage::aux:
      need(m.aux_vae.has_value() && m.aux_module.has_value());
      b.vae = m.aux_vae;
      b.aux = m.aux_module;
      break;
    case Stage::warmup:
      need(m.warmup_vae.has_value() && m.warmup_aux.has_value());
      b.vae = m.warmup_vae;
      b.aux = m.warmup_aux;
      break;
    default:
      break;
  }
  return b;
}

attacks::TargetFn stage_target(const StageModels& m, Stage stage, const attacks::NoiseDraw& noise) {
  // Validates presence; the lambdas below point into `m`.
  (void)stage_bundle(m, stage);
  attacks::TargetFn target;
  const models::ClassifierModel* classifier = &*m.classifier;
  target.classify = [classifier](Graph& g, const Tensor& x) { return classifier->forward(g, x); };
  target.noise = noise;
  const models::TopoAEModel* topoae = m.topoae ? &*m.topoae : nullptr;
  const models::ReformerVAE* vae = nullptr;
  const models::AuxModule* aux = nullptr;
  switch (stage) {
    case Stage::no_defense:
      return target;
    case Stage::topoae:
      target.purify = [topoae](Graph& g, const Tensor& x, const attacks::NoiseDraw&) {
        return topoae->decode(g, topoae->encode(g, x));
      };
      return target;
    case Stage::reformer:
      vae = &*m.plain_vae;
      break;
    case Stage::aux:
      vae = &*m.aux_vae;
      aux = &*m.aux_module;
      break;
    case Stage::warmup:
      vae = &*m.warmup_vae;
      aux = &*m.warmup_aux;
      break;
  }
  target.purify = [topoae, vae, aux](Graph& g, const Tensor& x, const attacks::NoiseDraw& draw) {
    return purify(g, x, *topoae, *vae, aux, draw);
  };
  return target;
}

}  // namespace toporeform::pipeline
