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

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "toporeform/attacks/attacks.hpp"
#include "toporeform/models/classifier.hpp"
#include "toporeform/models/reformer.hpp"
#include "toporeform/models/topoae.hpp"

namespace toporeform::pipeline {

/// x -> topoae reconstruction -> reformer, returning the reformed image.
/// `aux` may be null for a zero auxiliary vector.
Tensor purify(Graph& g, const Tensor& x, const models::TopoAEModel& topoae, const models::ReformerVAE& vae,
              const models::AuxModule* aux, const attacks::NoiseDraw& noise);

/// Reparameterization noise for a batch: zeros unless `noise.sample`.
Tensor draw_noise(std::size_t batch, std::size_t dims, const attacks::NoiseDraw& noise);

struct ModelBundle {
  std::optional<models::ClassifierModel> classifier;
  std::optional<models::TopoAEModel> topoae;
  std::optional<models::ReformerVAE> vae;
  std::optional<models::AuxModule> aux;
};

/// Argmax of classifier(purify(x)), ties to the lowest class; MissingModel
/// when the bundle is incomplete. Evaluated in chunks of `chunk` images.
std::vector<int> predict(const Tensor& x, const ModelBundle& bundle, const attacks::NoiseDraw& noise = {},
                         std::size_t chunk = 256);

enum class Stage { no_defense, topoae, reformer, aux, warmup };

inline constexpr Stage kAllStages[] = {Stage::no_defense, Stage::topoae, Stage::reformer, Stage::aux,
                                       Stage::warmup};

std::string_view stage_name(Stage stage) noexcept;
std::optional<Stage> stage_from_name(std::string_view name) noexcept;

/// Models behind the ablation stages. The three reformer variants are
/// trained separately; the classifier and TopoAE are shared.
struct StageModels {
  std::optional<models::ClassifierModel> classifier;
  std::optional<models::TopoAEModel> topoae;
  /// Reformer trained with a zero auxiliary vector.
  std::optional<models::ReformerVAE> plain_vae;
  /// Reformer and aux trained without warmup.
  std::optional<models::ReformerVAE> aux_vae;
  std::optional<models::AuxModule> aux_module;
  /// Reformer and aux trained with warmup.
  std::optional<models::ReformerVAE> warmup_vae;
  std::optional<models::AuxModule> warmup_aux;
};

/// The differentiable x -> logits composition of one stage. The referenced
/// models must outlive the returned target. StageMissing when a model the
/// stage needs is absent.
attacks::TargetFn stage_target(const StageModels& models, Stage stage, const attacks::NoiseDraw& noise = {});

ModelBundle stage_bundle(const StageModels& models, Stage stage);

}  // namespace toporeform::pipeline
