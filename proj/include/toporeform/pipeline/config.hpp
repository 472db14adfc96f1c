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

#include "toporeform/models/classifier.hpp"
#include "toporeform/models/reformer.hpp"
#include "toporeform/models/topoae.hpp"

namespace toporeform::pipeline {

enum class MseTarget { purified, original };
enum class InferenceNoise { zero, sample };
enum class WarmupFreeze { encoder, encoder_and_decoder };

struct PipelineConfig {
  models::ClassifierSpec classifier;
  models::TopoAESpec topoae;
  models::ReformerSpec reformer;
  std::size_t aux_hidden = 32;
  models::LossWeights weights;

  std::size_t classifier_epochs = 10;
  std::size_t topoae_epochs = 20;
  std::size_t reformer_epochs = 10;
  std::size_t warmup_epochs = 3;
  std::size_t batch_size = 128;
  double lr = 1e-3;
  std::uint64_t seed = 0;

  MseTarget mse_target = MseTarget::purified;
  InferenceNoise inference_noise = InferenceNoise::zero;
  WarmupFreeze warmup_freeze = WarmupFreeze::encoder;

  models::AuxSpec aux_spec() const { return {topoae.latent, aux_hidden, reformer.aux}; }
};

/// InvalidArgument when an invariant does not hold.
void validate(const PipelineConfig& cfg);

}  // namespace toporeform::pipeline
