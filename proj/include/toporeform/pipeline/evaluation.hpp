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
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "toporeform/attacks/attacks.hpp"
#include "toporeform/dataio/dataset.hpp"
#include "toporeform/pipeline/inference.hpp"

namespace toporeform::pipeline {

struct AttackRow {
  attacks::AttackConfig attack;
  double accuracy = 0.0;
  double f1_macro = 0.0;
  double precision_macro = 0.0;
  double asr = 0.0;
};

struct StageRows {
  std::string name;
  std::vector<AttackRow> attacks;
};

struct EvalReport {
  std::string dataset;
  std::uint64_t seed = 0;
  std::vector<StageRows> stages;

  nlohmann::ordered_json to_json() const;
  /// Header: stage,kind,epsilon,alpha,steps,c,kappa,cw_lr,samples,seed,
  /// random_start,accuracy,f1_macro,precision_macro,asr
  void write_csv(std::ostream& out) const;
};

nlohmann::ordered_json attack_params(const attacks::AttackConfig& cfg);

struct EvalOptions {
  std::string dataset = "mnist";
  std::uint64_t seed = 0;
  /// Images attacked per call.
  std::size_t chunk = 100;
  bool macro = true;
  /// Reparameterization noise used when scoring predictions.
  attacks::NoiseDraw noise;
};

/// Crafts adversarial examples against one target (white-box) and scores
/// the target's predictions on them.
/// When `adversarial` is given it receives the crafted batch for the whole
/// dataset, in order.
AttackRow evaluate_attack(const attacks::TargetFn& target, const dataio::Dataset& data,
                          const attacks::AttackConfig& attack, const EvalOptions& options,
                          attacks::AttackResult* adversarial = nullptr);

/// Every (stage, attack) pair, stages in the given order.
EvalReport ablation_run(const dataio::Dataset& data, std::span<const attacks::AttackConfig> attack_list,
                        const StageModels& models, std::span<const Stage> stages, const EvalOptions& options);

}  // namespace toporeform::pipeline
