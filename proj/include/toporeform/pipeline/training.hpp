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

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "toporeform/dataio/dataset.hpp"
#include "toporeform/models/classifier.hpp"
#include "toporeform/models/reformer.hpp"
#include "toporeform/models/topoae.hpp"
#include "toporeform/pipeline/config.hpp"

namespace toporeform::pipeline {

/// Batch-mean losses of one epoch. `total` equals the weighted sum of the
/// components.
struct EpochRecord {
  std::size_t epoch = 0;
  std::string phase;
  double total = 0.0;
  std::vector<std::pair<std::string, double>> components;
  std::vector<double> weights;
  double wall_seconds = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> records;

  /// "epoch,phase,total,<components>"; wall time is left out so reruns
  /// produce identical files.
  void write_csv(std::ostream& out) const;
};

/// Each consumer of the master seed draws from its own derived stream.
enum class SeedPurpose : std::uint64_t {
  classifier_init = 1,
  classifier_batches,
  topoae_init,
  topoae_batches,
  reformer_init,
  aux_init,
  reformer_batches,
  reformer_noise,
};

std::uint64_t phase_seed(const PipelineConfig& cfg, SeedPurpose purpose) noexcept;

struct ClassifierRun {
  models::ClassifierModel model;
  TrainHistory history;
};

/// Optional per-step hook, called with the batch loss before the update.
using StepHook = std::function<void(std::size_t step, double loss)>;

/// Adam on batch-mean cross-entropy. The returned model is frozen.
ClassifierRun train_classifier(const dataio::Dataset& data, const PipelineConfig& cfg, const StepHook& hook = {});

struct TopoAERun {
  models::TopoAEModel model;
  TrainHistory history;
};

/// Reconstruction plus weighted topological term, pairings recomputed per
/// batch. The returned model is frozen.
TopoAERun train_topoae(const dataio::Dataset& data, const PipelineConfig& cfg);

struct ReformerRun {
  models::ReformerVAE vae;
  std::optional<models::AuxModule> aux;
  TrainHistory history;
};

struct ReformerOptions {
  std::size_t warmup_epochs = 0;
  /// Without the auxiliary module the bottleneck receives zeros.
  bool use_aux = true;
  /// Called after every epoch with the models in their current state.
  std::function<void(std::size_t epoch, const ReformerRun&)> epoch_hook;
};

/// During the first `warmup_epochs` epochs the VAE encoder (and, if so
/// configured, the decoder) is frozen so gradients reach only the auxiliary
/// path; afterwards everything trains jointly. Requires frozen upstream
/// models (FrozenDependencyMissing). Returned models are frozen.
ReformerRun train_reformer_freezeflow(const dataio::Dataset& data, const models::TopoAEModel& topoae,
                                      const models::ClassifierModel& classifier, const PipelineConfig& cfg,
                                      const ReformerOptions& options);

}  // namespace toporeform::pipeline
