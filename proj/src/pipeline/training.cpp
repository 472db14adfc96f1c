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

#include "toporeform/pipeline/training.hpp"

#include <chrono>
#include <ostream>

#include "toporeform/autodiff/ops.hpp"
#include "toporeform/dataio/batching.hpp"
#include "toporeform/error.hpp"
#include "toporeform/models/weight_file.hpp"
#include "toporeform/random.hpp"

namespace toporeform::pipeline {

namespace {

class EpochAccumulator {
 public:
  EpochAccumulator(std::size_t epoch, std::string phase, std::vector<std::string> names, std::vector<double> weights)
      : start_(std::chrono::steady_clock::now()), names_(std::move(names)), sums_(names_.size(), 0.0) {
    record_.epoch = epoch;
    record_.phase = std::move(phase);
    record_.weights = std::move(weights);
  }

  void add(std::initializer_list<double> values) {
    std::size_t k = 0;
    for (double v : values) {
      sums_[k++] += v;
    }
    ++batches_;
  }

  EpochRecord finish() {
    const double n = static_cast<double>(std::max<std::size_t>(batches_, 1));
    for (std::size_t k = 0; k < names_.size(); ++k) {
      const double mean = sums_[k] / n;
      record_.components.emplace_back(names_[k], mean);
      record_.total += record_.weights[k] * mean;
    }
    record_.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    return record_;
  }

 private:
  std::chrono::steady_clock::time_point start_;
  std::vector<std::string> names_;
  std::vector<double> sums_;
  std::size_t batches_ = 0;
  EpochRecord record_;
};

void require_trainable(const dataio::Dataset& data) {
  require(data.size() >= 2, ErrorCode::EmptyDataset, "training needs at least two samples");
}

bool frozen(const std::vector<const Parameter*>& params) {
  return std::all_of(params.begin(), params.end(), [](const Parameter* p) { return p->frozen; });
}

void step(Graph& g, const Tensor& loss, const models::ParameterList& params, AdamState& state, double lr) {
  const Gradients grads = backward(g.tape(), loss);
  const auto per_param = g.parameter_gradients(params, grads);
  adam_step(params, per_param, state, {.lr = lr});
}

}  // namespace

std::uint64_t phase_seed(const PipelineConfig& cfg, SeedPurpose purpose) noexcept {
  return derive_seed(cfg.seed, static_cast<std::uint64_t>(purpose));
}

void TrainHistory::write_csv(std::ostream& out) const {
  out << "epoch,phase,total";
  if (!records.empty()) {
    for (const auto& [name, value] : records.front().components) {
      out << ',' << name;
    }
  }
  out << '\n';
  const auto old = out.precision(17);
  for (const EpochRecord& r : records) {
    out << r.epoch << ',' << r.phase << ',' << r.total;
    for (const auto& [name, value] : r.components) {
      out << ',' << value;
    }
    out << '\n';
  }
  out.precision(old);
}

ClassifierRun train_classifier(const dataio::Dataset& data, const PipelineConfig& cfg, const StepHook& hook) {
  validate(cfg);
  require_trainable(data);
  models::ClassifierSpec spec = cfg.classifier;
  spec.classes = data.class_count;
  ClassifierRun run{models::ClassifierModel(spec, phase_seed(cfg, SeedPurpose::classifier_init)), {}};
  auto params = run.model.parameters();
  AdamState state;
  const dataio::BatchPlan plan{phase_seed(cfg, SeedPurpose::classifier_batches), cfg.batch_size};
  std::size_t global_step = 0;
  for (std::size_t epoch = 0; epoch < cfg.classifier_epochs; ++epoch) {
    EpochAccumulator acc(epoch + 1, "classifier", {"cross_entropy"}, {1.0});
    for (const dataio::Batch& batch : dataio::batches(data, plan, epoch)) {
      Graph g;
      const Tensor logits = run.model.forward(g, batch.images);
      const Tensor loss = ops::softmax_cross_entropy(g.tape(), logits, batch.labels);
      if (hook) {
        hook(global_step, loss.item());
      }
      acc.add({loss.item()});
      step(g, loss, params, state, cfg.lr);
      ++global_step;
    }
    run.history.records.push_back(acc.finish());
  }
  models::round_to_storage(params);
  models::set_frozen(params, true);
  return run;
}

TopoAERun train_topoae(const dataio::Dataset& data, const PipelineConfig& cfg) {
  validate(cfg);
  require_trainable(data);
  TopoAERun run{models::TopoAEModel(cfg.topoae, phase_seed(cfg, SeedPurpose::topoae_init)), {}};
  auto params = run.model.parameters();
  AdamState state;
  const dataio::BatchPlan plan{phase_seed(cfg, SeedPurpose::topoae_batches), cfg.batch_size};
  const double lambda = cfg.topoae.lambda;
  for (std::size_t epoch = 0; epoch < cfg.topoae_epochs; ++epoch) {
    EpochAccumulator acc(epoch + 1, "topoae", {"reconstruction", "topological"}, {1.0, lambda});
    for (const dataio::Batch& batch : dataio::batches(data, plan, epoch)) {
      Graph g;
      const auto out = models::topoae_forward(g, run.model, batch.images);
      const auto loss = models::topoae_loss(g, batch.images, out.x_hat, out.z, lambda);
      acc.add({loss.reconstruction, loss.topological});
      step(g, loss.total, params, state, cfg.lr);
    }
    run.history.records.push_back(acc.finish());
  }
  models::round_to_storage(params);
  models::set_frozen(params, true);
  return run;
}

ReformerRun train_reformer_freezeflow(const dataio::Dataset& data, const models::TopoAEModel& topoae,
                                      const models::ClassifierModel& classifier, const PipelineConfig& cfg,
                                      const ReformerOptions& options) {
  validate(cfg);
  require_trainable(data);
  require(frozen(topoae.parameters()) && frozen(classifier.parameters()), ErrorCode::FrozenDependencyMissing,
          "reformer training needs a frozen TopoAE and classifier");
  require(options.warmup_epochs <= cfg.reformer_epochs, ErrorCode::InvalidArgument,
          "warmup_epochs cannot exceed reformer_epochs");
  require(topoae.spec().latent == cfg.topoae.latent, ErrorCode::ShapeMismatch,
          "TopoAE latent size differs from the configuration");

  ReformerRun run{models::ReformerVAE(cfg.reformer, phase_seed(cfg, SeedPurpose::reformer_init)), std::nullopt, {}};
  if (options.use_aux) {
    run.aux.emplace(cfg.aux_spec(), phase_seed(cfg, SeedPurpose::aux_init));
  }
  models::ParameterList params = run.vae.parameters();
  if (run.aux) {
    for (Parameter* p : run.aux->parameters()) {
      params.push_back(p);
    }
  }
  AdamState state;
  const dataio::BatchPlan plan{phase_seed(cfg, SeedPurpose::reformer_batches), cfg.batch_size};
  const std::uint64_t noise_seed = phase_seed(cfg, SeedPurpose::reformer_noise);
  const auto& w = cfg.weights;

  for (std::size_t epoch = 0; epoch < cfg.reformer_epochs; ++epoch) {
    const bool warmup = epoch < options.warmup_epochs;
    run.vae.freeze_encoder(warmup);
    run.vae.freeze_decoder(warmup && cfg.warmup_freeze == WarmupFreeze::encoder_and_decoder);
    EpochAccumulator acc(epoch + 1, warmup ? "warmup" : "joint", {"mse", "cross_entropy", "kl"},
                         {w.reconstruction, w.classification, w.kl});
    const auto epoch_batches = dataio::batches(data, plan, epoch);
    for (std::size_t b = 0; b < epoch_batches.size(); ++b) {
      const dataio::Batch batch = epoch_batches.at(b);
      Graph g;
      const Tensor z = topoae.encode(g, batch.images);
      const Tensor x_pure = topoae.decode(g, z);
      const Tensor noise = normal_tensor({batch.labels.size(), cfg.reformer.latent}, derive_seed(noise_seed, epoch), b);
      const auto out =
          models::reformer_forward(g, run.vae, run.aux ? &*run.aux : nullptr, x_pure, z, noise);
      const Tensor logits = classifier.forward(g, out.x_ref);
      const Tensor& target = cfg.mse_target == MseTarget::purified ? x_pure : batch.images;
      const auto loss = models::reformer_loss(g, out.x_ref, target, logits, batch.labels, out.mu, out.logvar, w);
      acc.add({loss.reconstruction, loss.classification, loss.kl});
      step(g, loss.total, params, state, cfg.lr);
    }
    run.history.records.push_back(acc.finish());
    if (options.epoch_hook) {
      options.epoch_hook(epoch + 1, run);
    }
  }
  models::round_to_storage(params);
  models::set_frozen(params, true);
  return run;
}

}  // namespace toporeform::pipeline
