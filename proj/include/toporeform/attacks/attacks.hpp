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
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "toporeform/autodiff/graph.hpp"

namespace toporeform::attacks {

/// Selects reparameterization noise for one pass through a stochastic
/// purifier. `sample == false` means zero noise.
struct NoiseDraw {
  bool sample = false;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

using ClassifyFn = std::function<Tensor(Graph&, const Tensor&)>;
using PurifyFn = std::function<Tensor(Graph&, const Tensor&, const NoiseDraw&)>;

/// x -> logits, either a bare classifier or classifier after a purifier.
struct TargetFn {
  ClassifyFn classify;
  /// Empty for the bare classifier.
  PurifyFn purify;
  /// Noise used by plain forward passes and predictions.
  NoiseDraw noise;

  bool has_purifier() const noexcept { return static_cast<bool>(purify); }
  Tensor logits(Graph& g, const Tensor& x, const NoiseDraw& draw) const;
  std::vector<int> predict(const Tensor& x) const;
};

enum class GradientPolicy {
  exact,     // differentiate the whole composition
  bpda,      // purifier treated as identity on the way back
  eot,       // mean of exact gradients over sampled noise
  eot_bpda,  // mean of BPDA gradients over sampled noise
};

struct PolicyOptions {
  GradientPolicy policy = GradientPolicy::exact;
  std::size_t samples = 1;
  std::uint64_t seed = 0;
};

/// Maps logits and labels to a scalar to be maximized.
using Objective = std::function<Tensor(Tape&, const Tensor& logits, std::span<const int> labels)>;

struct ObjectiveGradient {
  Tensor gradient;  // d objective / d x, shape of x
  Tensor logits;    // forward logits of the first pass
};

ObjectiveGradient objective_gradient(const TargetFn& target, const Tensor& x, std::span<const int> labels,
                                     const Objective& objective, const PolicyOptions& policy);

/// Gradient of the batch-mean cross-entropy.
Tensor loss_gradient(const TargetFn& target, const Tensor& x, std::span<const int> labels,
                     const PolicyOptions& policy = {});

/// Forward through the true purifier, backward through the classifier only:
/// the classifier's cross-entropy gradient at the purified point.
Tensor bpda_gradient(const TargetFn& target, const Tensor& x, std::span<const int> labels);

/// Mean of K exact gradients; pass k samples noise stream (seed, k).
Tensor eot_gradient(const TargetFn& target, const Tensor& x, std::span<const int> labels, std::size_t samples,
                    std::uint64_t seed);

enum class AttackKind { fgsm, pgd, cw, bpda_pgd, eot_pgd, eot_bpda_pgd };

std::string_view attack_name(AttackKind kind) noexcept;
std::optional<AttackKind> attack_from_name(std::string_view name) noexcept;

struct AttackConfig {
  AttackKind kind = AttackKind::pgd;
  double epsilon = 0.1;
  /// Step size; unset means epsilon / 4.
  std::optional<double> alpha;
  std::size_t steps = 40;
  double c = 10.0;
  double kappa = 0.0;
  double cw_lr = 0.01;
  std::size_t samples = 8;
  std::uint64_t seed = 0;
  bool random_start = true;

  double step_size() const noexcept { return alpha.value_or(epsilon / 4.0); }
  GradientPolicy policy() const noexcept;
};

/// Throws InvalidArgument when an invariant is broken.
void validate(const AttackConfig& cfg);

/// Largest value reachable from x within the L-inf ball, rounded so that
/// (hi - x) <= eps holds in floating point; likewise for the lower bound.
double ball_upper(double x, double eps) noexcept;
double ball_lower(double x, double eps) noexcept;

/// Clamps v into the eps-ball around x and then into [0, 1].
Tensor project(const Tensor& v, const Tensor& x, double eps);

Tensor fgsm(const TargetFn& target, const Tensor& x, std::span<const int> labels, double eps);

/// Called with (step index, iterate) after every projection.
using IterateObserver = std::function<void(std::size_t, const Tensor&)>;

Tensor pgd(const TargetFn& target, const Tensor& x, std::span<const int> labels, const AttackConfig& cfg,
           const IterateObserver& observer = {});

struct CWResult {
  Tensor x_adv;
  std::vector<bool> success;
};

/// Untargeted C&W L2 in tanh space, minimizing
///   ||x_adv - x||^2 + c * max(Z_y - max_{i != y} Z_i, -kappa)
/// with Adam. Each example keeps its lowest-distortion misclassified
/// iterate, or the final iterate when none succeeded.
CWResult cw_l2(const TargetFn& target, const Tensor& x, std::span<const int> labels, const AttackConfig& cfg);

/// Per example: max(Z_y - max_{i != y} Z_i, -kappa), returned as [B].
Tensor margin_loss(Tape& tape, const Tensor& logits, std::span<const int> labels, double kappa);

struct AttackResult {
  Tensor x_adv;
  std::vector<bool> success;
};

/// Dispatches on cfg.kind; success flags mark examples whose prediction
/// differs from the label after the attack.
AttackResult run_attack(const TargetFn& target, const Tensor& x, std::span<const int> labels,
                        const AttackConfig& cfg);

/// Fraction of clean-correct samples that the attack flips; 0 when none
/// were correct.
double attack_success_rate(std::span<const int> clean_pred, std::span<const int> adv_pred,
                           std::span<const int> labels);

/// Writes x_adv in the weight-file container and `<path>.json` with the
/// attack configuration and per-example success flags.
void save_adversarial(const std::filesystem::path& path, const AttackResult& result, const AttackConfig& cfg);

}  // namespace toporeform::attacks
