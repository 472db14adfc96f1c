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

#include "toporeform/attacks/attacks.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

#include "toporeform/autodiff/ops.hpp"
#include "toporeform/error.hpp"
#include "toporeform/models/classifier.hpp"
#include "toporeform/models/weight_file.hpp"
#include "toporeform/random.hpp"

namespace toporeform::attacks {

namespace {

constexpr std::uint64_t kRandomStartStream = 0x5354415254ull;

Tensor gradient_of_sum(const Tape& tape, const Tensor& output, const Tensor& wrt) {
  const std::vector<double> ones(output.size(), 1.0);
  return vjp(tape, output, ones).of(wrt);
}

ObjectiveGradient single_pass(const TargetFn& target, const Tensor& x, std::span<const int> labels,
                              const Objective& objective, bool surrogate, const NoiseDraw& draw) {
  Graph g(Graph::Mode::inference);
  Tensor point = x;
  if (surrogate && target.has_purifier()) {
    Graph forward_only(Graph::Mode::inference);
    point = target.purify(forward_only, x, draw).detached();
  }
  const Tensor tracked = g.input(point, true);
  const Tensor logits = surrogate ? target.classify(g, tracked) : target.logits(g, tracked, draw);
  const Tensor value = objective(g.tape(), logits, labels);
  Tensor grad = gradient_of_sum(g.tape(), value, tracked);
  require(grad.all_finite(), ErrorCode::NonFinite, "attack gradient contains NaN or Inf");
  return {std::move(grad), logits.detached()};
}

Objective cross_entropy_objective() {
  return [](Tape& tape, const Tensor& logits, std::span<const int> labels) {
    return ops::softmax_cross_entropy(tape, logits, labels);
  };
}

double sign(double v) noexcept { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

Tensor signed_step(const Tensor& current, const Tensor& origin, const Tensor& grad, double step, double eps) {
  Tensor moved(current.shape());
  auto out = moved.mutable_data();
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = current[k] + step * sign(grad[k]);
  }
  return project(moved, origin, eps);
}

std::vector<bool> misclassified(const TargetFn& target, const Tensor& x, std::span<const int> labels) {
  const auto pred = target.predict(x);
  std::vector<bool> out(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    out[i] = pred[i] != labels[i];
  }
  return out;
}

void check_batch(const Tensor& x, std::span<const int> labels) {
  require(x.rank() >= 1 && x.dim(0) == labels.size(), ErrorCode::LengthMismatch,
          "attack batch has " + std::to_string(x.rank() ? x.dim(0) : 0) + " images and " +
              std::to_string(labels.size()) + " labels");
}

}  // namespace

Tensor TargetFn::logits(Graph& g, const Tensor& x, const NoiseDraw& draw) const {
  return has_purifier() ? classify(g, purify(g, x, draw)) : classify(g, x);
}

std::vector<int> TargetFn::predict(const Tensor& x) const {
  Graph g(Graph::Mode::inference);
  return models::argmax_rows(logits(g, x, noise));
}

ObjectiveGradient objective_gradient(const TargetFn& target, const Tensor& x, std::span<const int> labels,
                                     const Objective& objective, const PolicyOptions& policy) {
  switch (policy.policy) {
    case GradientPolicy::exact:
    case GradientPolicy::bpda: {
      NoiseDraw draw = target.noise;
      if (draw.sample) {
        draw.seed = policy.seed;
      }
      return single_pass(target, x, labels, objective, policy.policy == GradientPolicy::bpda, draw);
    }
    case GradientPolicy::eot:
    case GradientPolicy::eot_bpda: {
      require(policy.samples >= 1, ErrorCode::InvalidArgument, "EOT needs at least one sample");
      const bool surrogate = policy.policy == GradientPolicy::eot_bpda;
      ObjectiveGradient total;
      for (std::size_t k = 0; k < policy.samples; ++k) {
        auto pass = single_pass(target, x, labels, objective, surrogate, {true, policy.seed, k});
        if (k == 0) {
          total = std::move(pass);
          continue;
        }
        auto acc = total.gradient.mutable_data();
        for (std::size_t e = 0; e < acc.size(); ++e) {
          acc[e] += pass.gradient[e];
        }
      }
      const double scale = 1.0 / static_cast<double>(policy.samples);
      for (double& v : total.gradient.mutable_data()) {
        v *= scale;
      }
      return total;
    }
  }
  fail(ErrorCode::InvalidArgument, "unknown gradient policy");
}

Tensor loss_gradient(const TargetFn& target, const Tensor& x, std::span<const int> labels,
                     const PolicyOptions& policy) {
  check_batch(x, labels);
  return objective_gradient(target, x, labels, cross_entropy_objective(), policy).gradient;
}

Tensor bpda_gradient(const TargetFn& target, const Tensor& x, std::span<const int> labels) {
  return loss_gradient(target, x, labels, {GradientPolicy::bpda, 1, target.noise.seed});
}

Tensor eot_gradient(const TargetFn& target, const Tensor& x, std::span<const int> labels, std::size_t samples,
                    std::uint64_t seed) {
  return loss_gradient(target, x, labels, {GradientPolicy::eot, samples, seed});
}

std::string_view attack_name(AttackKind kind) noexcept {
  switch (kind) {
    case AttackKind::fgsm:
      return "fgsm";
    case AttackKind::pgd:
      return "pgd";
    case AttackKind::cw:
      return "cw";
    case AttackKind::bpda_pgd:
      return "bpda_pgd";
    case AttackKind::eot_pgd:
      return "eot_pgd";
    case AttackKind::eot_bpda_pgd:
      return "eot_bpda_pgd";
  }
  return "unknown";
}

std::optional<AttackKind> attack_from_name(std::string_view name) noexcept {
  for (AttackKind k : {AttackKind::fgsm, AttackKind::pgd, AttackKind::cw, AttackKind::bpda_pgd, AttackKind::eot_pgd,
                       AttackKind::eot_bpda_pgd}) {
    if (attack_name(k) == name) {
      return k;
    }
  }
  return std::nullopt;
}

GradientPolicy AttackConfig::policy() const noexcept {
  switch (kind) {
    case AttackKind::bpda_pgd:
      return GradientPolicy::bpda;
    case AttackKind::eot_pgd:
      return GradientPolicy::eot;
    case AttackKind::eot_bpda_pgd:
      return GradientPolicy::eot_bpda;
    default:
      return GradientPolicy::exact;
  }
}

void validate(const AttackConfig& cfg) {
  require(cfg.epsilon >= 0.0 && std::isfinite(cfg.epsilon), ErrorCode::InvalidArgument, "epsilon must be >= 0");
  require(cfg.steps >= 1, ErrorCode::InvalidArgument, "steps must be >= 1");
  require(cfg.samples >= 1, ErrorCode::InvalidArgument, "EOT samples must be >= 1");
  require(cfg.kind != AttackKind::cw || cfg.c > 0.0, ErrorCode::InvalidArgument, "C&W needs c > 0");
  require(cfg.step_size() >= 0.0, ErrorCode::InvalidArgument, "step size must be >= 0");
  require(cfg.kappa >= 0.0 && cfg.cw_lr > 0.0, ErrorCode::InvalidArgument, "C&W needs kappa >= 0 and lr > 0");
}

double ball_upper(double x, double eps) noexcept {
  double hi = x + eps;
  while (hi - x > eps) {
    hi = std::nextafter(hi, -std::numeric_limits<double>::infinity());
  }
  return hi;
}

double ball_lower(double x, double eps) noexcept {
  double lo = x - eps;
  while (x - lo > eps) {
    lo = std::nextafter(lo, std::numeric_limits<double>::infinity());
  }
  return lo;
}

Tensor project(const Tensor& v, const Tensor& x, double eps) {
  require(v.shape() == x.shape(), ErrorCode::ShapeMismatch, "projection shapes differ");
  Tensor out(x.shape());
  auto data = out.mutable_data();
  for (std::size_t k = 0; k < data.size(); ++k) {
    const double inside = std::clamp(v[k], ball_lower(x[k], eps), ball_upper(x[k], eps));
    data[k] = std::clamp(inside, 0.0, 1.0);
  }
  return out;
}

Tensor fgsm(const TargetFn& target, const Tensor& x, std::span<const int> labels, double eps) {
  check_batch(x, labels);
  if (eps == 0.0) {
    return x.detached();
  }
  const Tensor grad = loss_gradient(target, x, labels);
  return signed_step(x, x, grad, eps, eps);
}

Tensor pgd(const TargetFn& target, const Tensor& x, std::span<const int> labels, const AttackConfig& cfg,
           const IterateObserver& observer) {
  validate(cfg);
  check_batch(x, labels);
  const double eps = cfg.epsilon;
  Tensor current = x.detached();
  if (cfg.random_start && eps > 0.0) {
    const Tensor offset = uniform_tensor(x.shape(), -eps, eps, cfg.seed, kRandomStartStream);
    Tensor start(x.shape());
    auto data = start.mutable_data();
    for (std::size_t k = 0; k < data.size(); ++k) {
      data[k] = x[k] + offset[k];
    }
    current = project(start, x, eps);
  }
  for (std::size_t step = 0; step < cfg.steps; ++step) {
    const PolicyOptions policy{cfg.policy(), cfg.samples, derive_seed(cfg.seed, step + 1)};
    const Tensor grad = loss_gradient(target, current, labels, policy);
    current = signed_step(current, x, grad, cfg.step_size(), eps);
    if (observer) {
      observer(step, current);
    }
  }
  return current;
}

Tensor margin_loss(Tape& tape, const Tensor& logits, std::span<const int> labels, double kappa) {
  require(logits.rank() == 2 && logits.dim(0) == labels.size() && logits.dim(1) >= 2, ErrorCode::ShapeMismatch,
          "margin loss expects [B,C] logits with B labels");
  const std::size_t rows = logits.dim(0), cols = logits.dim(1);
  std::vector<double> value(rows);
  std::vector<std::size_t> runner_up(rows);
  std::vector<int> y(labels.begin(), labels.end());
  for (std::size_t r = 0; r < rows; ++r) {
    require(y[r] >= 0 && static_cast<std::size_t>(y[r]) < cols, ErrorCode::LabelOutOfRange,
            "margin loss label out of range");
    std::size_t best = y[r] == 0 ? 1 : 0;
    for (std::size_t c = 0; c < cols; ++c) {
      if (static_cast<int>(c) != y[r] && logits[r * cols + c] > logits[r * cols + best]) {
        best = c;
      }
    }
    runner_up[r] = best;
    value[r] = std::max(logits[r * cols + y[r]] - logits[r * cols + best], -kappa);
  }
  const std::array<const Tensor*, 1> inputs{&logits};
  return ops::custom(tape, inputs, Tensor({rows}, value),
                     [value, runner_up, y, kappa, cols](std::span<const double> upstream, GradSlots slots) {
                       if (slots[0] == nullptr) {
                         return;
                       }
                       auto& g = *slots[0];
                       for (std::size_t r = 0; r < value.size(); ++r) {
                         if (value[r] > -kappa) {
                           g[r * cols + y[r]] += upstream[r];
                           g[r * cols + runner_up[r]] -= upstream[r];
                         }
                       }
                     });
}

CWResult cw_l2(const TargetFn& target, const Tensor& x, std::span<const int> labels, const AttackConfig& cfg) {
  require(cfg.c > 0.0, ErrorCode::InvalidArgument, "C&W needs c > 0");
  require(cfg.steps >= 1, ErrorCode::InvalidArgument, "steps must be >= 1");
  check_batch(x, labels);
  const std::size_t batch = x.dim(0);
  const std::size_t per = x.size() / std::max<std::size_t>(batch, 1);

  Tensor w(x.shape());
  {
    auto data = w.mutable_data();
    constexpr double limit = 1.0 - 1e-6;
    for (std::size_t k = 0; k < data.size(); ++k) {
      data[k] = std::atanh(std::clamp(2.0 * x[k] - 1.0, -limit, limit));
    }
  }
  Parameter param{"w", w};
  Parameter* params[] = {&param};
  AdamState state;
  const AdamOptions adam{.lr = cfg.cw_lr};

  CWResult result{x.detached(), std::vector<bool>(batch, false)};
  std::vector<double> best_distortion(batch, std::numeric_limits<double>::infinity());
  auto best = result.x_adv.mutable_data();

  auto image_of = [&](const Tensor& wt) {
    Tensor img(x.shape());
    auto data = img.mutable_data();
    for (std::size_t k = 0; k < data.size(); ++k) {
      data[k] = 0.5 * (std::tanh(wt[k]) + 1.0);
    }
    return img;
  };
  auto keep_best = [&](const Tensor& img, const std::vector<int>& pred) {
    for (std::size_t i = 0; i < batch; ++i) {
      if (pred[i] == labels[i]) {
        continue;
      }
      double dist = 0.0;
      for (std::size_t k = i * per; k < (i + 1) * per; ++k) {
        dist += (img[k] - x[k]) * (img[k] - x[k]);
      }
      if (dist < best_distortion[i]) {
        best_distortion[i] = dist;
        result.success[i] = true;
        std::copy_n(img.data().begin() + static_cast<std::ptrdiff_t>(i * per), per,
                    best.begin() + static_cast<std::ptrdiff_t>(i * per));
      }
    }
  };

  const double c = cfg.c, kappa = cfg.kappa;
  const Objective objective = [c, kappa](Tape& tape, const Tensor& logits, std::span<const int> y) {
    return ops::mul(tape, margin_loss(tape, logits, y, kappa), Tensor::scalar(c));
  };
  for (std::size_t step = 0; step < cfg.steps; ++step) {
    const Tensor img = image_of(param.value);
    const PolicyOptions policy{cfg.policy(), cfg.samples, derive_seed(cfg.seed, step + 1)};
    const auto og = objective_gradient(target, img, labels, objective, policy);
    keep_best(img, models::argmax_rows(og.logits));

    Tensor grad_w(x.shape());
    auto gw = grad_w.mutable_data();
    for (std::size_t k = 0; k < gw.size(); ++k) {
      const double th = std::tanh(param.value[k]);
      gw[k] = (2.0 * (img[k] - x[k]) + og.gradient[k]) * 0.5 * (1.0 - th * th);
    }
    const Tensor grads[] = {grad_w};
    adam_step(params, grads, state, adam);
  }
  const Tensor last = image_of(param.value);
  keep_best(last, target.predict(last));
  for (std::size_t i = 0; i < batch; ++i) {
    if (!result.success[i]) {
      std::copy_n(last.data().begin() + static_cast<std::ptrdiff_t>(i * per), per,
                  best.begin() + static_cast<std::ptrdiff_t>(i * per));
    }
  }
  return result;
}

AttackResult run_attack(const TargetFn& target, const Tensor& x, std::span<const int> labels,
                        const AttackConfig& cfg) {
  validate(cfg);
  check_batch(x, labels);
  AttackResult out;
  switch (cfg.kind) {
    case AttackKind::fgsm:
      out.x_adv = fgsm(target, x, labels, cfg.epsilon);
      break;
    case AttackKind::cw:
      out.x_adv = cw_l2(target, x, labels, cfg).x_adv;
      break;
    default:
      out.x_adv = pgd(target, x, labels, cfg);
      break;
  }
  out.success = misclassified(target, out.x_adv, labels);
  return out;
}

double attack_success_rate(std::span<const int> clean_pred, std::span<const int> adv_pred,
                           std::span<const int> labels) {
  require(clean_pred.size() == labels.size() && adv_pred.size() == labels.size(), ErrorCode::LengthMismatch,
          "attack_success_rate needs aligned arrays");
  std::size_t correct = 0, flipped = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (clean_pred[i] == labels[i]) {
      ++correct;
      flipped += adv_pred[i] != labels[i] ? 1 : 0;
    }
  }
  return correct == 0 ? 0.0 : static_cast<double>(flipped) / static_cast<double>(correct);
}

void save_adversarial(const std::filesystem::path& path, const AttackResult& result, const AttackConfig& cfg) {
  const models::NamedTensor tensors[] = {{"x_adv", result.x_adv}};
  models::save_tensors(path, tensors);
  nlohmann::ordered_json sidecar;
  sidecar["kind"] = attack_name(cfg.kind);
  sidecar["epsilon"] = cfg.epsilon;
  sidecar["alpha"] = cfg.step_size();
  sidecar["steps"] = cfg.steps;
  sidecar["c"] = cfg.c;
  sidecar["kappa"] = cfg.kappa;
  sidecar["cw_lr"] = cfg.cw_lr;
  sidecar["samples"] = cfg.samples;
  sidecar["seed"] = cfg.seed;
  sidecar["random_start"] = cfg.random_start;
  sidecar["success"] = result.success;
  std::ofstream out(path.string() + ".json");
  require(static_cast<bool>(out), ErrorCode::IoError, "cannot write attack sidecar for " + path.string());
  out << sidecar.dump(2) << '\n';
}

}  // namespace toporeform::attacks
