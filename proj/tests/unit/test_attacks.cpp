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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "toporeform/attacks/attacks.hpp"
#include "toporeform/error.hpp"
#include "toporeform/models/classifier.hpp"
#include "toporeform/models/reformer.hpp"
#include "toporeform/models/topoae.hpp"
#include "toporeform/models/weight_file.hpp"
#include "toporeform/pipeline/inference.hpp"
#include "toporeform/random.hpp"

using namespace toporeform;
using namespace toporeform::attacks;

namespace {

struct Fixture {
  models::ClassifierModel classifier{models::ClassifierSpec{{4, 4, 8, 8}, 3, {16}, 10}, 21};
  models::TopoAEModel topoae{models::TopoAESpec{}, 22};
  models::ReformerVAE vae{models::ReformerSpec{}, 23};
  models::AuxModule aux{models::AuxSpec{}, 24};
  Tensor x = uniform_tensor({4, 1, 28, 28}, 0.0, 1.0, 25, 0);
  std::vector<int> y{0, 3, 5, 9};

  TargetFn bare() const {
    TargetFn t;
    t.classify = [this](Graph& g, const Tensor& u) { return classifier.forward(g, u); };
    return t;
  }

  TargetFn reconstructing() const {
    TargetFn t = bare();
    t.purify = [this](Graph& g, const Tensor& u, const NoiseDraw&) { return topoae.decode(g, topoae.encode(g, u)); };
    return t;
  }

  TargetFn stochastic() const {
    TargetFn t = bare();
    t.purify = [this](Graph& g, const Tensor& u, const NoiseDraw& draw) {
      return pipeline::purify(g, u, topoae, vae, &aux, draw);
    };
    t.noise = {true, 0, 0};
    return t;
  }
};

double linf(const Tensor& a, const Tensor& b) {
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    worst = std::max(worst, std::abs(a[k] - b[k]));
  }
  return worst;
}

void expect_in_box(const Tensor& adv, const Tensor& x, double eps) {
  for (std::size_t k = 0; k < adv.size(); ++k) {
    ASSERT_GE(adv[k], 0.0);
    ASSERT_LE(adv[k], 1.0);
    ASSERT_LE(adv[k] - x[k], eps);
    ASSERT_LE(x[k] - adv[k], eps);
  }
}

template <typename Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected a typed error";
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(Projection, BallBoundsHoldInFloatingPoint) {
  CounterStream rng(3, 0);
  for (std::uint64_t k = 0; k < 100000; ++k) {
    const double x = rng.uniform(2 * k);
    const double eps = rng.uniform(2 * k + 1) * 0.5;
    ASSERT_LE(ball_upper(x, eps) - x, eps);
    ASSERT_LE(x - ball_lower(x, eps), eps);
    ASSERT_GE(ball_upper(x, eps), x);
  }
}

TEST(Fgsm, ZeroBudgetReturnsInput) {
  const Fixture f;
  EXPECT_TRUE(identical(fgsm(f.bare(), f.x, f.y, 0.0), f.x));
}

TEST(Fgsm, StaysInBoxAndMovesEveryPixelWithGradient) {
  const Fixture f;
  const Tensor adv = fgsm(f.bare(), f.x, f.y, 0.3);
  expect_in_box(adv, f.x, 0.3);
  EXPECT_GT(linf(adv, f.x), 0.29);
}

TEST(Pgd, OneFullStepWithoutRandomStartIsFgsm) {
  const Fixture f;
  for (double eps : {0.01, 0.1, 0.3}) {
    AttackConfig cfg{.kind = AttackKind::pgd, .epsilon = eps, .alpha = eps, .steps = 1, .random_start = false};
    EXPECT_TRUE(identical(pgd(f.bare(), f.x, f.y, cfg), fgsm(f.bare(), f.x, f.y, eps))) << eps;
  }
}

TEST(Pgd, EveryIterateIsInsideTheBall) {
  const Fixture f;
  const AttackConfig cfg{.kind = AttackKind::pgd, .epsilon = 0.05, .steps = 10, .seed = 4};
  std::size_t seen = 0;
  pgd(f.reconstructing(), f.x, f.y, cfg, [&](std::size_t step, const Tensor& iterate) {
    EXPECT_EQ(step, seen++);
    expect_in_box(iterate, f.x, 0.05);
  });
  EXPECT_EQ(seen, 10u);
}

TEST(Pgd, SeededRunsAreBitReproducible) {
  const Fixture f;
  for (AttackKind kind : {AttackKind::pgd, AttackKind::eot_pgd, AttackKind::eot_bpda_pgd, AttackKind::bpda_pgd}) {
    AttackConfig cfg{.kind = kind, .epsilon = 0.1, .steps = 3, .samples = 2, .seed = 8};
    const Tensor a = pgd(f.stochastic(), f.x, f.y, cfg);
    const Tensor b = pgd(f.stochastic(), f.x, f.y, cfg);
    EXPECT_TRUE(identical(a, b)) << attack_name(kind);
    cfg.seed = 9;
    EXPECT_FALSE(identical(a, pgd(f.stochastic(), f.x, f.y, cfg))) << attack_name(kind);
  }
}

TEST(MarginLoss, ZeroKappaHandValues) {
  const Tensor logits({2, 3}, {2.0, 5.0, 1.0, 0.0, 1.0, 4.0});
  const std::vector<int> y{1, 0};
  Tape tape;
  const Tensor m = margin_loss(tape, tape.leaf(logits), y, 0.0);
  // Row 0: 5 - max(2, 1) = 3. Row 1: 0 - 4 = -4, clipped to 0.
  EXPECT_EQ(m[0], 3.0);
  EXPECT_EQ(m[1], 0.0);
}

TEST(MarginLoss, ClipsAtNegativeKappa) {
  const Tensor logits({2, 3}, {2.0, 5.0, 1.0, 0.0, 1.0, 4.0});
  const std::vector<int> y{1, 0};
  Tape tape;
  const Tensor tracked = tape.leaf(logits);
  const Tensor m = margin_loss(tape, tracked, y, 1.0);
  // Row 0: 5 - 2 = 3. Row 1: 0 - 4 = -4 clipped to -1.
  EXPECT_EQ(m[0], 3.0);
  EXPECT_EQ(m[1], -1.0);
  const std::vector<double> ones{1.0, 1.0};
  const Tensor g = vjp(tape, m, ones).of(tracked);
  EXPECT_EQ(std::vector<double>(g.data().begin(), g.data().end()),
            (std::vector<double>{-1.0, 1.0, 0.0, 0.0, 0.0, 0.0}));
}

TEST(CarliniWagner, OutputInUnitBoxAndReproducible) {
  const Fixture f;
  const AttackConfig cfg{.kind = AttackKind::cw, .steps = 20, .c = 10.0, .seed = 3};
  const auto a = cw_l2(f.reconstructing(), f.x, f.y, cfg);
  const auto b = cw_l2(f.reconstructing(), f.x, f.y, cfg);
  EXPECT_TRUE(identical(a.x_adv, b.x_adv));
  EXPECT_EQ(a.success, b.success);
  for (double v : a.x_adv.data()) {
    ASSERT_GE(v, 0.0);
    ASSERT_LE(v, 1.0);
  }
  const auto pred = f.reconstructing().predict(a.x_adv);
  for (std::size_t i = 0; i < f.y.size(); ++i) {
    if (a.success[i]) {
      EXPECT_NE(pred[i], f.y[i]);
    }
  }
}

TEST(CarliniWagner, NegligibleTradeOffLeavesInputAlone) {
  const Fixture f;
  const AttackConfig cfg{.kind = AttackKind::cw, .steps = 10, .c = 1e-12};
  const auto result = cw_l2(f.bare(), f.x, f.y, cfg);
  for (std::size_t i = 0; i < 4; ++i) {
    double dist = 0.0;
    for (std::size_t k = i * 784; k < (i + 1) * 784; ++k) {
      dist += (result.x_adv[k] - f.x[k]) * (result.x_adv[k] - f.x[k]);
    }
    EXPECT_LT(dist, 1e-3) << i;
  }
}

TEST(CarliniWagner, StrongAttackBreaksTheBareClassifier) {
  const Fixture f;
  const AttackConfig cfg{.kind = AttackKind::cw, .steps = 100, .c = 10.0};
  const auto result = cw_l2(f.bare(), f.x, f.y, cfg);
  for (bool s : result.success) {
    EXPECT_TRUE(s);
  }
}

TEST(Bpda, IdentityPurifierGivesTheTrueGradient) {
  const Fixture f;
  TargetFn identity = f.bare();
  identity.purify = [](Graph&, const Tensor& u, const NoiseDraw&) { return u; };
  const Tensor surrogate = bpda_gradient(identity, f.x, f.y);
  const Tensor exact = loss_gradient(identity, f.x, f.y);
  EXPECT_LE(linf(surrogate, exact), 1e-10);
}

TEST(Bpda, EqualsClassifierGradientAtPurifiedPoint) {
  const Fixture f;
  const TargetFn target = f.reconstructing();
  Graph g(Graph::Mode::inference);
  const Tensor purified = target.purify(g, f.x, {}).detached();
  const Tensor direct = loss_gradient(f.bare(), purified, f.y);
  EXPECT_TRUE(identical(bpda_gradient(target, f.x, f.y), direct));
  EXPECT_FALSE(identical(loss_gradient(target, f.x, f.y), direct));
}

TEST(Eot, SingleSampleIsOneStochasticPass) {
  const Fixture f;
  const TargetFn target = f.stochastic();
  const Tensor single = loss_gradient(target, f.x, f.y, {GradientPolicy::exact, 1, 77});
  EXPECT_TRUE(identical(eot_gradient(target, f.x, f.y, 1, 77), single));
}

TEST(Eot, DeterministicPurifierGivesTheSameEstimateForAnyK) {
  const Fixture f;
  const TargetFn target = f.reconstructing();
  const Tensor one = eot_gradient(target, f.x, f.y, 1, 5);
  for (std::size_t k : {2u, 3u, 8u}) {
    const Tensor many = eot_gradient(target, f.x, f.y, k, 5);
    for (std::size_t e = 0; e < one.size(); ++e) {
      ASSERT_NEAR(many[e], one[e], 1e-12 * std::max(1.0, std::abs(one[e])));
    }
  }
}

TEST(Eot, EstimatorVarianceFallsAsOneOverK) {
  const Fixture f;
  const TargetFn target = f.stochastic();
  auto variance = [&](std::size_t k) {
    constexpr int reps = 30;
    std::vector<Tensor> draws;
    for (int r = 0; r < reps; ++r) {
      draws.push_back(eot_gradient(target, f.x, f.y, k, 1000 + r));
    }
    double total = 0.0;
    for (std::size_t e = 0; e < draws[0].size(); ++e) {
      double mean = 0.0;
      for (const Tensor& d : draws) {
        mean += d[e];
      }
      mean /= reps;
      for (const Tensor& d : draws) {
        total += (d[e] - mean) * (d[e] - mean);
      }
    }
    return total / (reps - 1);
  };
  const double v1 = variance(1), v4 = variance(4), v16 = variance(16);
  EXPECT_GT(v1, 0.0);
  EXPECT_GT(v1 / v4, 2.0);
  EXPECT_LT(v1 / v4, 8.0);
  EXPECT_GT(v4 / v16, 2.0);
  EXPECT_LT(v4 / v16, 8.0);
}

TEST(SuccessRate, HandCounts) {
  const std::vector<int> y{0, 1, 2, 3};
  EXPECT_EQ(attack_success_rate(y, y, y), 0.0);
  const std::vector<int> wrong{1, 2, 3, 0};
  EXPECT_EQ(attack_success_rate(y, wrong, y), 1.0);
  // Samples 1..3 clean-correct; 1 and 3 flipped.
  const std::vector<int> clean{9, 1, 2, 3}, adv{9, 0, 2, 0};
  EXPECT_DOUBLE_EQ(attack_success_rate(clean, adv, y), 2.0 / 3.0);
  const std::vector<int> none{9, 9, 9, 9};
  EXPECT_EQ(attack_success_rate(none, none, y), 0.0);
  const std::vector<int> shorter{0};
  EXPECT_EQ(code_of([&] { attack_success_rate(shorter, y, y); }), ErrorCode::LengthMismatch);
}

TEST(AttackConfig, RejectsBrokenInvariants) {
  EXPECT_EQ(code_of([] { validate({.epsilon = -0.1}); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { validate({.steps = 0}); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { validate({.samples = 0}); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { validate({.kind = AttackKind::cw, .c = 0.0}); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(AttackConfig{.epsilon = 0.2}.step_size(), 0.05);
  for (AttackKind k : {AttackKind::fgsm, AttackKind::pgd, AttackKind::cw, AttackKind::bpda_pgd, AttackKind::eot_pgd,
                       AttackKind::eot_bpda_pgd}) {
    EXPECT_EQ(attack_from_name(attack_name(k)), k);
  }
}

TEST(RunAttack, SuccessFlagsFollowPredictionsAndSaveWritesSidecar) {
  const Fixture f;
  const AttackConfig cfg{.kind = AttackKind::fgsm, .epsilon = 0.2};
  const auto result = run_attack(f.bare(), f.x, f.y, cfg);
  const auto pred = f.bare().predict(result.x_adv);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(result.success[i], pred[i] != f.y[i]);
  }
  const auto path = std::filesystem::temp_directory_path() / "toporeform_adv.trfm";
  save_adversarial(path, result, cfg);
  const auto loaded = models::load_tensors(path);
  ASSERT_EQ(loaded.size(), 1u);
  EXPECT_EQ(loaded[0].value.shape(), f.x.shape());
  std::ifstream in(path.string() + ".json");
  const auto sidecar = nlohmann::json::parse(in);
  EXPECT_EQ(sidecar["kind"], "fgsm");
  EXPECT_EQ(sidecar["success"].size(), 4u);
}
