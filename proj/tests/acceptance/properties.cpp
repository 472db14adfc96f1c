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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <numeric>
#include <sstream>

#include "criteria.hpp"
#include "toporeform/attacks/attacks.hpp"
#include "toporeform/autodiff/gradcheck.hpp"
#include "toporeform/dataio/dataset.hpp"
#include "toporeform/error.hpp"
#include "toporeform/models/classifier.hpp"
#include "toporeform/models/reformer.hpp"
#include "toporeform/models/topoae.hpp"
#include "toporeform/pipeline/inference.hpp"
#include "toporeform/random.hpp"
#include "toporeform/topology/topo_loss.hpp"

namespace toporeform::acceptance {

namespace {

using clk = std::chrono::steady_clock;
using topology::DistanceMatrix;
using topology::PointCloud;

double since(clk::time_point t) { return std::chrono::duration<double>(clk::now() - t).count(); }

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(3);
  s << v;
  return s.str();
}

PointCloud random_cloud(std::size_t n, std::size_t d, std::uint64_t seed) {
  CounterStream rng(seed, 0);
  std::vector<double> c(n * d);
  for (std::size_t k = 0; k < c.size(); ++k) c[k] = rng.normal(k);
  return PointCloud(n, d, std::move(c));
}

// Prim's algorithm on the dense distance matrix; returns the accepted edge
// lengths in ascending order.
std::vector<double> prim_lengths(const DistanceMatrix& a) {
  const std::size_t n = a.size();
  std::vector<double> best(n, INFINITY), lengths;
  std::vector<bool> in(n, false);
  best[0] = 0.0;
  for (std::size_t step = 0; step < n; ++step) {
    std::size_t u = n;
    for (std::size_t v = 0; v < n; ++v) {
      if (!in[v] && (u == n || best[v] < best[u])) u = v;
    }
    in[u] = true;
    if (step > 0) lengths.push_back(best[u]);
    for (std::size_t v = 0; v < n; ++v) {
      if (!in[v]) best[v] = std::min(best[v], a(u, v));
    }
  }
  std::sort(lengths.begin(), lengths.end());
  return lengths;
}

// Exhaustive minimum over all labelled trees via Pruefer sequences.
double exhaustive_mst_weight(const DistanceMatrix& a) {
  const std::size_t n = a.size();
  if (n <= 1) return 0.0;
  if (n == 2) return a(0, 1);
  std::vector<std::size_t> seq(n - 2, 0);
  double best = INFINITY;
  while (true) {
    std::vector<std::size_t> degree(n, 1);
    for (auto s : seq) ++degree[s];
    std::vector<double> lengths;
    for (auto s : seq) {
      std::size_t leaf = 0;
      while (degree[leaf] != 1) ++leaf;
      lengths.push_back(a(leaf, s));
      --degree[leaf];
      --degree[s];
    }
    std::size_t u = n, v = n;
    for (std::size_t k = 0; k < n; ++k) {
      if (degree[k] == 1) (u == n ? u : v) = k;
    }
    lengths.push_back(a(u, v));
    std::sort(lengths.begin(), lengths.end());
    best = std::min(best, std::accumulate(lengths.begin(), lengths.end(), 0.0));
    std::size_t k = 0;
    while (k < seq.size() && ++seq[k] == n) seq[k++] = 0;
    if (k == seq.size()) break;
  }
  return best;
}

std::vector<double> deaths_of(const topology::PersistenceDiagram& d) {
  std::vector<double> out;
  for (const auto& b : d.bars) out.push_back(b.death);
  std::sort(out.begin(), out.end());
  return out;
}

double moved_by(const PointCloud& a, const PointCloud& b, std::size_t i) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.dims(); ++k) {
    const double d = a.row(i)[k] - b.row(i)[k];
    s += d * d;
  }
  return std::sqrt(s);
}

double loss_at(const PointCloud& x, const PointCloud& z, const topology::Pairing0& px, const topology::Pairing0& pz) {
  return topology::topo_loss(topology::pairwise_distances(x), topology::pairwise_distances(z), px, pz).total;
}

models::ClassifierModel small_classifier() { return models::ClassifierModel({{4, 4, 8, 8}, 3, {16}, 10}, 31); }

}  // namespace

Outcome gradient_correctness() {
  const auto t = clk::now();
  double worst_op = 0.0, worst_mlp = 0.0;
  std::string worst_label;
  for (const auto& c : standard_op_cases()) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const double e = finite_diff_check(c.kind, c.shapes, seed, c.attrs);
      if (e > worst_op) {
        worst_op = e;
        worst_label = c.label;
      }
    }
  }
  for (std::uint64_t seed = 0; seed < 5; ++seed) worst_mlp = std::max(worst_mlp, mlp_gradient_check(seed));
  const double secs = since(t);
  return {1, worst_op < 1e-4 && worst_mlp < 1e-3 && secs < 60.0,
          "worst op error " + fmt(worst_op) + " (" + worst_label + "), 3-layer MLP " + fmt(worst_mlp) + ", " +
              fmt(secs) + " s",
          secs};
}

Outcome persistence_oracle() {
  const auto t = clk::now();
  std::size_t weight_ok = 0, death_ok = 0, exhaustive_ok = 0, exhaustive_runs = 0;
  constexpr std::size_t clouds = 200;
  for (std::size_t c = 0; c < clouds; ++c) {
    const std::size_t n = 2 + c % 31;
    const std::size_t d = 1 + c % 4;
    const auto cloud = random_cloud(n, d, 1000 + c);
    const auto a = topology::pairwise_distances(cloud);
    const auto p = topology::persistence0(a);

    std::vector<double> accepted;
    for (const auto& e : p.pairing.edges) accepted.push_back(a(e.i, e.j));
    std::sort(accepted.begin(), accepted.end());
    const auto oracle = prim_lengths(a);
    // Both sums run in ascending order, so equality is exact.
    const double w = std::accumulate(accepted.begin(), accepted.end(), 0.0);
    const double w_oracle = std::accumulate(oracle.begin(), oracle.end(), 0.0);
    weight_ok += w == w_oracle && p.pairing.edges.size() == n - 1;
    death_ok += deaths_of(p.diagram) == accepted;
    if (n <= 7) {
      ++exhaustive_runs;
      exhaustive_ok += exhaustive_mst_weight(a) == w;
    }
  }
  const double secs = since(t);
  const bool pass = weight_ok == clouds && death_ok == clouds && exhaustive_ok == exhaustive_runs && secs < 60.0;
  return {2, pass,
          "MST weight " + std::to_string(weight_ok) + "/200, deaths " + std::to_string(death_ok) +
              "/200, exhaustive trees " + std::to_string(exhaustive_ok) + "/" + std::to_string(exhaustive_runs) +
              ", " + fmt(secs) + " s",
          secs};
}

Outcome topological_loss_properties() {
  const auto t = clk::now();
  // Isometry: rotation in the first two axes, then a translation.
  double worst_iso = 0.0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    const auto x = random_cloud(6 + s % 20, 3, 2000 + s);
    const double th = 0.1 + 0.05 * static_cast<double>(s);
    std::vector<double> zc(x.coords().begin(), x.coords().end());
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double u = zc[i * 3], v = zc[i * 3 + 1];
      zc[i * 3] = std::cos(th) * u - std::sin(th) * v + 1.5;
      zc[i * 3 + 1] = std::sin(th) * u + std::cos(th) * v - 0.5;
      zc[i * 3 + 2] += 2.0;
    }
    const PointCloud z(x.size(), 3, zc);
    const auto ax = topology::pairwise_distances(x), az = topology::pairwise_distances(z);
    const double l =
        topology::topo_loss(ax, az, topology::persistence0(ax).pairing, topology::persistence0(az).pairing).total;
    worst_iso = std::max(worst_iso, l);
  }

  // Analytic gradient against central differences with pairings fixed;
  // coordinates whose perturbation would change either pairing are skipped.
  double worst_rel = 0.0;
  std::size_t checked = 0, skipped = 0;
  const double h = 1e-6;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto x = random_cloud(8 + s % 8, 4, 3000 + s);
    const auto z = random_cloud(x.size(), 2, 4000 + s);
    const auto px = topology::persistence0(topology::pairwise_distances(x)).pairing;
    const auto pz = topology::persistence0(topology::pairwise_distances(z)).pairing;
    const auto grads = topology::topo_loss_backward(x, z, px, pz);
    auto probe = [&](bool in_x, std::size_t k, double analytic) {
      const PointCloud& base = in_x ? x : z;
      std::vector<double> up(base.coords().begin(), base.coords().end()), dn = up;
      up[k] += h;
      dn[k] -= h;
      const PointCloud cu(base.size(), base.dims(), up), cd(base.size(), base.dims(), dn);
      const auto stable = [&](const PointCloud& c) {
        return topology::persistence0(topology::pairwise_distances(c)).pairing.edges == (in_x ? px : pz).edges;
      };
      if (!stable(cu) || !stable(cd)) {
        ++skipped;
        return;
      }
      const double lu = in_x ? loss_at(cu, z, px, pz) : loss_at(x, cu, px, pz);
      const double ld = in_x ? loss_at(cd, z, px, pz) : loss_at(x, cd, px, pz);
      const double numeric = (lu - ld) / (2 * h);
      worst_rel = std::max(worst_rel, std::abs(analytic - numeric) / std::max(1.0, std::abs(analytic)));
      ++checked;
    };
    for (std::size_t k = 0; k < grads.d_x.size(); ++k) probe(true, k, grads.d_x[k]);
    for (std::size_t k = 0; k < grads.d_z.size(); ++k) probe(false, k, grads.d_z[k]);
  }

  // Stability under bounded point moves.
  std::size_t stable_ok = 0;
  for (double delta : {1e-3, 1e-2}) {
    for (std::uint64_t s = 0; s < 100; ++s) {
      const auto x = random_cloud(5 + s % 25, 3, 5000 + s);
      CounterStream rng(6000 + s, delta < 5e-3 ? 1 : 2);
      std::vector<double> moved(x.coords().begin(), x.coords().end());
      for (std::size_t i = 0; i < x.size(); ++i) {
        double dir[3], norm = 0.0;
        for (std::size_t k = 0; k < 3; ++k) {
          dir[k] = rng.normal(i * 3 + k);
          norm += dir[k] * dir[k];
        }
        const double r = delta * rng.uniform(1'000'000 + i) / std::sqrt(norm);
        for (std::size_t k = 0; k < 3; ++k) moved[i * 3 + k] += r * dir[k];
      }
      const PointCloud y(x.size(), 3, moved);
      bool ok = true;
      for (std::size_t i = 0; i < x.size(); ++i) ok = ok && moved_by(x, y, i) <= delta;
      const auto dx = topology::persistence0(topology::pairwise_distances(x)).diagram;
      const auto dy = topology::persistence0(topology::pairwise_distances(y)).diagram;
      const auto a = deaths_of(dx), b = deaths_of(dy);
      for (std::size_t k = 0; k < a.size(); ++k) ok = ok && std::abs(a[k] - b[k]) <= 2 * delta;
      ok = ok && topology::bottleneck0(dx, dy) <= 2 * delta;
      stable_ok += ok;
    }
  }
  const double secs = since(t);
  const bool pass = worst_iso <= 1e-9 && worst_rel < 1e-4 && checked > 0 && stable_ok == 200;
  return {3, pass,
          "isometric L_t max " + fmt(worst_iso) + ", backward rel err " + fmt(worst_rel) + " over " +
              std::to_string(checked) + " coords (" + std::to_string(skipped) + " tie-guarded), stability " +
              std::to_string(stable_ok) + "/200",
          secs};
}

Outcome attack_contracts() {
  const auto t = clk::now();
  const auto classifier = small_classifier();
  attacks::TargetFn target;
  target.classify = [&](Graph& g, const Tensor& u) { return classifier.forward(g, u); };

  std::size_t calls = 0, box_ok = 0;
  auto check_box = [&](const Tensor& adv, const Tensor& x, double eps) {
    bool ok = true;
    for (std::size_t k = 0; k < adv.size(); ++k) {
      ok = ok && adv[k] >= 0.0 && adv[k] <= 1.0 && adv[k] - x[k] <= eps && x[k] - adv[k] <= eps;
    }
    ++calls;
    box_ok += ok;
  };

  bool fgsm_equal = true, reproducible = true, cw_box = true;
  for (std::uint64_t s = 0; s < 12; ++s) {
    const Tensor x = uniform_tensor({6, 1, 28, 28}, 0.0, 1.0, 7000 + s, 0);
    std::vector<int> y;
    for (int i = 0; i < 6; ++i) y.push_back(static_cast<int>((s + i) % 10));
    for (double eps : {0.0, 1.0 / 255.0, 0.03, 0.1, 0.3}) {
      const Tensor f = attacks::fgsm(target, x, y, eps);
      check_box(f, x, eps);
      attacks::AttackConfig cfg;
      cfg.epsilon = eps;
      cfg.steps = 5;
      cfg.seed = s;
      const Tensor p = attacks::pgd(target, x, y, cfg, [&](std::size_t, const Tensor& it) { check_box(it, x, eps); });
      check_box(p, x, eps);
      reproducible = reproducible && std::equal(p.data().begin(), p.data().end(),
                                                attacks::pgd(target, x, y, cfg).data().begin());
      cfg.steps = 1;
      cfg.alpha = eps;
      cfg.random_start = false;
      const Tensor one = attacks::pgd(target, x, y, cfg);
      fgsm_equal = fgsm_equal && std::memcmp(one.raw(), f.raw(), f.size() * sizeof(double)) == 0;
    }
    if (s < 3) {
      attacks::AttackConfig cw;
      cw.kind = attacks::AttackKind::cw;
      cw.steps = 20;
      cw.seed = s;
      const auto r = attacks::cw_l2(target, x, y, cw);
      for (double v : r.x_adv.data()) cw_box = cw_box && v >= 0.0 && v <= 1.0;
      const auto again = attacks::cw_l2(target, x, y, cw);
      reproducible = reproducible && std::equal(r.x_adv.data().begin(), r.x_adv.data().end(), again.x_adv.data().begin());
    }
  }
  const double secs = since(t);
  const bool pass = box_ok == calls && fgsm_equal && cw_box && reproducible;
  return {4, pass,
          "ball and box held on " + std::to_string(box_ok) + "/" + std::to_string(calls) + " outputs, PGD(1 step)==FGSM " +
              (fgsm_equal ? "bitwise" : "NO") + ", C&W in [0,1] " + (cw_box ? "yes" : "NO") + ", reproducible " +
              (reproducible ? "yes" : "NO"),
          secs};
}

Outcome mechanism_units() {
  const auto t = clk::now();
  const auto classifier = small_classifier();
  const models::TopoAEModel topoae({}, 32);
  const models::ReformerVAE vae({}, 33);
  const models::AuxModule aux({}, 34);
  const Tensor x = uniform_tensor({4, 1, 28, 28}, 0.0, 1.0, 35, 0);
  const std::vector<int> y{1, 4, 7, 9};

  attacks::TargetFn bare;
  bare.classify = [&](Graph& g, const Tensor& u) { return classifier.forward(g, u); };
  attacks::TargetFn stochastic = bare;
  stochastic.purify = [&](Graph& g, const Tensor& u, const attacks::NoiseDraw& d) {
    return pipeline::purify(g, u, topoae, vae, &aux, d);
  };
  stochastic.noise = {true, 0, 0};

  // BPDA against the gradient of the bare classifier at the purified point,
  // for the same noise draw.
  Graph g(Graph::Mode::inference);
  const Tensor purified = stochastic.purify(g, x, stochastic.noise).detached();
  const Tensor direct = attacks::loss_gradient(bare, purified, y);
  const Tensor surrogate = attacks::bpda_gradient(stochastic, x, y);
  const bool bpda_exact = std::memcmp(direct.raw(), surrogate.raw(), direct.size() * sizeof(double)) == 0;

  auto variance = [&](std::size_t k) {
    constexpr int reps = 40;
    std::vector<Tensor> draws;
    for (int r = 0; r < reps; ++r) draws.push_back(attacks::eot_gradient(stochastic, x, y, k, 9000 + r));
    double total = 0.0;
    for (std::size_t e = 0; e < draws[0].size(); ++e) {
      double mean = 0.0;
      for (const auto& d : draws) mean += d[e];
      mean /= reps;
      for (const auto& d : draws) total += (d[e] - mean) * (d[e] - mean);
    }
    return total / (reps - 1);
  };
  const double v1 = variance(1), v4 = variance(4), v16 = variance(16);
  const double r4 = v1 / v4, r16 = v1 / v16;
  const bool eot_ok = v1 > 0.0 && r4 >= 2.0 && r4 <= 8.0 && r16 >= 8.0 && r16 <= 32.0;
  return {10, bpda_exact && eot_ok,
          std::string("BPDA gradient ") + (bpda_exact ? "bit-equal" : "DIFFERS") +
              " to classifier gradient at purified point; EOT variance ratio K=4: " + fmt(r4) + " (ideal 4), K=16: " +
              fmt(r16) + " (ideal 16)",
          since(t)};
}

Outcome robust_io() {
  const auto t = clk::now();
  // Two handcrafted 28x28 images and their labels.
  auto be32 = [](std::vector<std::uint8_t>& b, std::uint32_t v) {
    for (int s = 24; s >= 0; s -= 8) b.push_back(static_cast<std::uint8_t>(v >> s));
  };
  std::vector<std::uint8_t> images, labels;
  be32(images, 0x00000803);
  be32(images, 2);
  be32(images, 28);
  be32(images, 28);
  for (std::size_t k = 0; k < 2 * 784; ++k) images.push_back(static_cast<std::uint8_t>((k * 37 + k / 784) % 256));
  be32(labels, 0x00000801);
  be32(labels, 2);
  labels.push_back(7);
  labels.push_back(3);

  bool fixture_ok = false;
  try {
    const auto d = dataio::parse_idx(images, labels, {});
    fixture_ok = d.size() == 2 && d.labels == std::vector<int>{7, 3} && d.images.shape() == Shape{2, 1, 28, 28};
    for (std::size_t k = 0; fixture_ok && k < 2 * 784; ++k) {
      fixture_ok = d.images[k] == static_cast<double>(images[16 + k]) / 255.0;
    }
  } catch (const std::exception&) {
    fixture_ok = false;
  }

  std::size_t cases = 0, typed = 0, loaded = 0;
  auto attempt = [&](const std::vector<std::uint8_t>& im, const std::vector<std::uint8_t>& lb) {
    ++cases;
    try {
      dataio::parse_idx(im, lb, {});
      ++loaded;
    } catch (const Error&) {
      ++typed;
    } catch (...) {
    }
  };
  std::size_t must_fail = 0;
  auto must_reject = [&](const std::vector<std::uint8_t>& im, const std::vector<std::uint8_t>& lb) {
    const std::size_t before = typed;
    attempt(im, lb);
    must_fail += typed == before;
  };
  for (std::size_t len = 0; len < images.size(); ++len) {
    must_reject({images.begin(), images.begin() + static_cast<std::ptrdiff_t>(len)}, labels);
  }
  for (std::size_t len = 0; len < labels.size(); ++len) {
    must_reject(images, {labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(len)});
  }
  for (std::size_t byte = 0; byte < 4; ++byte) {
    auto bad = images;
    bad[byte] ^= 0x5a;
    must_reject(bad, labels);
    auto badl = labels;
    badl[byte] ^= 0x5a;
    must_reject(images, badl);
  }
  for (std::size_t field : {8u, 12u}) {
    auto bad = images;
    bad[field + 3] = 27;
    must_reject(bad, labels);
  }
  {
    auto bad = labels;
    bad[7] = 3;
    must_reject(images, bad);
    auto extra = images;
    extra.push_back(0);
    must_reject(extra, labels);
  }
  // Random header and payload corruption: any outcome but a crash or an
  // untyped exception is acceptable.
  CounterStream rng(77, 0);
  for (std::uint64_t trial = 0; trial < 3000; ++trial) {
    auto im = images;
    auto lb = labels;
    const std::size_t flips = 1 + rng.bits(trial * 8) % 4;
    for (std::size_t f = 0; f < flips; ++f) {
      const bool header = rng.bits(trial * 8 + 1 + f) % 2 == 0;
      auto& target = (rng.bits(trial * 8 + 5 + f) % 5 == 0) ? lb : im;
      const std::size_t span = header ? std::min<std::size_t>(16, target.size()) : target.size();
      target[rng.bits(trial * 8 + 3 + f) % span] = static_cast<std::uint8_t>(rng.bits(trial * 8 + 7 + f));
    }
    attempt(im, lb);
  }
  const bool pass = fixture_ok && typed + loaded == cases && must_fail == 0;
  return {12, pass,
          std::to_string(cases) + " fuzz cases: " + std::to_string(typed) + " typed errors, " + std::to_string(loaded) +
              " clean loads, " + std::to_string(cases - typed - loaded) + " untyped; " + std::to_string(must_fail) +
              " malformed inputs accepted; handcrafted fixture " + (fixture_ok ? "bit-exact" : "MISMATCH"),
          since(t)};
}

}  // namespace toporeform::acceptance
