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

#include "toporeform/topology/topo_loss.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "toporeform/error.hpp"

namespace toporeform::topology {

namespace {

constexpr double kMinEdgeLength = 1e-12;

void check_pairing(const Pairing0& pairing, std::size_t n) {
  for (const Edge& e : pairing.edges) {
    require(e.i < n && e.j < n && e.i != e.j, ErrorCode::DimensionMismatch, "pairing edge outside the point set");
  }
}

double sum_over(const Pairing0& pairing, const DistanceMatrix& from, const DistanceMatrix& to) {
  double sum = 0.0;
  for (const Edge& e : pairing.edges) {
    const double diff = from(e.i, e.j) - to(e.i, e.j);
    sum += diff * diff;
  }
  return 0.5 * sum;
}

double distance(const PointCloud& cloud, std::size_t i, std::size_t j) {
  const auto a = cloud.row(i);
  const auto b = cloud.row(j);
  double sum = 0.0;
  for (std::size_t k = 0; k < cloud.dims(); ++k) {
    sum += (a[k] - b[k]) * (a[k] - b[k]);
  }
  return std::sqrt(sum);
}

// Adds coeff * d||p_i - p_j|| / dp into grad.
void add_distance_gradient(const PointCloud& cloud, std::size_t i, std::size_t j, double length, double coeff,
                           std::vector<double>& grad) {
  if (length < kMinEdgeLength) {
    return;
  }
  const auto a = cloud.row(i);
  const auto b = cloud.row(j);
  const std::size_t d = cloud.dims();
  for (std::size_t k = 0; k < d; ++k) {
    const double g = coeff * (a[k] - b[k]) / length;
    grad[i * d + k] += g;
    grad[j * d + k] -= g;
  }
}

// Kuhn's augmenting-path bipartite matching; returns true if every left
// vertex can be matched.
bool has_perfect_matching(std::size_t n, const std::function<bool(std::size_t, std::size_t)>& allowed) {
  std::vector<int> match_right(n, -1);
  std::vector<char> seen(n);
  std::function<bool(std::size_t)> augment = [&](std::size_t u) {
    for (std::size_t v = 0; v < n; ++v) {
      if (seen[v] || !allowed(u, v)) {
        continue;
      }
      seen[v] = 1;
      if (match_right[v] < 0 || augment(static_cast<std::size_t>(match_right[v]))) {
        match_right[v] = static_cast<int>(u);
        return true;
      }
    }
    return false;
  };
  for (std::size_t u = 0; u < n; ++u) {
    std::fill(seen.begin(), seen.end(), 0);
    if (!augment(u)) {
      return false;
    }
  }
  return true;
}

double linf(const Bar& a, const Bar& b) { return std::max(std::abs(a.birth - b.birth), std::abs(a.death - b.death)); }
double to_diagonal(const Bar& a) { return 0.5 * (a.death - a.birth); }

}  // namespace

TopoLoss topo_loss(const DistanceMatrix& a_x, const DistanceMatrix& a_z, const Pairing0& pi_x,
                   const Pairing0& pi_z) {
  require(a_x.size() == a_z.size(), ErrorCode::DimensionMismatch,
          "topo_loss: distance matrices have different sizes");
  check_pairing(pi_x, a_x.size());
  check_pairing(pi_z, a_x.size());
  TopoLoss loss;
  loss.x_to_z = sum_over(pi_x, a_x, a_z);
  loss.z_to_x = sum_over(pi_z, a_z, a_x);
  loss.total = loss.x_to_z + loss.z_to_x;
  return loss;
}

TopoGradients topo_loss_backward(const PointCloud& x, const PointCloud& z, const Pairing0& pi_x,
                                 const Pairing0& pi_z) {
  require(x.size() == z.size(), ErrorCode::DimensionMismatch, "topo_loss_backward: X and Z differ in point count");
  const std::size_t n = x.size();
  require(pi_x.edges.size() + 1 == n && pi_z.edges.size() + 1 == n, ErrorCode::StalePairing,
          "topo_loss_backward: pairing does not have n-1 edges");
  check_pairing(pi_x, n);
  check_pairing(pi_z, n);

  TopoGradients grads{std::vector<double>(x.coords().size(), 0.0), std::vector<double>(z.coords().size(), 0.0)};
  auto accumulate = [&](const Pairing0& pairing) {
    for (const Edge& e : pairing.edges) {
      const double ax = distance(x, e.i, e.j);
      const double az = distance(z, e.i, e.j);
      // d/d(ax) of 1/2 (ax - az)^2 is (ax - az), and the same expression
      // arises for the Z-selected term.
      const double diff = ax - az;
      add_distance_gradient(x, e.i, e.j, ax, diff, grads.d_x);
      add_distance_gradient(z, e.i, e.j, az, -diff, grads.d_z);
    }
  };
  accumulate(pi_x);
  accumulate(pi_z);
  return grads;
}

double bottleneck0(const PersistenceDiagram& a, const PersistenceDiagram& b) {
  require(a.dim == b.dim, ErrorCode::DimMismatch, "bottleneck0: diagrams of different homology dimensions");
  const std::size_t na = a.bars.size();
  const std::size_t nb = b.bars.size();
  if (na + nb == 0) {
    return 0.0;
  }

  std::vector<double> candidates{0.0};
  for (const Bar& p : a.bars) {
    candidates.push_back(to_diagonal(p));
    for (const Bar& q : b.bars) {
      candidates.push_back(linf(p, q));
    }
  }
  for (const Bar& q : b.bars) {
    candidates.push_back(to_diagonal(q));
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  // Left: bars of a, then diagonal copies of b's bars.
  // Right: bars of b, then diagonal copies of a's bars.
  auto feasible = [&](double t) {
    return has_perfect_matching(na + nb, [&](std::size_t u, std::size_t v) {
      const bool u_bar = u < na;
      const bool v_bar = v < nb;
      if (u_bar && v_bar) {
        return linf(a.bars[u], b.bars[v]) <= t;
      }
      if (u_bar) {
        return v - nb == u && to_diagonal(a.bars[u]) <= t;
      }
      if (v_bar) {
        return u - na == v && to_diagonal(b.bars[v]) <= t;
      }
      return true;
    });
  };

  std::size_t lo = 0, hi = candidates.size() - 1;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (feasible(candidates[mid])) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return candidates[lo];
}

}  // namespace toporeform::topology
