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

#include "toporeform/topology/persistence.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <tuple>

#include "toporeform/error.hpp"

namespace toporeform::topology {

namespace {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n), rank_(n, 0) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) {
      return false;
    }
    if (rank_[a] < rank_[b]) {
      std::swap(a, b);
    }
    parent_[b] = a;
    if (rank_[a] == rank_[b]) {
      ++rank_[a];
    }
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<unsigned> rank_;
};

}  // namespace

PointCloud::PointCloud(std::size_t points, std::size_t dims, std::vector<double> coords)
    : points_(points), dims_(dims), coords_(std::move(coords)) {
  require(points >= 1, ErrorCode::InvalidArgument, "point cloud needs at least one point");
  require(coords_.size() == points * dims, ErrorCode::DimensionMismatch, "point cloud coordinate count mismatch");
  require(std::all_of(coords_.begin(), coords_.end(), [](double v) { return std::isfinite(v); }),
          ErrorCode::NonFinite, "point cloud contains NaN or Inf");
}

DistanceMatrix::DistanceMatrix(std::size_t n, std::vector<double> entries) : n_(n), entries_(std::move(entries)) {
  require(entries_.size() == n * n, ErrorCode::DimensionMismatch, "distance matrix is not n x n");
  for (std::size_t i = 0; i < n; ++i) {
    require(entries_[i * n + i] == 0.0, ErrorCode::InvalidArgument, "distance matrix diagonal must be zero");
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = entries_[i * n + j];
      require(std::isfinite(d), ErrorCode::NonFinite, "distance matrix contains NaN or Inf");
      require(d >= 0.0, ErrorCode::InvalidArgument, "distance matrix has a negative entry");
      require(d == entries_[j * n + i], ErrorCode::InvalidArgument, "distance matrix is not symmetric");
    }
  }
}

DistanceMatrix pairwise_distances(const PointCloud& cloud) {
  const std::size_t n = cloud.size();
  std::vector<double> d(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto xi = cloud.row(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto xj = cloud.row(j);
      double sum = 0.0;
      for (std::size_t k = 0; k < cloud.dims(); ++k) {
        const double diff = xi[k] - xj[k];
        sum += diff * diff;
      }
      d[i * n + j] = d[j * n + i] = std::sqrt(sum);
    }
  }
  return DistanceMatrix(n, std::move(d));
}

Persistence0 persistence0(const DistanceMatrix& dist) {
  const std::size_t n = dist.size();
  require(n >= 1, ErrorCode::InvalidArgument, "persistence0 needs at least one point");
  std::vector<Edge> candidates;
  candidates.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      candidates.push_back({i, j});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [&](const Edge& a, const Edge& b) {
    return std::make_tuple(dist(a.i, a.j), a.i, a.j) < std::make_tuple(dist(b.i, b.j), b.i, b.j);
  });

  Persistence0 result;
  result.diagram.dim = 0;
  UnionFind components(n);
  for (const Edge& e : candidates) {
    if (result.pairing.edges.size() + 1 == n) {
      break;
    }
    if (components.unite(e.i, e.j)) {
      result.pairing.edges.push_back(e);
      result.diagram.bars.push_back({0.0, dist(e.i, e.j)});
    }
  }
  return result;
}

void write_diagram_csv(std::ostream& out, const PersistenceDiagram& diagram) {
  out << "dim,birth,death\n";
  const auto old_precision = out.precision(17);
  for (const Bar& bar : diagram.bars) {
    out << diagram.dim << ',' << bar.birth << ',' << bar.death << '\n';
  }
  out.precision(old_precision);
}

}  // namespace toporeform::topology
