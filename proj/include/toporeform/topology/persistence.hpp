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

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace toporeform::topology {

/// n x D matrix of finite doubles, one point per row.
class PointCloud {
 public:
  PointCloud(std::size_t points, std::size_t dims, std::vector<double> coords);

  std::size_t size() const noexcept { return points_; }
  std::size_t dims() const noexcept { return dims_; }
  std::span<const double> row(std::size_t i) const { return {coords_.data() + i * dims_, dims_}; }
  std::span<const double> coords() const noexcept { return coords_; }

 private:
  std::size_t points_;
  std::size_t dims_;
  std::vector<double> coords_;
};

/// Symmetric n x n matrix with zero diagonal and nonnegative entries.
class DistanceMatrix {
 public:
  /// Validates symmetry, zero diagonal, nonnegativity and finiteness.
  DistanceMatrix(std::size_t n, std::vector<double> entries);

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return entries_[i * n_ + j]; }
  std::span<const double> entries() const noexcept { return entries_; }

 private:
  std::size_t n_;
  std::vector<double> entries_;
};

struct Edge {
  std::size_t i;
  std::size_t j;
  bool operator==(const Edge&) const = default;
};

/// Edges at which 0-dimensional classes die, in acceptance order. For a
/// Rips filtration these are the edges of a minimum spanning tree.
struct Pairing0 {
  std::vector<Edge> edges;
};

struct Bar {
  double birth;
  double death;
};

/// Finite bars of one homology dimension; the essential class is omitted.
struct PersistenceDiagram {
  int dim = 0;
  std::vector<Bar> bars;
};

struct Persistence0 {
  Pairing0 pairing;
  PersistenceDiagram diagram;
};

DistanceMatrix pairwise_distances(const PointCloud& cloud);

/// Kruskal with union-find over edges sorted by (distance, i, j).
Persistence0 persistence0(const DistanceMatrix& dist);

/// Rows "dim,birth,death" with a header line.
void write_diagram_csv(std::ostream& out, const PersistenceDiagram& diagram);

}  // namespace toporeform::topology
