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

#include <vector>

#include "toporeform/topology/persistence.hpp"

namespace toporeform::topology {

struct TopoLoss {
  double total = 0.0;
  double x_to_z = 0.0;
  double z_to_x = 0.0;
};

/// Squared mismatch of pairing-selected distances in both directions:
///   x_to_z = 1/2 sum_{(i,j) in pi_x} (A_x[i,j] - A_z[i,j])^2
///   z_to_x = 1/2 sum_{(i,j) in pi_z} (A_z[i,j] - A_x[i,j])^2
TopoLoss topo_loss(const DistanceMatrix& a_x, const DistanceMatrix& a_z, const Pairing0& pi_x,
                   const Pairing0& pi_z);

/// Gradients of the total loss with respect to the point coordinates, row
/// major with the shapes of X and Z.
struct TopoGradients {
  std::vector<double> d_x;
  std::vector<double> d_z;
};

/// Pairings are held fixed. Selected edges shorter than 1e-12 contribute a
/// zero subgradient through that distance.
TopoGradients topo_loss_backward(const PointCloud& x, const PointCloud& z, const Pairing0& pi_x,
                                 const Pairing0& pi_z);

/// Bottleneck distance between two diagrams of the same dimension.
double bottleneck0(const PersistenceDiagram& a, const PersistenceDiagram& b);

}  // namespace toporeform::topology
