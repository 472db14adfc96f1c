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
#include <cstdint>

#include "toporeform/topology/persistence.hpp"

namespace toporeform::dataio {

enum class CloudKind { blobs, circle, line };

struct CloudOptions {
  std::size_t clusters = 3;
  /// Distance between consecutive blob centres along the first axis.
  double separation = 100.0;
  /// Standard deviation of blob members and of ring noise.
  double spread = 1.0;
};

/// Deterministic in (kind, n, dims, seed, options).
///   line:   point i sits at the i-th triangular number on the first axis,
///           so the gaps grow 1, 2, 3, ...
///   blobs:  point i belongs to cluster i % clusters, Gaussian around its
///           centre.
///   circle: unit ring in the first two axes with Gaussian noise of
///           0.05 * spread on every axis.
topology::PointCloud synthetic_clouds(CloudKind kind, std::size_t n, std::size_t dims, std::uint64_t seed,
                                      const CloudOptions& options = {});

}  // namespace toporeform::dataio
