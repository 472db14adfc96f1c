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

#include "toporeform/dataio/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "toporeform/error.hpp"

namespace toporeform::dataio {

topology::PointCloud synthetic_clouds(CloudKind kind, std::size_t n, std::size_t dims, std::uint64_t seed,
                                      const CloudOptions& options) {
  require(n >= 1 && dims >= 1, ErrorCode::InvalidArgument, "synthetic cloud needs n >= 1 and dims >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 2.0 * std::numbers::pi);
  std::vector<double> coords(n * dims, 0.0);

  switch (kind) {
    case CloudKind::line:
      for (std::size_t i = 0; i < n; ++i) {
        coords[i * dims] = static_cast<double>(i * (i + 1) / 2);
      }
      break;
    case CloudKind::blobs: {
      const std::size_t k = std::max<std::size_t>(options.clusters, 1);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t d = 0; d < dims; ++d) {
          coords[i * dims + d] = options.spread * normal(rng);
        }
        coords[i * dims] += static_cast<double>(i % k) * options.separation;
      }
      break;
    }
    case CloudKind::circle:
      for (std::size_t i = 0; i < n; ++i) {
        const double angle = uniform(rng);
        coords[i * dims] = std::cos(angle);
        if (dims > 1) {
          coords[i * dims + 1] = std::sin(angle);
        }
        for (std::size_t d = 0; d < dims; ++d) {
          coords[i * dims + d] += 0.05 * options.spread * normal(rng);
        }
      }
      break;
  }
  return topology::PointCloud(n, dims, std::move(coords));
}

}  // namespace toporeform::dataio
