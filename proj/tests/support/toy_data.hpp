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

#include "toporeform/dataio/dataset.hpp"
#include "toporeform/random.hpp"

namespace toporeform::fixtures {

// Ten classes of 28x28 images: class c lights rows 2c..2c+3 and the
// column band at 2c+4, over uniform background noise in [0, 0.2].
inline dataio::Dataset toy_digits(std::size_t n, std::uint64_t seed) {
  CounterStream rng(seed, 0);
  dataio::Dataset d;
  d.class_count = 10;
  std::vector<double> px(n * 784);
  for (std::size_t i = 0; i < n; ++i) {
    const int c = static_cast<int>(rng.bits(1u << 30 | i) % 10);
    d.labels.push_back(c);
    for (std::size_t r = 0; r < 28; ++r) {
      for (std::size_t col = 0; col < 28; ++col) {
        const bool lit = (r >= 2u * c && r < 2u * c + 4) || (col >= 2u * c + 4 && col < 2u * c + 6);
        const double noise = 0.2 * rng.uniform(i * 784 + r * 28 + col);
        px[i * 784 + r * 28 + col] = lit ? 1.0 - noise : noise;
      }
    }
  }
  d.images = Tensor({n, 1, 28, 28}, std::move(px));
  return d;
}

}  // namespace toporeform::fixtures
