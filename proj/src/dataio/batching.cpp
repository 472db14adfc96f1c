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

#include "toporeform/dataio/batching.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>

namespace toporeform::dataio {

std::vector<std::size_t> epoch_permutation(std::size_t n, std::uint64_t seed, std::uint64_t epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(epoch), static_cast<std::uint32_t>(epoch >> 32)};
  std::mt19937_64 rng(seq);
  // Fisher-Yates with an explicit bounded draw so the order does not depend
  // on the standard library's distribution implementation.
  for (std::size_t i = n; i > 1; --i) {
    const std::uint64_t bound = i;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t draw;
    do {
      draw = rng();
    } while (draw >= limit);
    std::swap(order[i - 1], order[draw % bound]);
  }
  return order;
}

EpochBatches::EpochBatches(const Dataset& dataset, const BatchPlan& plan, std::uint64_t epoch)
    : dataset_(&dataset), order_(epoch_permutation(dataset.size(), plan.seed, epoch)) {
  const std::size_t step = std::max<std::size_t>(plan.batch_size, 1);
  for (std::size_t start = 0; start < order_.size(); start += step) {
    const std::size_t stop = std::min(order_.size(), start + step);
    if (stop - start >= 2) {
      bounds_.emplace_back(start, stop);
    }
  }
}

std::vector<std::size_t> EpochBatches::indices(std::size_t k) const {
  const auto [start, stop] = bounds_.at(k);
  return {order_.begin() + static_cast<std::ptrdiff_t>(start), order_.begin() + static_cast<std::ptrdiff_t>(stop)};
}

Batch EpochBatches::at(std::size_t k) const { return gather(*dataset_, indices(k)); }

Batch gather(const Dataset& dataset, std::vector<std::size_t> indices) {
  Dataset part = dataset.subset(indices);
  return {std::move(indices), std::move(part.images), std::move(part.labels)};
}

}  // namespace toporeform::dataio
