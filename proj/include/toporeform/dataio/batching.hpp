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
#include <vector>

#include "toporeform/autodiff/tensor.hpp"
#include "toporeform/dataio/dataset.hpp"

namespace toporeform::dataio {

struct BatchPlan {
  std::uint64_t seed = 0;
  std::size_t batch_size = 64;
};

/// Bijection on [0, n) that depends only on (seed, epoch).
std::vector<std::size_t> epoch_permutation(std::size_t n, std::uint64_t seed, std::uint64_t epoch);

struct Batch {
  std::vector<std::size_t> indices;
  Tensor images;
  std::vector<int> labels;
};

/// The batches of one epoch. A final batch with fewer than two samples is
/// dropped; everything else covers the permutation in order.
class EpochBatches {
 public:
  EpochBatches(const Dataset& dataset, const BatchPlan& plan, std::uint64_t epoch);

  std::size_t size() const noexcept { return bounds_.size(); }
  const std::vector<std::size_t>& order() const noexcept { return order_; }
  std::vector<std::size_t> indices(std::size_t k) const;
  Batch at(std::size_t k) const;

  class iterator {
   public:
    iterator(const EpochBatches* owner, std::size_t k) : owner_(owner), k_(k) {}
    Batch operator*() const { return owner_->at(k_); }
    iterator& operator++() {
      ++k_;
      return *this;
    }
    bool operator==(const iterator& other) const = default;

   private:
    const EpochBatches* owner_;
    std::size_t k_;
  };
  iterator begin() const { return {this, 0}; }
  iterator end() const { return {this, size()}; }

 private:
  const Dataset* dataset_;
  std::vector<std::size_t> order_;
  std::vector<std::pair<std::size_t, std::size_t>> bounds_;
};

inline EpochBatches batches(const Dataset& dataset, const BatchPlan& plan, std::uint64_t epoch) {
  return EpochBatches(dataset, plan, epoch);
}

/// Stacks selected samples into [B,1,28,28].
Batch gather(const Dataset& dataset, std::vector<std::size_t> indices);

}  // namespace toporeform::dataio
