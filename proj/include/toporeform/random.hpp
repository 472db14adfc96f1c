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

#include "toporeform/autodiff/tensor.hpp"

namespace toporeform {

/// Counter-based generator: draw k of stream (seed, stream) is a pure
/// function of the three integers, so any sample can be regenerated without
/// replaying the ones before it.
class CounterStream {
 public:
  CounterStream(std::uint64_t seed, std::uint64_t stream) noexcept;

  std::uint64_t bits(std::uint64_t counter) const noexcept;
  /// Uniform in [0, 1) with 53 random bits.
  double uniform(std::uint64_t counter) const noexcept;
  /// Standard normal via Box-Muller on draws 2k and 2k+1.
  double normal(std::uint64_t counter) const noexcept;

 private:
  std::uint64_t key_;
};

std::uint64_t mix64(std::uint64_t x) noexcept;

Tensor normal_tensor(const Shape& shape, std::uint64_t seed, std::uint64_t stream);
Tensor uniform_tensor(const Shape& shape, double lo, double hi, std::uint64_t seed, std::uint64_t stream);

/// Derives an independent seed for a named purpose.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t purpose) noexcept;

}  // namespace toporeform
