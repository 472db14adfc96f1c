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

#include "toporeform/random.hpp"

#include <cmath>
#include <numbers>

namespace toporeform {

std::uint64_t mix64(std::uint64_t x) noexcept {
  // SplitMix64 finalizer.
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t purpose) noexcept {
  return mix64(mix64(seed) ^ (purpose * 0xD1B54A32D192ED03ull));
}

CounterStream::CounterStream(std::uint64_t seed, std::uint64_t stream) noexcept : key_(derive_seed(seed, stream)) {}

std::uint64_t CounterStream::bits(std::uint64_t counter) const noexcept { return mix64(key_ ^ mix64(counter)); }

double CounterStream::uniform(std::uint64_t counter) const noexcept {
  return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
}

double CounterStream::normal(std::uint64_t counter) const noexcept {
  const double u1 = 1.0 - uniform(2 * counter);  // (0, 1]
  const double u2 = uniform(2 * counter + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Tensor normal_tensor(const Shape& shape, std::uint64_t seed, std::uint64_t stream) {
  CounterStream rng(seed, stream);
  Tensor out(shape);
  auto data = out.mutable_data();
  for (std::size_t k = 0; k < data.size(); ++k) {
    data[k] = rng.normal(k);
  }
  return out;
}

Tensor uniform_tensor(const Shape& shape, double lo, double hi, std::uint64_t seed, std::uint64_t stream) {
  CounterStream rng(seed, stream);
  Tensor out(shape);
  auto data = out.mutable_data();
  for (std::size_t k = 0; k < data.size(); ++k) {
    data[k] = lo + (hi - lo) * rng.uniform(k);
  }
  return out;
}

}  // namespace toporeform
