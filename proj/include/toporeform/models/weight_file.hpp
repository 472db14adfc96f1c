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
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "toporeform/autodiff/optim.hpp"
#include "toporeform/autodiff/tensor.hpp"

namespace toporeform::models {

/// Container layout, all integers little-endian:
///   "TRFM", u32 version, u32 count, then per tensor
///   u16 name length, name bytes, u8 rank, u32 dims..., f32 payload.
inline constexpr std::uint32_t kWeightFileVersion = 1;

struct NamedTensor {
  std::string name;
  Tensor value;
};

std::vector<std::uint8_t> encode_tensors(std::span<const NamedTensor> tensors);
/// BadWeightFile on any structural problem.
std::vector<NamedTensor> decode_tensors(std::span<const std::uint8_t> bytes);

void save_tensors(const std::filesystem::path& path, std::span<const NamedTensor> tensors);
std::vector<NamedTensor> load_tensors(const std::filesystem::path& path);

void save_parameters(const std::filesystem::path& path, std::span<const Parameter* const> params);
/// Every parameter must be present with a matching shape (BadWeightFile).
/// Frozen flags are left untouched.
void load_parameters(const std::filesystem::path& path, std::span<Parameter* const> params);

/// Rounds every value to the nearest float so a save/load cycle is exact.
void round_to_storage(std::span<Parameter* const> params);

}  // namespace toporeform::models
