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
#include <filesystem>
#include <iosfwd>
#include <span>

#include "toporeform/autodiff/tensor.hpp"
#include "toporeform/dataio/dataset.hpp"
#include "toporeform/models/topoae.hpp"

namespace toporeform::dataio {

/// Header "label,z0,...,z{d-1}" then one row per sample, values printed with
/// 17 significant digits. `latents` is [N, d].
std::size_t write_latents_csv(std::ostream& out, std::span<const int> labels, const Tensor& latents);

/// Encodes the dataset in chunks and writes the CSV; returns rows written.
std::size_t export_latents(const models::TopoAEModel& topoae, const Dataset& data,
                           const std::filesystem::path& path);

}  // namespace toporeform::dataio
