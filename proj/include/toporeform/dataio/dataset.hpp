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
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "toporeform/autodiff/tensor.hpp"

namespace toporeform::dataio {

/// Images [N,1,28,28] in [0,1] with labels in [0, class_count).
struct Dataset {
  Tensor images;
  std::vector<int> labels;
  int class_count = 0;

  std::size_t size() const noexcept { return labels.size(); }
  /// Copies the listed samples into a new dataset in the given order.
  Dataset subset(std::span<const std::size_t> indices) const;
};

struct IdxOptions {
  /// Subtracted from every raw label; 1 for EMNIST letters (1..26).
  int label_offset = 0;
  /// 0 means "largest label + 1".
  int class_count = 0;
  /// EMNIST stores glyphs transposed relative to MNIST.
  bool transpose = false;
};

inline constexpr std::uint32_t kImageMagic = 0x00000803;
inline constexpr std::uint32_t kLabelMagic = 0x00000801;
inline constexpr std::size_t kImageSide = 28;

/// Every malformed input raises a typed Error; nothing is returned partially.
Dataset load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path,
                 const IdxOptions& options = {});
Dataset parse_idx(std::span<const std::uint8_t> image_bytes, std::span<const std::uint8_t> label_bytes,
                  const IdxOptions& options = {});

/// Pixels are written as round(255 * v).
std::vector<std::uint8_t> encode_idx_images(const Tensor& images);
std::vector<std::uint8_t> encode_idx_labels(std::span<const int> labels, int label_offset = 0);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace toporeform::dataio
