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

#include "toporeform/dataio/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include "toporeform/error.hpp"

namespace toporeform::dataio {

namespace {

class Reader {
 public:
  Reader(std::span<const std::uint8_t> bytes, const char* what) : bytes_(bytes), what_(what) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) {
      v = (v << 8) | bytes_[pos_++];
    }
    return v;
  }

  std::span<const std::uint8_t> take(std::size_t count) {
    need(count);
    auto out = bytes_.subspan(pos_, count);
    pos_ += count;
    return out;
  }

  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

 private:
  void need(std::size_t count) const {
    require(remaining() >= count, ErrorCode::TruncatedFile,
            std::string(what_) + " file ends after " + std::to_string(bytes_.size()) + " bytes");
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
  const char* what_;
};

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::IoError, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  require(!in.bad(), ErrorCode::IoError, "read failed for " + path.string());
  return bytes;
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) {
    out.push_back(static_cast<std::uint8_t>(v >> shift));
  }
}

}  // namespace

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  constexpr std::size_t pixels = kImageSide * kImageSide;
  Dataset out;
  out.class_count = class_count;
  std::vector<double> data;
  data.reserve(indices.size() * pixels);
  for (std::size_t i : indices) {
    require(i < size(), ErrorCode::InvalidArgument, "subset index out of range");
    auto src = images.data().subspan(i * pixels, pixels);
    data.insert(data.end(), src.begin(), src.end());
    out.labels.push_back(labels[i]);
  }
  out.images = Tensor({indices.size(), 1, kImageSide, kImageSide}, std::move(data));
  return out;
}

Dataset parse_idx(std::span<const std::uint8_t> image_bytes, std::span<const std::uint8_t> label_bytes,
                  const IdxOptions& options) {
  Reader images(image_bytes, "images");
  Reader labels(label_bytes, "labels");

  const std::uint32_t image_magic = images.u32();
  require(image_magic == kImageMagic, ErrorCode::BadMagic, "images file has magic " + std::to_string(image_magic));
  const std::uint32_t label_magic = labels.u32();
  require(label_magic == kLabelMagic, ErrorCode::BadMagic, "labels file has magic " + std::to_string(label_magic));

  const std::uint32_t count = images.u32();
  const std::uint32_t rows = images.u32();
  const std::uint32_t cols = images.u32();
  const std::uint32_t label_count = labels.u32();
  require(rows == kImageSide && cols == kImageSide, ErrorCode::DimMismatch,
          "images are " + std::to_string(rows) + "x" + std::to_string(cols) + ", expected 28x28");
  require(count == label_count, ErrorCode::DimMismatch,
          std::to_string(count) + " images but " + std::to_string(label_count) + " labels");

  constexpr std::size_t pixels = kImageSide * kImageSide;
  const auto pixel_bytes = images.take(static_cast<std::size_t>(count) * pixels);
  const auto raw_labels = labels.take(count);
  require(images.remaining() == 0 && labels.remaining() == 0, ErrorCode::DimMismatch,
          "trailing bytes after the declared payload");

  Dataset out;
  out.labels.reserve(count);
  int largest = -1;
  for (std::uint8_t raw : raw_labels) {
    const int label = static_cast<int>(raw) - options.label_offset;
    require(label >= 0, ErrorCode::LabelOutOfRange, "label " + std::to_string(raw) + " below offset");
    largest = std::max(largest, label);
    out.labels.push_back(label);
  }
  out.class_count = options.class_count > 0 ? options.class_count : largest + 1;
  require(largest < out.class_count, ErrorCode::LabelOutOfRange,
          "label " + std::to_string(largest) + " outside " + std::to_string(out.class_count) + " classes");

  std::vector<double> data(pixel_bytes.size());
  for (std::size_t img = 0; img < count; ++img) {
    for (std::size_t r = 0; r < kImageSide; ++r) {
      for (std::size_t c = 0; c < kImageSide; ++c) {
        const std::size_t src = options.transpose ? c * kImageSide + r : r * kImageSide + c;
        data[img * pixels + r * kImageSide + c] = pixel_bytes[img * pixels + src] / 255.0;
      }
    }
  }
  out.images = Tensor({count, 1, kImageSide, kImageSide}, std::move(data));
  return out;
}

Dataset load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path,
                 const IdxOptions& options) {
  const auto image_bytes = read_file(images_path);
  const auto label_bytes = read_file(labels_path);
  return parse_idx(image_bytes, label_bytes, options);
}

std::vector<std::uint8_t> encode_idx_images(const Tensor& images) {
  require(images.rank() == 4 && images.dim(1) == 1 && images.dim(2) == kImageSide && images.dim(3) == kImageSide,
          ErrorCode::DimMismatch, "expected [N,1,28,28] images, got " + shape_string(images.shape()));
  std::vector<std::uint8_t> out;
  out.reserve(16 + images.size());
  put_u32(out, kImageMagic);
  put_u32(out, static_cast<std::uint32_t>(images.dim(0)));
  put_u32(out, kImageSide);
  put_u32(out, kImageSide);
  for (double v : images.data()) {
    out.push_back(static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)));
  }
  return out;
}

std::vector<std::uint8_t> encode_idx_labels(std::span<const int> labels, int label_offset) {
  std::vector<std::uint8_t> out;
  out.reserve(8 + labels.size());
  put_u32(out, kLabelMagic);
  put_u32(out, static_cast<std::uint32_t>(labels.size()));
  for (int label : labels) {
    const int raw = label + label_offset;
    require(raw >= 0 && raw <= 255, ErrorCode::LabelOutOfRange, "label does not fit in a byte");
    out.push_back(static_cast<std::uint8_t>(raw));
  }
  return out;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  require(static_cast<bool>(out), ErrorCode::IoError, "write failed for " + path.string());
}

}  // namespace toporeform::dataio
