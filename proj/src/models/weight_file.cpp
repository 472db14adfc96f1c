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

#include "toporeform/models/weight_file.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <map>

#include "toporeform/error.hpp"

namespace toporeform::models {

namespace {

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  for (std::size_t k = 0; k < sizeof(T); ++k) {
    out.push_back(static_cast<std::uint8_t>(static_cast<std::uint64_t>(value) >> (8 * k)));
  }
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    std::uint64_t v = 0;
    for (std::size_t k = 0; k < sizeof(T); ++k) {
      v |= static_cast<std::uint64_t>(bytes_[pos_++]) << (8 * k);
    }
    return static_cast<T>(v);
  }

  std::span<const std::uint8_t> take(std::size_t n) {
    need(n);
    auto out = bytes_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

  bool done() const noexcept { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    require(bytes_.size() - pos_ >= n, ErrorCode::BadWeightFile, "weight file truncated");
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_tensors(std::span<const NamedTensor> tensors) {
  std::vector<std::uint8_t> out{'T', 'R', 'F', 'M'};
  put_le<std::uint32_t>(out, kWeightFileVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(tensors.size()));
  for (const NamedTensor& t : tensors) {
    require(t.name.size() <= std::numeric_limits<std::uint16_t>::max(), ErrorCode::InvalidArgument,
            "tensor name too long");
    require(t.value.rank() <= 255, ErrorCode::InvalidArgument, "tensor rank too large");
    put_le<std::uint16_t>(out, static_cast<std::uint16_t>(t.name.size()));
    out.insert(out.end(), t.name.begin(), t.name.end());
    out.push_back(static_cast<std::uint8_t>(t.value.rank()));
    for (std::size_t d : t.value.shape()) {
      put_le<std::uint32_t>(out, static_cast<std::uint32_t>(d));
    }
    for (double v : t.value.data()) {
      put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    }
  }
  return out;
}

std::vector<NamedTensor> decode_tensors(std::span<const std::uint8_t> bytes) {
  Reader in(bytes);
  const auto magic = in.take(4);
  require(std::memcmp(magic.data(), "TRFM", 4) == 0, ErrorCode::BadWeightFile, "weight file has wrong magic");
  const auto version = in.get<std::uint32_t>();
  require(version == kWeightFileVersion, ErrorCode::BadWeightFile,
          "unsupported weight file version " + std::to_string(version));
  const auto count = in.get<std::uint32_t>();
  std::vector<NamedTensor> out;
  for (std::uint32_t k = 0; k < count; ++k) {
    const auto name_len = in.get<std::uint16_t>();
    const auto name = in.take(name_len);
    const auto rank = in.get<std::uint8_t>();
    Shape shape(rank);
    std::size_t elements = 1;
    for (auto& d : shape) {
      d = in.get<std::uint32_t>();
      require(d == 0 || elements <= bytes.size() / d, ErrorCode::BadWeightFile, "tensor larger than the file");
      elements *= d;
    }
    const auto payload = in.take(elements * 4);
    std::vector<double> data(elements);
    for (std::size_t e = 0; e < elements; ++e) {
      std::uint32_t raw = 0;
      for (std::size_t b = 0; b < 4; ++b) {
        raw |= static_cast<std::uint32_t>(payload[e * 4 + b]) << (8 * b);
      }
      data[e] = static_cast<double>(std::bit_cast<float>(raw));
    }
    out.push_back({std::string(name.begin(), name.end()), Tensor(std::move(shape), std::move(data))});
  }
  require(in.done(), ErrorCode::BadWeightFile, "trailing bytes after the last tensor");
  return out;
}

void save_tensors(const std::filesystem::path& path, std::span<const NamedTensor> tensors) {
  const auto bytes = encode_tensors(tensors);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  require(static_cast<bool>(out), ErrorCode::IoError, "write failed for " + path.string());
}

std::vector<NamedTensor> load_tensors(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::IoError, "cannot open " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_tensors(bytes);
}

void save_parameters(const std::filesystem::path& path, std::span<const Parameter* const> params) {
  std::vector<NamedTensor> tensors;
  for (const Parameter* p : params) {
    tensors.push_back({p->name, p->value});
  }
  save_tensors(path, tensors);
}

void load_parameters(const std::filesystem::path& path, std::span<Parameter* const> params) {
  std::map<std::string, Tensor> by_name;
  for (NamedTensor& t : load_tensors(path)) {
    by_name.emplace(t.name, std::move(t.value));
  }
  for (Parameter* p : params) {
    const auto it = by_name.find(p->name);
    require(it != by_name.end(), ErrorCode::BadWeightFile, path.string() + " lacks tensor " + p->name);
    require(it->second.shape() == p->value.shape(), ErrorCode::BadWeightFile,
            p->name + " has shape " + shape_string(it->second.shape()) + ", expected " +
                shape_string(p->value.shape()));
    p->value = it->second;
  }
}

void round_to_storage(std::span<Parameter* const> params) {
  for (Parameter* p : params) {
    for (double& v : p->value.mutable_data()) {
      v = static_cast<double>(static_cast<float>(v));
    }
  }
}

}  // namespace toporeform::models
