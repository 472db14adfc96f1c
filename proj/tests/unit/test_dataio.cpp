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

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <numeric>
#include <random>
#include <set>

#include "toporeform/dataio/batching.hpp"
#include "toporeform/dataio/dataset.hpp"
#include "toporeform/dataio/synthetic.hpp"
#include "toporeform/error.hpp"
#include "toporeform/topology/persistence.hpp"

using namespace toporeform;
using namespace toporeform::dataio;

namespace {

std::vector<std::uint8_t> be32(std::uint32_t v) {
  return {static_cast<std::uint8_t>(v >> 24), static_cast<std::uint8_t>(v >> 16), static_cast<std::uint8_t>(v >> 8),
          static_cast<std::uint8_t>(v)};
}

void append(std::vector<std::uint8_t>& out, const std::vector<std::uint8_t>& more) {
  out.insert(out.end(), more.begin(), more.end());
}

// Two images written byte by byte: image 0 is black except 255 at (3, 5);
// image 1 is white except 0 at (27, 0).
struct Fixture {
  std::vector<std::uint8_t> images;
  std::vector<std::uint8_t> labels;
};

Fixture handcrafted() {
  Fixture f;
  append(f.images, be32(0x00000803));
  append(f.images, be32(2));
  append(f.images, be32(28));
  append(f.images, be32(28));
  std::vector<std::uint8_t> first(784, 0), second(784, 255);
  first[3 * 28 + 5] = 255;
  second[27 * 28 + 0] = 0;
  append(f.images, first);
  append(f.images, second);
  append(f.labels, be32(0x00000801));
  append(f.labels, be32(2));
  f.labels.push_back(7);
  f.labels.push_back(2);
  return f;
}

ErrorCode code_of(const Fixture& f, const IdxOptions& opts = {}) {
  try {
    parse_idx(f.images, f.labels, opts);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected a typed error";
  return ErrorCode::InvalidArgument;
}

Dataset toy_dataset(std::size_t n) {
  Dataset d;
  d.class_count = 10;
  std::vector<double> px(n * 784);
  for (std::size_t i = 0; i < n; ++i) {
    std::fill_n(px.begin() + static_cast<std::ptrdiff_t>(i * 784), 784, static_cast<double>(i) / 255.0);
    d.labels.push_back(static_cast<int>(i % 10));
  }
  d.images = Tensor({n, 1, 28, 28}, std::move(px));
  return d;
}

}  // namespace

TEST(LoadIdx, HandcraftedFixtureIsBitExact) {
  const Fixture f = handcrafted();
  const Dataset d = parse_idx(f.images, f.labels);
  ASSERT_EQ(d.images.shape(), (Shape{2, 1, 28, 28}));
  EXPECT_EQ(d.labels, (std::vector<int>{7, 2}));
  EXPECT_EQ(d.class_count, 8);
  for (std::size_t k = 0; k < 784; ++k) {
    const double expect0 = k == 3 * 28 + 5 ? 1.0 : 0.0;
    const double expect1 = k == 27 * 28 ? 0.0 : 1.0;
    ASSERT_EQ(d.images[k], expect0) << k;
    ASSERT_EQ(d.images[784 + k], expect1) << k;
  }
}

TEST(LoadIdx, ReadsFromDiskAndRoundTripsThroughWriters) {
  const Fixture f = handcrafted();
  const auto dir = std::filesystem::temp_directory_path() / "toporeform_idx_test";
  std::filesystem::create_directories(dir);
  write_file(dir / "img", f.images);
  write_file(dir / "lbl", f.labels);
  const Dataset d = load_idx(dir / "img", dir / "lbl");
  EXPECT_EQ(encode_idx_images(d.images), f.images);
  EXPECT_EQ(encode_idx_labels(d.labels), f.labels);
  EXPECT_THROW(
      {
        try {
          load_idx(dir / "missing", dir / "lbl");
        } catch (const Error& e) {
          EXPECT_EQ(e.code(), ErrorCode::IoError);
          throw;
        }
      },
      Error);
}

TEST(LoadIdx, LabelsWithImageMagicAreRejected) {
  Fixture f = handcrafted();
  f.labels[3] = 0x03;
  EXPECT_EQ(code_of(f), ErrorCode::BadMagic);
  Fixture g = handcrafted();
  g.images[2] = 0x09;
  EXPECT_EQ(code_of(g), ErrorCode::BadMagic);
}

TEST(LoadIdx, WrongSideLengthIsDimMismatch) {
  Fixture f = handcrafted();
  f.images[11] = 27;
  EXPECT_EQ(code_of(f), ErrorCode::DimMismatch);
}

TEST(LoadIdx, CountDisagreementAndTrailingBytesAreDimMismatch) {
  Fixture f = handcrafted();
  f.labels[7] = 1;
  EXPECT_EQ(code_of(f), ErrorCode::DimMismatch);
  Fixture g = handcrafted();
  g.images.push_back(0);
  EXPECT_EQ(code_of(g), ErrorCode::DimMismatch);
}

TEST(LoadIdx, LettersAreShiftedToZeroBased) {
  Fixture f = handcrafted();
  f.labels[8] = 1;
  f.labels[9] = 26;
  const Dataset d = parse_idx(f.images, f.labels, {.label_offset = 1, .class_count = 26});
  EXPECT_EQ(d.labels, (std::vector<int>{0, 25}));
  f.labels[8] = 0;
  EXPECT_EQ(code_of(f, {.label_offset = 1, .class_count = 26}), ErrorCode::LabelOutOfRange);
  f.labels[8] = 27;
  EXPECT_EQ(code_of(f, {.label_offset = 1, .class_count = 26}), ErrorCode::LabelOutOfRange);
}

TEST(LoadIdx, TransposeSwapsRowsAndColumns) {
  const Fixture f = handcrafted();
  const Dataset d = parse_idx(f.images, f.labels, {.transpose = true});
  EXPECT_EQ(d.images[5 * 28 + 3], 1.0);
  EXPECT_EQ(d.images[3 * 28 + 5], 0.0);
}

TEST(LoadIdx, EveryTruncationIsTyped) {
  const Fixture f = handcrafted();
  for (std::size_t len = 0; len < f.images.size(); ++len) {
    Fixture g = f;
    g.images.resize(len);
    const ErrorCode c = code_of(g);
    ASSERT_TRUE(c == ErrorCode::TruncatedFile || c == ErrorCode::DimMismatch) << len;
  }
  for (std::size_t len = 0; len < f.labels.size(); ++len) {
    Fixture g = f;
    g.labels.resize(len);
    EXPECT_EQ(code_of(g), ErrorCode::TruncatedFile) << len;
  }
}

TEST(LoadIdx, RandomHeaderCorruptionNeverCrashes) {
  const Fixture f = handcrafted();
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 2000; ++trial) {
    Fixture g = f;
    const int flips = 1 + static_cast<int>(rng() % 4);
    for (int k = 0; k < flips; ++k) {
      auto& target = rng() % 2 ? g.images : g.labels;
      const std::size_t header = &target == &g.images ? 16 : 8;
      target[rng() % header] = static_cast<std::uint8_t>(rng());
    }
    try {
      const Dataset d = parse_idx(g.images, g.labels);
      // Survivors must still satisfy every invariant.
      ASSERT_EQ(d.images.dim(0), d.labels.size());
      for (int label : d.labels) {
        ASSERT_LT(label, d.class_count);
      }
    } catch (const Error&) {
    }
  }
}

TEST(Batches, PartitionDropsSingletonTail) {
  const Dataset d = toy_dataset(10);
  const auto epoch = batches(d, {.seed = 1, .batch_size = 4}, 0);
  ASSERT_EQ(epoch.size(), 3u);
  EXPECT_EQ(epoch.indices(0).size(), 4u);
  EXPECT_EQ(epoch.indices(1).size(), 4u);
  EXPECT_EQ(epoch.indices(2).size(), 2u);
  const Dataset eleven = toy_dataset(11);
  const auto dropped = batches(eleven, {.seed = 1, .batch_size = 5}, 0);
  EXPECT_EQ(dropped.size(), 2u);
}

TEST(Batches, SameSeedAndEpochGiveSameOrder) {
  const Dataset d = toy_dataset(50);
  const auto a = batches(d, {.seed = 7, .batch_size = 8}, 3);
  const auto b = batches(d, {.seed = 7, .batch_size = 8}, 3);
  const auto c = batches(d, {.seed = 7, .batch_size = 8}, 4);
  EXPECT_EQ(a.order(), b.order());
  EXPECT_NE(a.order(), c.order());
}

TEST(Batches, EveryIndexAppearsExactlyOncePerEpoch) {
  const Dataset d = toy_dataset(64);
  for (std::uint64_t epoch = 0; epoch < 5; ++epoch) {
    std::vector<int> seen(64, 0);
    for (const Batch& b : batches(d, {.seed = 11, .batch_size = 8}, epoch)) {
      for (std::size_t k = 0; k < b.indices.size(); ++k) {
        const std::size_t i = b.indices[k];
        ++seen[i];
        EXPECT_EQ(b.labels[k], d.labels[i]);
        EXPECT_EQ(b.images[k * 784], d.images[i * 784]);
      }
    }
    EXPECT_TRUE(std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; }));
  }
}

TEST(SyntheticClouds, LineReproducesHandMstCase) {
  const auto cloud = synthetic_clouds(CloudKind::line, 3, 1, 0);
  EXPECT_EQ(std::vector<double>(cloud.coords().begin(), cloud.coords().end()), (std::vector<double>{0, 1, 3}));
  const auto p = topology::persistence0(topology::pairwise_distances(cloud));
  ASSERT_EQ(p.pairing.edges.size(), 2u);
  EXPECT_EQ(p.pairing.edges[0], (topology::Edge{0, 1}));
  EXPECT_EQ(p.pairing.edges[1], (topology::Edge{1, 2}));
  EXPECT_EQ(p.diagram.bars[0].death, 1.0);
  EXPECT_EQ(p.diagram.bars[1].death, 2.0);
}

TEST(SyntheticClouds, LongestBlobEdgesBridgeClusters) {
  const std::size_t k = 4, n = 40, dims = 3;
  const auto cloud = synthetic_clouds(CloudKind::blobs, n, dims, 5, {.clusters = k, .separation = 100.0});
  const auto dist = topology::pairwise_distances(cloud);
  const auto p = topology::persistence0(dist);
  // Centres sit on a line, so the bridges join consecutive clusters at
  // their closest cross pair.
  std::vector<double> gaps;
  for (std::size_t c = 0; c + 1 < k; ++c) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = c; i < n; i += k) {
      for (std::size_t j = c + 1; j < n; j += k) {
        best = std::min(best, dist(i, j));
      }
    }
    gaps.push_back(best);
  }
  std::sort(gaps.begin(), gaps.end());
  std::vector<double> deaths;
  for (const auto& bar : p.diagram.bars) {
    deaths.push_back(bar.death);
  }
  std::sort(deaths.begin(), deaths.end());
  const std::vector<double> longest(deaths.end() - static_cast<std::ptrdiff_t>(k - 1), deaths.end());
  EXPECT_EQ(longest, gaps);
}

TEST(SyntheticClouds, SameSeedIsBitIdentical) {
  for (CloudKind kind : {CloudKind::blobs, CloudKind::circle, CloudKind::line}) {
    const auto a = synthetic_clouds(kind, 30, 4, 123);
    const auto b = synthetic_clouds(kind, 30, 4, 123);
    EXPECT_TRUE(std::equal(a.coords().begin(), a.coords().end(), b.coords().begin()));
  }
  const auto ring = synthetic_clouds(CloudKind::circle, 200, 2, 9);
  for (std::size_t i = 0; i < 200; ++i) {
    const double r = std::hypot(ring.row(i)[0], ring.row(i)[1]);
    EXPECT_NEAR(r, 1.0, 0.3);
  }
}
