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
#include <span>
#include <vector>

namespace toporeform::metrics {

/// counts[t * classes + p]: rows are true classes, columns predictions.
struct ConfusionMatrix {
  int classes = 0;
  std::vector<std::uint64_t> counts;

  std::uint64_t at(int truth, int predicted) const { return counts[truth * classes + predicted]; }
  std::uint64_t total() const noexcept;
};

ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> predicted, int classes);

enum class Averaging { macro, weighted };

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::uint64_t support = 0;
};

/// Zero-denominator ratios count as 0.
std::vector<ClassScores> per_class_scores(const ConfusionMatrix& cm);

struct Scores {
  double accuracy = 0.0;
  double precision = 0.0;
  double f1 = 0.0;
};

/// Macro averaging takes the unweighted mean over all classes, including
/// classes absent from both truth and predictions. Weighted averaging
/// weights each class by its support.
Scores macro_scores(const ConfusionMatrix& cm, Averaging averaging = Averaging::macro);

}  // namespace toporeform::metrics
