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

#include "toporeform/metrics/metrics.hpp"

#include <numeric>
#include <string>

#include "toporeform/error.hpp"

namespace toporeform::metrics {

namespace {

double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

}  // namespace

std::uint64_t ConfusionMatrix::total() const noexcept {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> predicted, int classes) {
  require(classes > 0, ErrorCode::InvalidArgument, "confusion needs at least one class");
  require(truth.size() == predicted.size(), ErrorCode::LengthMismatch,
          "confusion: " + std::to_string(truth.size()) + " labels vs " + std::to_string(predicted.size()) +
              " predictions");
  ConfusionMatrix cm{classes, std::vector<std::uint64_t>(static_cast<std::size_t>(classes) * classes, 0)};
  for (std::size_t k = 0; k < truth.size(); ++k) {
    const int t = truth[k];
    const int p = predicted[k];
    require(t >= 0 && t < classes && p >= 0 && p < classes, ErrorCode::LabelOutOfRange,
            "confusion: label pair (" + std::to_string(t) + ", " + std::to_string(p) + ") outside " +
                std::to_string(classes) + " classes");
    ++cm.counts[static_cast<std::size_t>(t) * classes + p];
  }
  return cm;
}

std::vector<ClassScores> per_class_scores(const ConfusionMatrix& cm) {
  std::vector<ClassScores> out(cm.classes);
  for (int c = 0; c < cm.classes; ++c) {
    double row = 0.0, col = 0.0;
    for (int k = 0; k < cm.classes; ++k) {
      row += static_cast<double>(cm.at(c, k));
      col += static_cast<double>(cm.at(k, c));
    }
    const double tp = static_cast<double>(cm.at(c, c));
    ClassScores& s = out[c];
    s.precision = ratio(tp, col);
    s.recall = ratio(tp, row);
    s.f1 = ratio(2.0 * s.precision * s.recall, s.precision + s.recall);
    s.support = static_cast<std::uint64_t>(row);
  }
  return out;
}

Scores macro_scores(const ConfusionMatrix& cm, Averaging averaging) {
  const std::uint64_t total = cm.total();
  require(total > 0, ErrorCode::EmptyMatrix, "macro_scores on an empty confusion matrix");
  const auto classes = per_class_scores(cm);
  Scores out;
  double trace = 0.0;
  for (int c = 0; c < cm.classes; ++c) {
    trace += static_cast<double>(cm.at(c, c));
  }
  out.accuracy = trace / static_cast<double>(total);
  double weight_sum = 0.0;
  for (const ClassScores& s : classes) {
    const double w = averaging == Averaging::macro ? 1.0 : static_cast<double>(s.support);
    out.precision += w * s.precision;
    out.f1 += w * s.f1;
    weight_sum += w;
  }
  out.precision /= weight_sum;
  out.f1 /= weight_sum;
  return out;
}

}  // namespace toporeform::metrics
