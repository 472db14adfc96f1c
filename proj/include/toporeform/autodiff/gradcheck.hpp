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
#include <vector>

#include "toporeform/autodiff/ops.hpp"

namespace toporeform {

struct GradCheckOptions {
  double step = 1e-5;
  /// Inputs closer than this to a relu/clip01 kink, or maxpool windows whose
  /// two largest entries are closer than this, are resampled. Must exceed
  /// `step` so the central difference never straddles the kink.
  double kink_margin = 1e-4;
  int max_attempts = 100;
};

/// Central-difference check of one op at a random point.
///
/// The op output is contracted with a random direction so the check covers
/// the full vector-Jacobian product. Returns the max over all input
/// coordinates of |analytic - numeric| / max(1, |analytic|). Throws
/// KinkUnavoidable if no kink-free point is found within max_attempts.
double finite_diff_check(OpKind kind, const std::vector<Shape>& input_shapes, std::uint64_t seed,
                         const ops::OpAttrs& attrs = {}, const GradCheckOptions& options = {});

/// Input shapes and attributes used for each op in the standard sweep.
struct OpCheckCase {
  OpKind kind;
  std::vector<Shape> shapes;
  ops::OpAttrs attrs;
  const char* label;
};
std::vector<OpCheckCase> standard_op_cases();

/// Same relative-error measure over every parameter of a random
/// three-layer MLP trained with softmax cross-entropy.
double mlp_gradient_check(std::uint64_t seed, const GradCheckOptions& options = {});

}  // namespace toporeform
