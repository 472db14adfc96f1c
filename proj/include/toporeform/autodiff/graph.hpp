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

#include <span>
#include <unordered_map>
#include <vector>

#include "toporeform/autodiff/optim.hpp"
#include "toporeform/autodiff/tape.hpp"

namespace toporeform {

/// A tape plus the parameter bindings of one forward pass.
///
/// In training mode an unfrozen parameter becomes a leaf node the first time
/// it is bound; frozen parameters, and every parameter in inference mode, are
/// bound as detached constants so no backward work is spent on them.
class Graph {
 public:
  enum class Mode { training, inference };

  explicit Graph(Mode mode = Mode::training) : mode_(mode) {}

  Tape& tape() noexcept { return tape_; }
  const Tape& tape() const noexcept { return tape_; }
  Mode mode() const noexcept { return mode_; }

  Tensor bind(const Parameter& p);
  Tensor input(const Tensor& value, bool track);

  /// Gradients aligned with `params`; zero tensors for parameters that were
  /// frozen or never bound.
  std::vector<Tensor> parameter_gradients(std::span<Parameter* const> params, const Gradients& grads) const;

 private:
  Mode mode_;
  Tape tape_;
  std::unordered_map<const Parameter*, Tensor> bound_;
};

}  // namespace toporeform
