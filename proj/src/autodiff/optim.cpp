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

#include "toporeform/autodiff/optim.hpp"

#include <cmath>

#include "toporeform/error.hpp"

namespace toporeform {

void adam_step(std::span<Parameter* const> params, std::span<const Tensor> grads, AdamState& state,
               const AdamOptions& options) {
  require(params.size() == grads.size(), ErrorCode::ShapeMismatch, "adam_step: parameter/gradient count differs");
  if (state.first_moment.empty()) {
    for (const Parameter* p : params) {
      state.first_moment.emplace_back(p->value.shape(), 0.0);
      state.second_moment.emplace_back(p->value.shape(), 0.0);
    }
  }
  require(state.first_moment.size() == params.size(), ErrorCode::ShapeMismatch,
          "adam_step: state was created for a different parameter list");
  for (std::size_t k = 0; k < params.size(); ++k) {
    require(params[k]->value.shape() == grads[k].shape() && state.first_moment[k].shape() == grads[k].shape(),
            ErrorCode::ShapeMismatch, "adam_step: shape mismatch for " + params[k]->name);
  }

  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const double correction1 = 1.0 - std::pow(options.beta1, t);
  const double correction2 = 1.0 - std::pow(options.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (params[k]->frozen) {
      continue;
    }
    auto m = state.first_moment[k].mutable_data();
    auto v = state.second_moment[k].mutable_data();
    auto p = params[k]->value.mutable_data();
    const auto g = grads[k].data();
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = options.beta1 * m[i] + (1.0 - options.beta1) * g[i];
      v[i] = options.beta2 * v[i] + (1.0 - options.beta2) * g[i] * g[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      p[i] -= options.lr * m_hat / (std::sqrt(v_hat) + options.eps);
    }
  }
}

}  // namespace toporeform
