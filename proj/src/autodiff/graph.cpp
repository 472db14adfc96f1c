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

#include "toporeform/autodiff/graph.hpp"

namespace toporeform {

Tensor Graph::bind(const Parameter& p) {
  if (mode_ == Mode::inference || p.frozen) {
    return p.value.detached();
  }
  auto it = bound_.find(&p);
  if (it != bound_.end()) {
    return it->second;
  }
  Tensor leaf = tape_.leaf(p.value);
  bound_.emplace(&p, leaf);
  return leaf;
}

Tensor Graph::input(const Tensor& value, bool track) {
  return track ? tape_.leaf(value) : value.detached();
}

std::vector<Tensor> Graph::parameter_gradients(std::span<Parameter* const> params, const Gradients& grads) const {
  std::vector<Tensor> out;
  out.reserve(params.size());
  for (const Parameter* p : params) {
    auto it = bound_.find(p);
    out.push_back(it == bound_.end() ? Tensor(p->value.shape(), 0.0) : grads.of(it->second));
  }
  return out;
}

}  // namespace toporeform
