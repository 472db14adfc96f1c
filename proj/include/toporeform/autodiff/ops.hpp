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
#include <vector>

#include "toporeform/autodiff/tape.hpp"
#include "toporeform/autodiff/tensor.hpp"

namespace toporeform::ops {

enum class Padding { valid, same };

/// Attributes for the generic `forward` dispatcher. Each op reads only the
/// fields it needs.
struct OpAttrs {
  Padding padding = Padding::valid;
  std::vector<int> labels;  // softmax_cross_entropy
  Shape shape;              // reshape
  std::size_t axis = 1;     // concat
};

// Every op checks its inputs for NaN/Inf (NonFinite) and shape validity
// (ShapeMismatch). A node is recorded on the tape only when at least one
// input is tracked; otherwise the result is a detached constant.

/// Elementwise with suffix broadcasting: the smaller operand must have a
/// shape equal to the trailing dimensions of the larger one, or a single
/// element.
Tensor add(Tape& tape, const Tensor& a, const Tensor& b);
Tensor sub(Tape& tape, const Tensor& a, const Tensor& b);
Tensor mul(Tape& tape, const Tensor& a, const Tensor& b);

/// [M,K] x [K,N] -> [M,N].
Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b);

/// Stride-1 cross-correlation. x [B,C,H,W], weight [O,C,K,K], optional bias
/// [O] (pass an empty-shaped default Tensor to omit). "same" needs odd K.
Tensor conv2d(Tape& tape, const Tensor& x, const Tensor& weight, const Tensor& bias,
              Padding padding);
Tensor conv2d(Tape& tape, const Tensor& x, const Tensor& weight, Padding padding);

/// 2x2 window, stride 2, on [B,C,H,W]; odd trailing rows/cols are dropped.
Tensor maxpool2x2(Tape& tape, const Tensor& x);

Tensor relu(Tape& tape, const Tensor& x);
Tensor sigmoid(Tape& tape, const Tensor& x);
Tensor tanh(Tape& tape, const Tensor& x);
/// Exponent clamped at 700 so finite inputs give finite outputs.
Tensor exp(Tape& tape, const Tensor& x);
Tensor clip01(Tape& tape, const Tensor& x);

Tensor reshape(Tape& tape, const Tensor& x, const Shape& shape);
Tensor concat(Tape& tape, std::span<const Tensor> inputs, std::size_t axis);

/// Mean of squared differences over all elements.
Tensor mse(Tape& tape, const Tensor& a, const Tensor& b);
/// Batch-mean cross-entropy of logits [B,C] against integer labels.
Tensor softmax_cross_entropy(Tape& tape, const Tensor& logits, std::span<const int> labels);
/// Batch-mean of -1/2 sum(1 + logvar - mu^2 - exp(logvar)); inputs [B,d].
Tensor gaussian_kl(Tape& tape, const Tensor& mu, const Tensor& logvar);
/// mu + exp(logvar / 2) * noise, with caller-supplied noise.
Tensor reparameterize(Tape& tape, const Tensor& mu, const Tensor& logvar, const Tensor& noise);

/// Splices a hand-written op into the tape. `value` is the already computed
/// output; `rule` receives the upstream gradient and one slot per input.
Tensor custom(Tape& tape, std::span<const Tensor* const> inputs, Tensor value, BackwardRule rule);

/// Generic entry point over the built-in op kinds (UnsupportedOp for leaf
/// and custom). conv2d takes 2 or 3 inputs.
Tensor forward(Tape& tape, OpKind kind, std::span<const Tensor> inputs, const OpAttrs& attrs = {});

}  // namespace toporeform::ops
