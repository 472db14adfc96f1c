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

#include "toporeform/autodiff/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "toporeform/autodiff/graph.hpp"
#include "toporeform/error.hpp"

namespace toporeform {

namespace {

struct Range {
  double lo;
  double hi;
};

Range sampling_range(OpKind kind) {
  switch (kind) {
    case OpKind::exp:
    case OpKind::sigmoid:
    case OpKind::tanh:
      return {-2.0, 2.0};
    case OpKind::clip01:
      return {-0.5, 1.5};
    default:
      return {-1.0, 1.0};
  }
}

bool near_kink(OpKind kind, const std::vector<Tensor>& inputs, double margin) {
  const Tensor& x = inputs.front();
  switch (kind) {
    case OpKind::relu:
      return std::any_of(x.data().begin(), x.data().end(), [&](double v) { return std::abs(v) < margin; });
    case OpKind::clip01:
      return std::any_of(x.data().begin(), x.data().end(),
                         [&](double v) { return std::abs(v) < margin || std::abs(v - 1.0) < margin; });
    case OpKind::maxpool2x2: {
      const std::size_t planes = x.dim(0) * x.dim(1), h = x.dim(2), w = x.dim(3);
      for (std::size_t p = 0; p < planes; ++p) {
        for (std::size_t oy = 0; oy + 1 < h; oy += 2) {
          for (std::size_t ox = 0; ox + 1 < w; ox += 2) {
            std::array<double, 4> win{};
            for (std::size_t d = 0; d < 4; ++d) {
              win[d] = x[p * h * w + (oy + d / 2) * w + ox + d % 2];
            }
            std::sort(win.begin(), win.end());
            if (win[3] - win[2] < margin) {
              return true;
            }
          }
        }
      }
      return false;
    }
    default:
      return false;
  }
}

double contracted(OpKind kind, const std::vector<Tensor>& inputs, const ops::OpAttrs& attrs,
                  const std::vector<double>& direction) {
  Tape scratch;
  const Tensor out = ops::forward(scratch, kind, inputs, attrs);
  double sum = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    sum += out[i] * direction[i];
  }
  return sum;
}

double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max(1.0, std::abs(analytic));
}

}  // namespace

double finite_diff_check(OpKind kind, const std::vector<Shape>& input_shapes, std::uint64_t seed,
                         const ops::OpAttrs& attrs_in, const GradCheckOptions& options) {
  std::mt19937_64 rng(seed);
  const Range range = sampling_range(kind);
  std::uniform_real_distribution<double> uniform(range.lo, range.hi);

  ops::OpAttrs attrs = attrs_in;
  if (kind == OpKind::softmax_cross_entropy && attrs.labels.empty() && !input_shapes.empty()) {
    std::uniform_int_distribution<int> label(0, static_cast<int>(input_shapes[0].at(1)) - 1);
    for (std::size_t b = 0; b < input_shapes[0].at(0); ++b) {
      attrs.labels.push_back(label(rng));
    }
  }
  if (kind == OpKind::reshape && attrs.shape.empty() && !input_shapes.empty()) {
    attrs.shape = {element_count(input_shapes[0])};
  }

  std::vector<Tensor> inputs;
  bool found = false;
  for (int attempt = 0; attempt < options.max_attempts && !found; ++attempt) {
    inputs.clear();
    for (const Shape& s : input_shapes) {
      std::vector<double> v(element_count(s));
      for (double& x : v) {
        x = uniform(rng);
      }
      inputs.emplace_back(s, std::move(v));
    }
    found = inputs.empty() || !near_kink(kind, inputs, options.kink_margin);
  }
  if (!found) {
    fail(ErrorCode::KinkUnavoidable, "finite_diff_check: no kink-free sample for " + std::string(op_name(kind)));
  }

  Tape tape;
  std::vector<Tensor> leaves;
  for (const Tensor& t : inputs) {
    leaves.push_back(tape.leaf(t));
  }
  const Tensor out = ops::forward(tape, kind, leaves, attrs);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> direction(out.size());
  for (double& d : direction) {
    d = normal(rng);
  }
  const Gradients grads = vjp(tape, out, direction);

  double worst = 0.0;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const Tensor analytic = grads.of(leaves[k]);
    for (std::size_t i = 0; i < inputs[k].size(); ++i) {
      std::vector<Tensor> probe = inputs;
      const double original = inputs[k][i];
      probe[k].mutable_data()[i] = original + options.step;
      const double up = contracted(kind, probe, attrs, direction);
      probe[k].mutable_data()[i] = original - options.step;
      const double down = contracted(kind, probe, attrs, direction);
      const double numeric = (up - down) / (2.0 * options.step);
      worst = std::max(worst, relative_error(analytic[i], numeric));
    }
  }
  return worst;
}

std::vector<OpCheckCase> standard_op_cases() {
  std::vector<OpCheckCase> cases;
  cases.push_back({OpKind::add, {{3, 4}, {3, 4}}, {}, "add"});
  cases.push_back({OpKind::add, {{3, 4}, {4}}, {}, "add (bias broadcast)"});
  cases.push_back({OpKind::sub, {{3, 4}, {3, 4}}, {}, "sub"});
  cases.push_back({OpKind::mul, {{3, 4}, {3, 4}}, {}, "mul"});
  cases.push_back({OpKind::mul, {{3, 4}, {1}}, {}, "mul (scalar broadcast)"});
  cases.push_back({OpKind::matmul, {{3, 4}, {4, 2}}, {}, "matmul"});
  ops::OpAttrs valid;
  valid.padding = ops::Padding::valid;
  cases.push_back({OpKind::conv2d, {{2, 2, 5, 5}, {3, 2, 3, 3}, {3}}, valid, "conv2d (valid)"});
  ops::OpAttrs same;
  same.padding = ops::Padding::same;
  cases.push_back({OpKind::conv2d, {{2, 2, 5, 5}, {3, 2, 3, 3}, {3}}, same, "conv2d (same)"});
  cases.push_back({OpKind::maxpool2x2, {{2, 2, 4, 4}}, {}, "maxpool2x2"});
  cases.push_back({OpKind::relu, {{4, 4}}, {}, "relu"});
  cases.push_back({OpKind::sigmoid, {{4, 4}}, {}, "sigmoid"});
  cases.push_back({OpKind::tanh, {{4, 4}}, {}, "tanh"});
  cases.push_back({OpKind::exp, {{4, 4}}, {}, "exp"});
  ops::OpAttrs flat;
  flat.shape = {6, 4};
  cases.push_back({OpKind::reshape, {{2, 3, 4}}, flat, "reshape"});
  ops::OpAttrs axis1;
  axis1.axis = 1;
  cases.push_back({OpKind::concat, {{3, 2}, {3, 4}}, axis1, "concat"});
  cases.push_back({OpKind::mse, {{3, 4}, {3, 4}}, {}, "mse"});
  cases.push_back({OpKind::softmax_cross_entropy, {{4, 10}}, {}, "softmax_cross_entropy"});
  cases.push_back({OpKind::gaussian_kl, {{3, 5}, {3, 5}}, {}, "gaussian_kl"});
  cases.push_back({OpKind::reparameterize, {{3, 5}, {3, 5}, {3, 5}}, {}, "reparameterize"});
  cases.push_back({OpKind::clip01, {{4, 4}}, {}, "clip01"});
  return cases;
}

double mlp_gradient_check(std::uint64_t seed, const GradCheckOptions& options) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 0.5);
  auto random_tensor = [&](Shape s) {
    std::vector<double> v(element_count(s));
    for (double& x : v) {
      x = normal(rng);
    }
    return Tensor(std::move(s), std::move(v));
  };
  constexpr std::size_t kBatch = 5, kIn = 6, kHidden = 8, kClasses = 4;
  std::vector<Parameter> params = {
      {"w1", random_tensor({kIn, kHidden})},     {"b1", random_tensor({kHidden})},
      {"w2", random_tensor({kHidden, kHidden})}, {"b2", random_tensor({kHidden})},
      {"w3", random_tensor({kHidden, kClasses})}, {"b3", random_tensor({kClasses})},
  };
  const Tensor x = random_tensor({kBatch, kIn});
  std::vector<int> labels(kBatch);
  std::uniform_int_distribution<int> label(0, kClasses - 1);
  for (int& y : labels) {
    y = label(rng);
  }

  auto loss_of = [&](Graph& g) {
    Tape& t = g.tape();
    Tensor h = ops::tanh(t, ops::add(t, ops::matmul(t, x, g.bind(params[0])), g.bind(params[1])));
    h = ops::sigmoid(t, ops::add(t, ops::matmul(t, h, g.bind(params[2])), g.bind(params[3])));
    const Tensor logits = ops::add(t, ops::matmul(t, h, g.bind(params[4])), g.bind(params[5]));
    return ops::softmax_cross_entropy(t, logits, labels);
  };

  Graph graph;
  const Tensor loss = loss_of(graph);
  std::vector<Parameter*> ptrs;
  for (Parameter& p : params) {
    ptrs.push_back(&p);
  }
  const std::vector<Tensor> analytic = graph.parameter_gradients(ptrs, backward(graph.tape(), loss));

  double worst = 0.0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    for (std::size_t i = 0; i < params[k].value.size(); ++i) {
      const double original = params[k].value[i];
      params[k].value.mutable_data()[i] = original + options.step;
      Graph up(Graph::Mode::inference);
      const double f_up = loss_of(up).item();
      params[k].value.mutable_data()[i] = original - options.step;
      Graph down(Graph::Mode::inference);
      const double f_down = loss_of(down).item();
      params[k].value.mutable_data()[i] = original;
      worst = std::max(worst, relative_error(analytic[k][i], (f_up - f_down) / (2.0 * options.step)));
    }
  }
  return worst;
}

}  // namespace toporeform
