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

#include "toporeform/autodiff/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "toporeform/error.hpp"

namespace toporeform::ops {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

constexpr double kExpClamp = 700.0;

double safe_exp(double v) { return std::exp(std::min(v, kExpClamp)); }

void check_finite(std::string_view op, const Tensor& t) {
  if (!t.all_finite()) {
    fail(ErrorCode::NonFinite, std::string(op) + ": input contains NaN or Inf");
  }
}

[[noreturn]] void shape_error(std::string_view op, const std::string& what) {
  fail(ErrorCode::ShapeMismatch, std::string(op) + ": " + what);
}

bool any_tracked(std::initializer_list<const Tensor*> inputs) {
  return std::any_of(inputs.begin(), inputs.end(), [](const Tensor* t) { return t->tracked(); });
}

Tensor finish(Tape& tape, OpKind kind, std::initializer_list<const Tensor*> inputs, Tensor out,
              BackwardRule rule) {
  if (!any_tracked(inputs)) {
    return out;
  }
  std::vector<const Tensor*> list(inputs);
  const NodeId id = tape.record(kind, list, out.shape(), std::move(rule));
  return out.with_node(id);
}

// ---------------------------------------------------------------- binary

bool is_suffix(const Shape& small, const Shape& big) {
  if (small.size() > big.size()) {
    return false;
  }
  return std::equal(small.rbegin(), small.rend(), big.rbegin());
}

struct Broadcast {
  Shape out_shape;
  std::size_t a_period;
  std::size_t b_period;
};

Broadcast plan_broadcast(std::string_view op, const Tensor& a, const Tensor& b) {
  if (a.shape() == b.shape()) {
    return {a.shape(), a.size(), b.size()};
  }
  if (b.size() == 1 || is_suffix(b.shape(), a.shape())) {
    return {a.shape(), a.size(), b.size()};
  }
  if (a.size() == 1 || is_suffix(a.shape(), b.shape())) {
    return {b.shape(), a.size(), b.size()};
  }
  shape_error(op, "cannot broadcast " + shape_string(a.shape()) + " with " + shape_string(b.shape()));
}

// Sums a full-size gradient into a periodic (broadcast) slot.
void reduce_into(std::vector<double>& slot, std::span<const double> full, double sign) {
  const std::size_t period = slot.size();
  for (std::size_t i = 0; i < full.size(); ++i) {
    slot[i % period] += sign * full[i];
  }
}

enum class BinaryKind { add, sub, mul };

Tensor binary(Tape& tape, BinaryKind kind, const Tensor& a, const Tensor& b) {
  const std::string_view name = kind == BinaryKind::add ? "add" : kind == BinaryKind::sub ? "sub" : "mul";
  check_finite(name, a);
  check_finite(name, b);
  const Broadcast plan = plan_broadcast(name, a, b);
  const std::size_t n = element_count(plan.out_shape);
  std::vector<double> out(n);
  const auto ad = a.data();
  const auto bd = b.data();
  for (std::size_t i = 0; i < n; ++i) {
    const double x = ad[i % plan.a_period];
    const double y = bd[i % plan.b_period];
    out[i] = kind == BinaryKind::add ? x + y : kind == BinaryKind::sub ? x - y : x * y;
  }
  const OpKind op = kind == BinaryKind::add ? OpKind::add : kind == BinaryKind::sub ? OpKind::sub : OpKind::mul;
  Tensor result(plan.out_shape, std::move(out));
  return finish(tape, op, {&a, &b}, std::move(result),
                [kind, a = a.detached(), b = b.detached(), plan](std::span<const double> g, GradSlots slots) {
                  const std::size_t n = g.size();
                  if (slots[0] != nullptr) {
                    if (kind == BinaryKind::mul) {
                      std::vector<double> full(n);
                      for (std::size_t i = 0; i < n; ++i) {
                        full[i] = g[i] * b[i % plan.b_period];
                      }
                      reduce_into(*slots[0], full, 1.0);
                    } else {
                      reduce_into(*slots[0], g, 1.0);
                    }
                  }
                  if (slots[1] != nullptr) {
                    if (kind == BinaryKind::mul) {
                      std::vector<double> full(n);
                      for (std::size_t i = 0; i < n; ++i) {
                        full[i] = g[i] * a[i % plan.a_period];
                      }
                      reduce_into(*slots[1], full, 1.0);
                    } else {
                      reduce_into(*slots[1], g, kind == BinaryKind::sub ? -1.0 : 1.0);
                    }
                  }
                });
}

// ---------------------------------------------------------------- unary

template <typename Fwd, typename Deriv>
Tensor unary(Tape& tape, OpKind kind, const Tensor& x, Fwd fwd, Deriv deriv) {
  check_finite(op_name(kind), x);
  std::vector<double> out(x.size());
  const auto xd = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = fwd(xd[i]);
  }
  Tensor result(x.shape(), std::move(out));
  return finish(tape, kind, {&x}, result,
                [x = x.detached(), y = result, deriv](std::span<const double> g, GradSlots slots) {
                  auto& dx = *slots[0];
                  for (std::size_t i = 0; i < g.size(); ++i) {
                    dx[i] += g[i] * deriv(x[i], y[i]);
                  }
                });
}

// ---------------------------------------------------------------- conv

struct ConvGeometry {
  std::size_t batch, channels, height, width;
  std::size_t out_channels, kernel, pad;
  std::size_t out_height, out_width;
  std::size_t patch() const { return channels * kernel * kernel; }
  std::size_t positions() const { return out_height * out_width; }
};

void im2col(const double* image, const ConvGeometry& g, double* col) {
  const std::size_t positions = g.positions();
  for (std::size_t c = 0; c < g.channels; ++c) {
    const double* plane = image + c * g.height * g.width;
    for (std::size_t ki = 0; ki < g.kernel; ++ki) {
      for (std::size_t kj = 0; kj < g.kernel; ++kj) {
        double* row = col + ((c * g.kernel + ki) * g.kernel + kj) * positions;
        for (std::size_t oy = 0; oy < g.out_height; ++oy) {
          const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy + ki) - static_cast<std::ptrdiff_t>(g.pad);
          double* dst = row + oy * g.out_width;
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.height)) {
            std::fill(dst, dst + g.out_width, 0.0);
            continue;
          }
          const double* src = plane + static_cast<std::size_t>(iy) * g.width;
          for (std::size_t ox = 0; ox < g.out_width; ++ox) {
            const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox + kj) - static_cast<std::ptrdiff_t>(g.pad);
            dst[ox] = (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.width)) ? 0.0 : src[ix];
          }
        }
      }
    }
  }
}

void col2im(const double* col, const ConvGeometry& g, double* image) {
  const std::size_t positions = g.positions();
  for (std::size_t c = 0; c < g.channels; ++c) {
    double* plane = image + c * g.height * g.width;
    for (std::size_t ki = 0; ki < g.kernel; ++ki) {
      for (std::size_t kj = 0; kj < g.kernel; ++kj) {
        const double* row = col + ((c * g.kernel + ki) * g.kernel + kj) * positions;
        for (std::size_t oy = 0; oy < g.out_height; ++oy) {
          const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy + ki) - static_cast<std::ptrdiff_t>(g.pad);
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.height)) {
            continue;
          }
          double* dst = plane + static_cast<std::size_t>(iy) * g.width;
          const double* src = row + oy * g.out_width;
          for (std::size_t ox = 0; ox < g.out_width; ++ox) {
            const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox + kj) - static_cast<std::ptrdiff_t>(g.pad);
            if (ix >= 0 && ix < static_cast<std::ptrdiff_t>(g.width)) {
              dst[ix] += src[ox];
            }
          }
        }
      }
    }
  }
}

}  // namespace

Tensor add(Tape& tape, const Tensor& a, const Tensor& b) { return binary(tape, BinaryKind::add, a, b); }
Tensor sub(Tape& tape, const Tensor& a, const Tensor& b) { return binary(tape, BinaryKind::sub, a, b); }
Tensor mul(Tape& tape, const Tensor& a, const Tensor& b) { return binary(tape, BinaryKind::mul, a, b); }

Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b) {
  check_finite("matmul", a);
  check_finite("matmul", b);
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    shape_error("matmul", shape_string(a.shape()) + " x " + shape_string(b.shape()));
  }
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  std::vector<double> out(m * n);
  MutMap(out.data(), m, n).noalias() = ConstMap(a.raw(), m, k) * ConstMap(b.raw(), k, n);
  return finish(tape, OpKind::matmul, {&a, &b}, Tensor({m, n}, std::move(out)),
                [a = a.detached(), b = b.detached(), m, k, n](std::span<const double> g, GradSlots slots) {
                  ConstMap gm(g.data(), m, n);
                  if (slots[0] != nullptr) {
                    MutMap(slots[0]->data(), m, k).noalias() += gm * ConstMap(b.raw(), k, n).transpose();
                  }
                  if (slots[1] != nullptr) {
                    MutMap(slots[1]->data(), k, n).noalias() += ConstMap(a.raw(), m, k).transpose() * gm;
                  }
                });
}

Tensor conv2d(Tape& tape, const Tensor& x, const Tensor& weight, Padding padding) {
  return conv2d(tape, x, weight, Tensor(), padding);
}

Tensor conv2d(Tape& tape, const Tensor& x, const Tensor& weight, const Tensor& bias, Padding padding) {
  check_finite("conv2d", x);
  check_finite("conv2d", weight);
  check_finite("conv2d", bias);
  if (x.rank() != 4 || weight.rank() != 4 || weight.dim(1) != x.dim(1) || weight.dim(2) != weight.dim(3)) {
    shape_error("conv2d", "input " + shape_string(x.shape()) + " with kernel " + shape_string(weight.shape()));
  }
  const bool has_bias = bias.size() > 0;
  if (has_bias && (bias.rank() != 1 || bias.dim(0) != weight.dim(0))) {
    shape_error("conv2d", "bias " + shape_string(bias.shape()) + " for kernel " + shape_string(weight.shape()));
  }
  ConvGeometry g{};
  g.batch = x.dim(0);
  g.channels = x.dim(1);
  g.height = x.dim(2);
  g.width = x.dim(3);
  g.out_channels = weight.dim(0);
  g.kernel = weight.dim(2);
  if (padding == Padding::same) {
    if (g.kernel % 2 == 0) {
      shape_error("conv2d", "\"same\" padding requires an odd kernel");
    }
    g.pad = (g.kernel - 1) / 2;
    g.out_height = g.height;
    g.out_width = g.width;
  } else {
    if (g.kernel > g.height || g.kernel > g.width) {
      shape_error("conv2d", "kernel larger than input");
    }
    g.pad = 0;
    g.out_height = g.height - g.kernel + 1;
    g.out_width = g.width - g.kernel + 1;
  }

  const std::size_t in_stride = g.channels * g.height * g.width;
  const std::size_t out_stride = g.out_channels * g.positions();
  std::vector<double> out(g.batch * out_stride);
  std::vector<double> col(g.patch() * g.positions());
  ConstMap w(weight.raw(), g.out_channels, g.patch());
  for (std::size_t b = 0; b < g.batch; ++b) {
    im2col(x.raw() + b * in_stride, g, col.data());
    MutMap ob(out.data() + b * out_stride, g.out_channels, g.positions());
    ob.noalias() = w * ConstMap(col.data(), g.patch(), g.positions());
    if (has_bias) {
      for (std::size_t o = 0; o < g.out_channels; ++o) {
        ob.row(o).array() += bias[o];
      }
    }
  }

  Tensor result({g.batch, g.out_channels, g.out_height, g.out_width}, std::move(out));
  return finish(tape, OpKind::conv2d, {&x, &weight, &bias}, std::move(result),
                [x = x.detached(), weight = weight.detached(), g, in_stride, out_stride](
                    std::span<const double> grad, GradSlots slots) {
                  std::vector<double> col(g.patch() * g.positions());
                  std::vector<double> dcol(g.patch() * g.positions());
                  ConstMap w(weight.raw(), g.out_channels, g.patch());
                  for (std::size_t b = 0; b < g.batch; ++b) {
                    ConstMap gb(grad.data() + b * out_stride, g.out_channels, g.positions());
                    if (slots[1] != nullptr) {
                      im2col(x.raw() + b * in_stride, g, col.data());
                      MutMap(slots[1]->data(), g.out_channels, g.patch()).noalias() +=
                          gb * ConstMap(col.data(), g.patch(), g.positions()).transpose();
                    }
                    if (slots[2] != nullptr) {
                      auto& db = *slots[2];
                      for (std::size_t o = 0; o < g.out_channels; ++o) {
                        db[o] += gb.row(o).sum();
                      }
                    }
                    if (slots[0] != nullptr) {
                      MutMap(dcol.data(), g.patch(), g.positions()).noalias() = w.transpose() * gb;
                      col2im(dcol.data(), g, slots[0]->data() + b * in_stride);
                    }
                  }
                });
}

Tensor maxpool2x2(Tape& tape, const Tensor& x) {
  check_finite("maxpool2x2", x);
  if (x.rank() != 4 || x.dim(2) < 2 || x.dim(3) < 2) {
    shape_error("maxpool2x2", "input " + shape_string(x.shape()));
  }
  const std::size_t planes = x.dim(0) * x.dim(1);
  const std::size_t h = x.dim(2), w = x.dim(3), oh = h / 2, ow = w / 2;
  std::vector<double> out(planes * oh * ow);
  std::vector<std::size_t> argmax(out.size());
  const double* xd = x.raw();
  for (std::size_t p = 0; p < planes; ++p) {
    for (std::size_t oy = 0; oy < oh; ++oy) {
      for (std::size_t ox = 0; ox < ow; ++ox) {
        std::size_t best = p * h * w + (2 * oy) * w + 2 * ox;
        for (std::size_t dy = 0; dy < 2; ++dy) {
          for (std::size_t dx = 0; dx < 2; ++dx) {
            const std::size_t idx = p * h * w + (2 * oy + dy) * w + 2 * ox + dx;
            if (xd[idx] > xd[best]) {
              best = idx;
            }
          }
        }
        const std::size_t o = (p * oh + oy) * ow + ox;
        out[o] = xd[best];
        argmax[o] = best;
      }
    }
  }
  return finish(tape, OpKind::maxpool2x2, {&x}, Tensor({x.dim(0), x.dim(1), oh, ow}, std::move(out)),
                [argmax = std::move(argmax)](std::span<const double> g, GradSlots slots) {
                  auto& dx = *slots[0];
                  for (std::size_t i = 0; i < g.size(); ++i) {
                    dx[argmax[i]] += g[i];
                  }
                });
}

Tensor relu(Tape& tape, const Tensor& x) {
  return unary(
      tape, OpKind::relu, x, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor sigmoid(Tape& tape, const Tensor& x) {
  return unary(
      tape, OpKind::sigmoid, x,
      [](double v) {
        if (v >= 0.0) {
          return 1.0 / (1.0 + std::exp(-v));
        }
        const double e = std::exp(v);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor tanh(Tape& tape, const Tensor& x) {
  return unary(
      tape, OpKind::tanh, x, [](double v) { return std::tanh(v); },
      [](double, double y) { return 1.0 - y * y; });
}

Tensor exp(Tape& tape, const Tensor& x) {
  return unary(
      tape, OpKind::exp, x, [](double v) { return safe_exp(v); },
      [](double v, double y) { return v > kExpClamp ? 0.0 : y; });
}

Tensor clip01(Tape& tape, const Tensor& x) {
  return unary(
      tape, OpKind::clip01, x, [](double v) { return std::clamp(v, 0.0, 1.0); },
      [](double v, double) { return (v > 0.0 && v < 1.0) ? 1.0 : 0.0; });
}

Tensor reshape(Tape& tape, const Tensor& x, const Shape& shape) {
  check_finite("reshape", x);
  if (element_count(shape) != x.size()) {
    shape_error("reshape", shape_string(x.shape()) + " -> " + shape_string(shape));
  }
  return finish(tape, OpKind::reshape, {&x}, x.reshaped(shape), [](std::span<const double> g, GradSlots slots) {
    auto& dx = *slots[0];
    for (std::size_t i = 0; i < g.size(); ++i) {
      dx[i] += g[i];
    }
  });
}

Tensor concat(Tape& tape, std::span<const Tensor> inputs, std::size_t axis) {
  if (inputs.empty()) {
    shape_error("concat", "no inputs");
  }
  const Shape& first = inputs.front().shape();
  if (axis >= first.size()) {
    shape_error("concat", "axis out of range for " + shape_string(first));
  }
  Shape out_shape = first;
  out_shape[axis] = 0;
  std::vector<std::size_t> inner;  // contiguous block length per input
  for (const Tensor& t : inputs) {
    check_finite("concat", t);
    if (t.rank() != first.size()) {
      shape_error("concat", "rank mismatch");
    }
    for (std::size_t d = 0; d < first.size(); ++d) {
      if (d != axis && t.dim(d) != first[d]) {
        shape_error("concat", shape_string(t.shape()) + " vs " + shape_string(first));
      }
    }
    out_shape[axis] += t.dim(axis);
    std::size_t block = 1;
    for (std::size_t d = axis; d < first.size(); ++d) {
      block *= t.dim(d);
    }
    inner.push_back(block);
  }
  std::size_t outer = 1;
  for (std::size_t d = 0; d < axis; ++d) {
    outer *= first[d];
  }
  std::size_t row = 0;
  for (std::size_t b : inner) {
    row += b;
  }
  std::vector<double> out(outer * row);
  std::size_t offset = 0;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const double* src = inputs[k].raw();
    for (std::size_t o = 0; o < outer; ++o) {
      std::copy(src + o * inner[k], src + (o + 1) * inner[k], out.data() + o * row + offset);
    }
    offset += inner[k];
  }

  Tensor result(out_shape, std::move(out));
  bool tracked = false;
  std::vector<const Tensor*> list;
  for (const Tensor& t : inputs) {
    list.push_back(&t);
    tracked = tracked || t.tracked();
  }
  if (!tracked) {
    return result;
  }
  const NodeId id = tape.record(OpKind::concat, list, out_shape,
                                [inner, outer, row](std::span<const double> g, GradSlots slots) {
                                  std::size_t offset = 0;
                                  for (std::size_t k = 0; k < inner.size(); ++k) {
                                    if (slots[k] != nullptr) {
                                      auto& dst = *slots[k];
                                      for (std::size_t o = 0; o < outer; ++o) {
                                        for (std::size_t i = 0; i < inner[k]; ++i) {
                                          dst[o * inner[k] + i] += g[o * row + offset + i];
                                        }
                                      }
                                    }
                                    offset += inner[k];
                                  }
                                });
  return result.with_node(id);
}

Tensor mse(Tape& tape, const Tensor& a, const Tensor& b) {
  check_finite("mse", a);
  check_finite("mse", b);
  if (a.shape() != b.shape() || a.size() == 0) {
    shape_error("mse", shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  const double n = static_cast<double>(a.size());
  return finish(tape, OpKind::mse, {&a, &b}, Tensor::scalar(sum / n),
                [a = a.detached(), b = b.detached(), n](std::span<const double> g, GradSlots slots) {
                  const double scale = 2.0 * g[0] / n;
                  for (std::size_t i = 0; i < a.size(); ++i) {
                    const double d = scale * (a[i] - b[i]);
                    if (slots[0] != nullptr) {
                      (*slots[0])[i] += d;
                    }
                    if (slots[1] != nullptr) {
                      (*slots[1])[i] -= d;
                    }
                  }
                });
}

Tensor softmax_cross_entropy(Tape& tape, const Tensor& logits, std::span<const int> labels) {
  check_finite("softmax_cross_entropy", logits);
  if (logits.rank() != 2 || logits.dim(0) != labels.size() || logits.dim(0) == 0) {
    shape_error("softmax_cross_entropy",
                "logits " + shape_string(logits.shape()) + " with " + std::to_string(labels.size()) + " labels");
  }
  const std::size_t batch = logits.dim(0), classes = logits.dim(1);
  std::vector<double> probs(batch * classes);
  double loss = 0.0;
  for (std::size_t b = 0; b < batch; ++b) {
    const int y = labels[b];
    if (y < 0 || static_cast<std::size_t>(y) >= classes) {
      fail(ErrorCode::LabelOutOfRange, "softmax_cross_entropy: label " + std::to_string(y) + " out of range");
    }
    const double* row = logits.raw() + b * classes;
    const double mx = *std::max_element(row, row + classes);
    double z = 0.0;
    for (std::size_t c = 0; c < classes; ++c) {
      probs[b * classes + c] = std::exp(row[c] - mx);
      z += probs[b * classes + c];
    }
    for (std::size_t c = 0; c < classes; ++c) {
      probs[b * classes + c] /= z;
    }
    loss += std::log(z) + mx - row[y];
  }
  const double inv_batch = 1.0 / static_cast<double>(batch);
  return finish(tape, OpKind::softmax_cross_entropy, {&logits}, Tensor::scalar(loss * inv_batch),
                [probs = std::move(probs), labels = std::vector<int>(labels.begin(), labels.end()), classes,
                 inv_batch](std::span<const double> g, GradSlots slots) {
                  auto& dx = *slots[0];
                  const double scale = g[0] * inv_batch;
                  for (std::size_t i = 0; i < probs.size(); ++i) {
                    dx[i] += scale * probs[i];
                  }
                  for (std::size_t b = 0; b < labels.size(); ++b) {
                    dx[b * classes + static_cast<std::size_t>(labels[b])] -= scale;
                  }
                });
}

Tensor gaussian_kl(Tape& tape, const Tensor& mu, const Tensor& logvar) {
  check_finite("gaussian_kl", mu);
  check_finite("gaussian_kl", logvar);
  if (mu.shape() != logvar.shape() || mu.rank() != 2 || mu.dim(0) == 0) {
    shape_error("gaussian_kl", shape_string(mu.shape()) + " vs " + shape_string(logvar.shape()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    sum += 1.0 + logvar[i] - mu[i] * mu[i] - safe_exp(logvar[i]);
  }
  const double inv_batch = 1.0 / static_cast<double>(mu.dim(0));
  return finish(tape, OpKind::gaussian_kl, {&mu, &logvar}, Tensor::scalar(-0.5 * sum * inv_batch),
                [mu = mu.detached(), logvar = logvar.detached(), inv_batch](std::span<const double> g,
                                                                             GradSlots slots) {
                  const double scale = g[0] * inv_batch;
                  for (std::size_t i = 0; i < mu.size(); ++i) {
                    if (slots[0] != nullptr) {
                      (*slots[0])[i] += scale * mu[i];
                    }
                    if (slots[1] != nullptr && logvar[i] <= kExpClamp) {
                      (*slots[1])[i] += scale * 0.5 * (safe_exp(logvar[i]) - 1.0);
                    } else if (slots[1] != nullptr) {
                      (*slots[1])[i] -= scale * 0.5;
                    }
                  }
                });
}

Tensor reparameterize(Tape& tape, const Tensor& mu, const Tensor& logvar, const Tensor& noise) {
  check_finite("reparameterize", mu);
  check_finite("reparameterize", logvar);
  check_finite("reparameterize", noise);
  if (mu.shape() != logvar.shape() || mu.shape() != noise.shape()) {
    shape_error("reparameterize", shape_string(mu.shape()) + ", " + shape_string(logvar.shape()) + ", " +
                                      shape_string(noise.shape()));
  }
  std::vector<double> out(mu.size());
  std::vector<double> scale(mu.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    scale[i] = safe_exp(0.5 * logvar[i]);
    out[i] = mu[i] + scale[i] * noise[i];
  }
  return finish(tape, OpKind::reparameterize, {&mu, &logvar, &noise}, Tensor(mu.shape(), std::move(out)),
                [scale = std::move(scale), noise = noise.detached(), logvar = logvar.detached()](
                    std::span<const double> g, GradSlots slots) {
                  for (std::size_t i = 0; i < g.size(); ++i) {
                    if (slots[0] != nullptr) {
                      (*slots[0])[i] += g[i];
                    }
                    if (slots[1] != nullptr && 0.5 * logvar[i] <= kExpClamp) {
                      (*slots[1])[i] += g[i] * noise[i] * 0.5 * scale[i];
                    }
                    if (slots[2] != nullptr) {
                      (*slots[2])[i] += g[i] * scale[i];
                    }
                  }
                });
}

Tensor custom(Tape& tape, std::span<const Tensor* const> inputs, Tensor value, BackwardRule rule) {
  for (const Tensor* t : inputs) {
    check_finite("custom", *t);
  }
  value = value.detached();
  const bool tracked = std::any_of(inputs.begin(), inputs.end(), [](const Tensor* t) { return t->tracked(); });
  if (!tracked) {
    return value;
  }
  const NodeId id = tape.record(OpKind::custom, inputs, value.shape(), std::move(rule));
  return value.with_node(id);
}

Tensor forward(Tape& tape, OpKind kind, std::span<const Tensor> inputs, const OpAttrs& attrs) {
  auto arity = [&](std::size_t lo, std::size_t hi) {
    if (inputs.size() < lo || inputs.size() > hi) {
      shape_error(op_name(kind), "expected " + std::to_string(lo) + " inputs, got " + std::to_string(inputs.size()));
    }
  };
  switch (kind) {
    case OpKind::add:
      arity(2, 2);
      return add(tape, inputs[0], inputs[1]);
    case OpKind::sub:
      arity(2, 2);
      return sub(tape, inputs[0], inputs[1]);
    case OpKind::mul:
      arity(2, 2);
      return mul(tape, inputs[0], inputs[1]);
    case OpKind::matmul:
      arity(2, 2);
      return matmul(tape, inputs[0], inputs[1]);
    case OpKind::conv2d:
      arity(2, 3);
      return conv2d(tape, inputs[0], inputs[1], inputs.size() == 3 ? inputs[2] : Tensor(), attrs.padding);
    case OpKind::maxpool2x2:
      arity(1, 1);
      return maxpool2x2(tape, inputs[0]);
    case OpKind::relu:
      arity(1, 1);
      return relu(tape, inputs[0]);
    case OpKind::sigmoid:
      arity(1, 1);
      return sigmoid(tape, inputs[0]);
    case OpKind::tanh:
      arity(1, 1);
      return tanh(tape, inputs[0]);
    case OpKind::exp:
      arity(1, 1);
      return exp(tape, inputs[0]);
    case OpKind::clip01:
      arity(1, 1);
      return clip01(tape, inputs[0]);
    case OpKind::reshape:
      arity(1, 1);
      return reshape(tape, inputs[0], attrs.shape);
    case OpKind::concat:
      return concat(tape, inputs, attrs.axis);
    case OpKind::mse:
      arity(2, 2);
      return mse(tape, inputs[0], inputs[1]);
    case OpKind::softmax_cross_entropy:
      arity(1, 1);
      return softmax_cross_entropy(tape, inputs[0], attrs.labels);
    case OpKind::gaussian_kl:
      arity(2, 2);
      return gaussian_kl(tape, inputs[0], inputs[1]);
    case OpKind::reparameterize:
      arity(3, 3);
      return reparameterize(tape, inputs[0], inputs[1], inputs[2]);
    case OpKind::leaf:
    case OpKind::custom:
      break;
  }
  fail(ErrorCode::UnsupportedOp, "forward: op '" + std::string(op_name(kind)) + "' has no generic form");
}

}  // namespace toporeform::ops
