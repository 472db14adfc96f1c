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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "toporeform/autodiff/ops.hpp"
#include "toporeform/dataio/export.hpp"
#include "toporeform/error.hpp"
#include "toporeform/models/classifier.hpp"
#include "toporeform/models/reformer.hpp"
#include "toporeform/models/topoae.hpp"
#include "toporeform/models/weight_file.hpp"
#include "toporeform/random.hpp"

using namespace toporeform;
using namespace toporeform::models;

namespace {

Tensor images(std::size_t n, std::uint64_t seed) { return uniform_tensor({n, 1, 28, 28}, 0.0, 1.0, seed, 0); }

const ClassifierSpec kSmallClassifier{{4, 4, 8, 8}, 3, {16}, 10};

template <typename Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected a typed error";
  return ErrorCode::InvalidArgument;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("toporeform_models_" + name);
}

}  // namespace

TEST(Classifier, LogitShapeFollowsBatchAndClasses) {
  const ClassifierModel model(ClassifierSpec{}, 1);
  Graph g(Graph::Mode::inference);
  const Tensor logits = classifier_forward(g, model, images(4, 2));
  EXPECT_EQ(logits.shape(), (Shape{4, 10}));
}

TEST(Classifier, FreshModelIsNearUniform) {
  const ClassifierModel model(ClassifierSpec{}, 3);
  Graph g(Graph::Mode::inference);
  const Tensor x = images(32, 4);
  const std::vector<int> y(32, 5);
  const double ce = ops::softmax_cross_entropy(g.tape(), model.forward(g, x), y).item();
  EXPECT_NEAR(ce, std::log(10.0), 0.5);
}

TEST(Classifier, RejectsNonImageInput) {
  const ClassifierModel model(kSmallClassifier, 1);
  Graph g;
  EXPECT_EQ(code_of([&] { model.forward(g, Tensor({2, 784}, 0.5)); }), ErrorCode::ShapeMismatch);
}

TEST(Classifier, WeightGradientsMatchFiniteDifferences) {
  ClassifierModel model(kSmallClassifier, 11);
  const Tensor x = images(3, 12);
  const std::vector<int> y{1, 4, 7};
  auto loss_value = [&] {
    Graph g(Graph::Mode::inference);
    return ops::softmax_cross_entropy(g.tape(), model.forward(g, x), y).item();
  };
  Graph g;
  const Tensor loss = ops::softmax_cross_entropy(g.tape(), model.forward(g, x), y);
  auto params = model.parameters();
  const auto grads = g.parameter_gradients(params, backward(g.tape(), loss));

  CounterStream pick(5, 0);
  for (std::uint64_t trial = 0; trial < 10; ++trial) {
    const std::size_t which = pick.bits(2 * trial) % params.size();
    Parameter& p = *params[which];
    const std::size_t k = pick.bits(2 * trial + 1) % p.value.size();
    const double original = p.value[k];
    const double h = 1e-5;
    p.value.mutable_data()[k] = original + h;
    const double up = loss_value();
    p.value.mutable_data()[k] = original - h;
    const double down = loss_value();
    p.value.mutable_data()[k] = original;
    const double numeric = (up - down) / (2 * h);
    const double analytic = grads[which][k];
    EXPECT_LT(std::abs(analytic - numeric) / std::max(1.0, std::abs(analytic)), 1e-3) << p.name << "[" << k << "]";
  }
}

TEST(Classifier, ArgmaxBreaksTiesLow) {
  const Tensor logits({2, 3}, {1.0, 3.0, 3.0, 2.0, 2.0, 2.0});
  EXPECT_EQ(argmax_rows(logits), (std::vector<int>{1, 0}));
}

TEST(TopoAE, ShapesAndRange) {
  const TopoAEModel model(TopoAESpec{}, 1);
  Graph g;
  const auto out = topoae_forward(g, model, images(8, 3));
  EXPECT_EQ(out.z.shape(), (Shape{8, 16}));
  EXPECT_EQ(out.x_hat.shape(), (Shape{8, 1, 28, 28}));
  for (double v : out.x_hat.data()) {
    ASSERT_GE(v, 0.0);
    ASSERT_LE(v, 1.0);
  }
}

TEST(TopoAE, SingleSampleOnlyInInference) {
  const TopoAEModel model(TopoAESpec{}, 1);
  Graph train;
  EXPECT_EQ(code_of([&] { topoae_forward(train, model, images(1, 3)); }), ErrorCode::BatchTooSmall);
  Graph infer(Graph::Mode::inference);
  EXPECT_EQ(topoae_forward(infer, model, images(1, 3)).z.shape(), (Shape{1, 16}));
}

TEST(TopoAELoss, VanishesForPerfectReconstructionAndIsometricCode) {
  const Tensor x = images(5, 4);
  // Reversing the coordinate order is an isometry of the flattened rows.
  std::vector<double> flipped(x.size());
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t k = 0; k < 784; ++k) {
      flipped[i * 784 + k] = x[i * 784 + 783 - k];
    }
  }
  Graph g;
  const auto loss = topoae_loss(g, x, x, Tensor({5, 784}, flipped), 1.0);
  EXPECT_NEAR(loss.total.item(), 0.0, 1e-9);
}

TEST(TopoAELoss, ZeroWeightIsPlainMse) {
  const Tensor x = images(4, 5), x_hat = images(4, 6);
  const Tensor z = uniform_tensor({4, 3}, -1, 1, 7, 0);
  Graph g;
  const auto loss = topoae_loss(g, x, x_hat, z, 0.0);
  Graph h;
  EXPECT_EQ(loss.total.item(), ops::mse(h.tape(), x_hat, x).item());
  EXPECT_GT(loss.topological, 0.0);
}

TEST(TopoAELoss, TwoPointHandCase) {
  // Images one pixel apart by 1.0, codes two apart: each direction
  // contributes 1/2 (1 - 2)^2.
  Tensor x({2, 1, 28, 28}, 0.0);
  x.mutable_data()[784 + 10] = 1.0;
  Tensor x_hat = x;
  x_hat.mutable_data()[0] = 0.5;  // MSE = 0.25 / 1568
  const Tensor z({2, 1}, {0.0, 2.0});
  Graph g;
  const auto loss = topoae_loss(g, x, x_hat, z, 1.0);
  EXPECT_DOUBLE_EQ(loss.topological, 1.0);
  EXPECT_NEAR(loss.total.item(), 0.25 / 1568.0 + 1.0, 1e-15);
}

TEST(TopoAELoss, MonotoneInWeight) {
  const Tensor x = images(6, 8), x_hat = images(6, 9);
  const Tensor z = uniform_tensor({6, 2}, -1, 1, 10, 0);
  double previous = -1.0;
  for (double lambda : {0.0, 0.1, 0.5, 1.0, 4.0}) {
    Graph g;
    const double value = topoae_loss(g, x, x_hat, z, lambda).total.item();
    EXPECT_GT(value, previous);
    previous = value;
  }
}

TEST(TopoAELoss, GradientReachesEncoderThroughTopologicalTerm) {
  TopoAEModel model(TopoAESpec{}, 2);
  const Tensor x = images(6, 3);
  auto params = model.parameters();
  auto encoder_grad_norm = [&](double lambda) {
    Graph g;
    const auto out = topoae_forward(g, model, x);
    const auto loss = topoae_loss(g, x, out.x_hat, out.z, lambda);
    const auto grads = g.parameter_gradients(params, backward(g.tape(), loss.total));
    double sum = 0.0;
    for (double v : grads[0].data()) {
      sum += v * v;
    }
    return sum;
  };
  EXPECT_NE(encoder_grad_norm(0.0), encoder_grad_norm(1.0));
}

TEST(Reformer, BottleneckConcatenatesSampleAndAux) {
  const ReformerVAE vae(ReformerSpec{}, 1);
  const AuxModule aux(AuxSpec{}, 2);
  Graph g;
  const auto out = reformer_forward(g, vae, &aux, images(8, 3), uniform_tensor({8, 16}, -1, 1, 4, 0),
                                    Tensor({8, 16}, 0.0));
  EXPECT_EQ(out.bottleneck.shape(), (Shape{8, 24}));
  EXPECT_EQ(out.x_ref.shape(), (Shape{8, 1, 28, 28}));
  EXPECT_EQ(out.mu.shape(), out.logvar.shape());
}

TEST(Reformer, ZeroNoiseIsDeterministicAndSampledNoiseIsNot) {
  const ReformerVAE vae(ReformerSpec{}, 1);
  const AuxModule aux(AuxSpec{}, 2);
  const Tensor x = images(4, 5);
  const Tensor z = uniform_tensor({4, 16}, -1, 1, 6, 0);
  auto run = [&](const Tensor& noise) {
    Graph g(Graph::Mode::inference);
    return reformer_forward(g, vae, &aux, x, z, noise).x_ref;
  };
  EXPECT_TRUE(identical(run(Tensor({4, 16}, 0.0)), run(Tensor({4, 16}, 0.0))));
  EXPECT_FALSE(identical(run(normal_tensor({4, 16}, 1, 0)), run(normal_tensor({4, 16}, 2, 0))));
}

TEST(Reformer, NoiseShapeMustMatch) {
  const ReformerVAE vae(ReformerSpec{}, 1);
  Graph g;
  EXPECT_EQ(code_of([&] {
              reformer_forward(g, vae, nullptr, images(2, 1), Tensor({2, 16}, 0.0), Tensor({2, 15}, 0.0));
            }),
            ErrorCode::ShapeMismatch);
}

TEST(ReformerLoss, MinimaGiveZero) {
  const Tensor x = images(2, 1);
  Tensor logits({2, 10}, 0.0);
  logits.mutable_data()[3] = 60.0;
  logits.mutable_data()[10 + 7] = 60.0;
  const std::vector<int> y{3, 7};
  Graph g;
  const auto loss = reformer_loss(g, x, x, logits, y, Tensor({2, 4}, 0.0), Tensor({2, 4}, 0.0), {});
  EXPECT_NEAR(loss.total.item(), 0.0, 1e-12);
}

TEST(ReformerLoss, ZeroedWeightsLeaveMse) {
  const Tensor a = images(2, 1), b = images(2, 2);
  const Tensor logits = uniform_tensor({2, 10}, -3, 3, 3, 0);
  const std::vector<int> y{0, 1};
  Graph g;
  const auto loss = reformer_loss(g, a, b, logits, y, uniform_tensor({2, 4}, -1, 1, 4, 0),
                                  uniform_tensor({2, 4}, -1, 1, 5, 0), {1.0, 0.0, 0.0});
  EXPECT_EQ(loss.total.item(), loss.reconstruction);
}

TEST(ReformerLoss, WeightedSumOfHandTerms) {
  // MSE 0.1, cross-entropy ln 10 from uniform logits, KL 0.
  const Tensor a({1, 10}, std::sqrt(0.1));
  const Tensor b({1, 10}, 0.0);
  const std::vector<int> y{4};
  Graph g;
  const auto loss = reformer_loss(g, a, b, Tensor({1, 10}, 0.0), y, Tensor({1, 3}, 0.0), Tensor({1, 3}, 0.0), {});
  EXPECT_NEAR(loss.reconstruction, 0.1, 1e-15);
  EXPECT_NEAR(loss.classification, 2.302585092994046, 1e-12);
  EXPECT_EQ(loss.kl, 0.0);
  EXPECT_NEAR(loss.total.item(), 1.2513, 5e-5);
  EXPECT_NEAR(loss.total.item(), 0.1 + 0.5 * std::log(10.0), 1e-12);
}

TEST(Freeze, FrozenEncoderGetsZeroGradientAndStaysPut) {
  ReformerVAE vae(ReformerSpec{}, 1);
  AuxModule aux(AuxSpec{}, 2);
  vae.freeze_encoder(true);
  ParameterList params = vae.parameters();
  for (Parameter* p : aux.parameters()) {
    params.push_back(p);
  }
  std::vector<Tensor> before;
  for (Parameter* p : params) {
    before.push_back(p->value);
  }
  const Tensor x = images(4, 3);
  AdamState state;
  for (int step = 0; step < 3; ++step) {
    Graph g;
    const auto out = reformer_forward(g, vae, &aux, x, uniform_tensor({4, 16}, -1, 1, 9, 0),
                                      normal_tensor({4, 16}, 3, step));
    const Tensor loss = ops::add(g.tape(), ops::mse(g.tape(), out.x_ref, x), ops::gaussian_kl(g.tape(), out.mu, out.logvar));
    const auto grads = g.parameter_gradients(params, backward(g.tape(), loss));
    const std::size_t encoder_count = vae.encoder_parameters().size();
    for (std::size_t k = 0; k < encoder_count; ++k) {
      for (double v : grads[k].data()) {
        ASSERT_EQ(v, 0.0);
      }
    }
    adam_step(params, grads, state);
  }
  const std::size_t encoder_count = vae.encoder_parameters().size();
  for (std::size_t k = 0; k < params.size(); ++k) {
    EXPECT_EQ(identical(before[k], params[k]->value), k < encoder_count) << params[k]->name;
  }
}

TEST(WeightFile, ByteLayoutOfTinyContainer) {
  const NamedTensor tensors[] = {{"ab", Tensor({2}, {1.0, -2.0})}};
  const auto bytes = encode_tensors(tensors);
  const std::vector<std::uint8_t> expected{'T', 'R', 'F', 'M', 1, 0, 0, 0, 1, 0, 0, 0,  // header
                                           2, 0, 'a', 'b', 1, 2, 0, 0, 0,               // name, rank, dims
                                           0x00, 0x00, 0x80, 0x3f, 0x00, 0x00, 0x00, 0xc0};
  EXPECT_EQ(bytes, expected);
}

TEST(WeightFile, RoundTripIsExactAfterStorageRounding) {
  ClassifierModel a(kSmallClassifier, 1), b(kSmallClassifier, 2);
  auto pa = a.parameters();
  round_to_storage(pa);
  const auto path = temp_file("roundtrip.trfm");
  save_parameters(path, a.parameters());
  auto pb = b.parameters();
  load_parameters(path, pb);
  for (std::size_t k = 0; k < pa.size(); ++k) {
    EXPECT_TRUE(identical(pa[k]->value, pb[k]->value)) << pa[k]->name;
  }
}

TEST(WeightFile, StructuralProblemsAreBadWeightFile) {
  const NamedTensor tensors[] = {{"w", Tensor({2, 2}, 0.5)}};
  auto bytes = encode_tensors(tensors);
  for (std::size_t len = 0; len < bytes.size(); ++len) {
    const std::vector<std::uint8_t> cut(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(len));
    EXPECT_EQ(code_of([&] { decode_tensors(cut); }), ErrorCode::BadWeightFile) << len;
  }
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_EQ(code_of([&] { decode_tensors(bad_magic); }), ErrorCode::BadWeightFile);

  const auto path = temp_file("mismatch.trfm");
  save_tensors(path, tensors);
  Parameter wrong_shape{"w", Tensor({4}, 0.0)};
  Parameter missing{"v", Tensor({2, 2}, 0.0)};
  Parameter* first[] = {&wrong_shape};
  Parameter* second[] = {&missing};
  EXPECT_EQ(code_of([&] { load_parameters(path, first); }), ErrorCode::BadWeightFile);
  EXPECT_EQ(code_of([&] { load_parameters(path, second); }), ErrorCode::BadWeightFile);
}

TEST(ExportLatents, EmptyDatasetWritesHeaderOnly) {
  const TopoAEModel model(TopoAESpec{.latent = 2}, 1);
  const auto path = temp_file("empty.csv");
  EXPECT_EQ(dataio::export_latents(model, dataio::Dataset{}, path), 0u);
  std::ifstream in(path);
  std::stringstream text;
  text << in.rdbuf();
  EXPECT_EQ(text.str(), "label,z0,z1\n");
}

TEST(ExportLatents, RowsMatchEncoderAtFullPrecision) {
  const TopoAEModel model(TopoAESpec{.latent = 2}, 1);
  dataio::Dataset data{images(100, 4), std::vector<int>(100), 10};
  for (std::size_t i = 0; i < 100; ++i) {
    data.labels[i] = static_cast<int>(i % 10);
  }
  const auto path = temp_file("latents.csv");
  EXPECT_EQ(dataio::export_latents(model, data, path), 100u);

  Graph g(Graph::Mode::inference);
  const Tensor z = model.encode(g, data.images);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) {
      cells.push_back(cell);
    }
    ASSERT_EQ(cells.size(), 3u);
    EXPECT_EQ(std::stoi(cells[0]), data.labels[rows]);
    EXPECT_EQ(std::strtod(cells[1].c_str(), nullptr), z[rows * 2]);
    EXPECT_EQ(std::strtod(cells[2].c_str(), nullptr), z[rows * 2 + 1]);
    ++rows;
  }
  EXPECT_EQ(rows, 100u);
}
