// Copyright 2026 The rxngen Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "rxngen/numerics/adam.hpp"
#include "rxngen/numerics/checkpoint.hpp"
#include "support/grad_cases.hpp"
#include "support/gradcheck.hpp"

namespace rxngen::numerics {
namespace {

TEST(Tensor, ShapesAndFactories) {
  const Tensor m = Tensor::matrix(2, 3, {1, 2, 3, 4, 5, 6});
  EXPECT_EQ(m.rows(), 2u);
  EXPECT_EQ(m.cols(), 3u);
  EXPECT_EQ(m(1, 2), 6.0);
  EXPECT_EQ(shape_string(m.shape()), "[2,3]");
  EXPECT_THROW(Tensor::matrix(2, 2, {1, 2, 3}), ShapeError);
  EXPECT_EQ(Tensor::scalar(4.0).size(), 1u);
}

TEST(ParameterStore, RejectsDuplicateNames) {
  ParameterStore store;
  store.add("w", Tensor::vector({1.0}));
  EXPECT_THROW(store.add("w", Tensor::vector({2.0})), std::invalid_argument);
  EXPECT_EQ(store.find("missing"), nullptr);
}

TEST(ParameterStore, ClipGradNorm) {
  ParameterStore store;
  auto& a = store.add("a", Tensor::vector({0.0, 0.0}));
  auto& b = store.add("b", Tensor::vector({0.0}));
  a.grad() = {3.0, 0.0};
  b.grad() = {4.0};
  EXPECT_DOUBLE_EQ(store.clip_grad_norm(1.0), 5.0);
  EXPECT_NEAR(store.grad_norm(), 1.0, 1e-15);
  EXPECT_NEAR(a.grad()[0], 0.6, 1e-15);
}

TEST(Tape, LinearMatchesHandComputation) {
  Tape t;
  const Var w = t.constant(Tensor::matrix(3, 2, {1, 2, 3, 4, 5, 6}));
  const Var b = t.constant(std::vector<double>{0.1, 0.2, 0.3});
  const Var x = t.constant(std::vector<double>{0.5, -1.0});
  const auto y = t.linear(w, b, x).value();
  EXPECT_NEAR(y[0], -1.4, 1e-15);
  EXPECT_NEAR(y[1], -2.3, 1e-15);
  EXPECT_NEAR(y[2], -3.2, 1e-15);
}

TEST(Tape, LinearMatchesNaiveMatmul) {
  Rng rng(7);
  const Tensor w = testing::random_tensor(rng, 7, 5);
  const Tensor x = testing::random_tensor(rng, 5);
  Tape t;
  const auto y = t.linear(t.constant(w), Var{}, t.constant(x)).value();
  for (std::size_t r = 0; r < 7; ++r) {
    long double acc = 0;
    for (std::size_t c = 0; c < 5; ++c) acc += static_cast<long double>(w(r, c)) * x[c];
    EXPECT_NEAR(y[r], static_cast<double>(acc), 1e-12);
  }
}

TEST(Tape, SoftmaxFrozenValues) {
  Tape t;
  const auto p = t.softmax(t.constant(std::vector<double>{1, 2, 3, -1})).value();
  EXPECT_NEAR(p[0], 0.088946817297404296, 1e-15);
  EXPECT_NEAR(p[1], 0.24178251715880078, 1e-15);
  EXPECT_NEAR(p[2], 0.65723302283185547, 1e-15);
  EXPECT_NEAR(p[3], 0.012037642711939451, 1e-15);
}

TEST(Tape, SoftmaxShiftInvariantAndStable) {
  Tape t;
  const auto a = t.softmax(t.constant(std::vector<double>{1, 2, 3})).value();
  const auto b = t.softmax(t.constant(std::vector<double>{1001, 1002, 1003})).value();
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(a[i], b[i], 1e-15);
}

TEST(Tape, CrossEntropyFrozenValue) {
  Tape t;
  EXPECT_NEAR(t.cross_entropy(t.constant(std::vector<double>{2, 1, 0.1}), 0).item(), 0.41703001627783348, 1e-14);
  EXPECT_THROW(t.cross_entropy(t.constant(std::vector<double>{2, 1}), 2), std::out_of_range);
}

TEST(Tape, BceWithLogitsStable) {
  Tape t;
  EXPECT_NEAR(t.bce_with_logits(t.constant(std::vector<double>{3.0}), true).item(), 0.048587351573742059, 1e-15);
  EXPECT_NEAR(t.bce_with_logits(t.constant(std::vector<double>{-3.0}), false).item(), 0.048587351573742059, 1e-15);
  EXPECT_NEAR(t.bce_with_logits(t.constant(std::vector<double>{800.0}), false).item(), 800.0, 1e-9);
  EXPECT_NEAR(t.bce_with_logits(t.constant(std::vector<double>{800.0}), true).item(), 0.0, 1e-12);
}

TEST(Tape, KlDiagGaussian) {
  Tape t;
  EXPECT_EQ(t.kl_diag_gaussian(t.zeros(4), t.zeros(4)).item(), 0.0);
  EXPECT_NEAR(t.kl_diag_gaussian(t.constant(std::vector<double>{1.0}), t.zeros(1)).item(), 0.5, 1e-15);
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    const Var mu = t.constant(testing::random_tensor(rng, 3));
    const Var lv = t.constant(testing::random_tensor(rng, 3, 0, 2.0));
    EXPECT_GE(t.kl_diag_gaussian(mu, lv).item(), 0.0);
  }
}

TEST(Tape, NonFiniteValuesThrow) {
  Tape t;
  EXPECT_THROW(t.exp(t.constant(std::vector<double>{1000.0})), NumericError);
}

TEST(Tape, BackwardTwiceAndStaleVarsThrow) {
  ParameterStore store;
  auto& a = store.add("a", Tensor::vector({1.0, 2.0}));
  Tape t;
  const Var loss = t.reduce_sum(t.mul(t.param(a), t.param(a)));
  t.backward(loss);
  EXPECT_EQ(a.grad()[1], 4.0);
  EXPECT_THROW(t.backward(loss), std::logic_error);
  EXPECT_THROW((void)loss.value(), std::logic_error);
}

TEST(Tape, BackwardRequiresScalar) {
  ParameterStore store;
  auto& a = store.add("a", Tensor::vector({1.0, 2.0}));
  Tape t;
  EXPECT_THROW(t.backward(t.tanh(t.param(a))), ShapeError);
}

TEST(Tape, GradientBufferLeavesParametersUntouched) {
  ParameterStore store;
  auto& a = store.add("a", Tensor::vector({3.0}));
  GradientBuffer sink(store);
  Tape t;
  t.backward(t.mul(t.param(a), t.param(a)), sink);
  EXPECT_FALSE(a.has_grad());
  EXPECT_EQ(sink[0][0], 6.0);
  sink.accumulate_into(store);
  EXPECT_EQ(a.grad()[0], 6.0);
}

TEST(Ops, CanonicalSumIsPermutationInvariantBitExact) {
  Rng rng(17);
  std::vector<Tensor> parts;
  for (int i = 0; i < 6; ++i) parts.push_back(testing::random_tensor(rng, 8, 0, 1e3));
  std::vector<int> order{0, 1, 2, 3, 4, 5};
  Tape t;
  std::vector<double> first;
  for (int trial = 0; trial < 20; ++trial) {
    rng.shuffle(order.begin(), order.end());
    std::vector<Var> xs;
    for (int i : order) xs.push_back(t.constant(parts[i]));
    const auto v = canonical_sum(t, xs, 8).value();
    if (first.empty()) first.assign(v.begin(), v.end());
    EXPECT_TRUE(std::equal(first.begin(), first.end(), v.begin()));
  }
  EXPECT_EQ(canonical_sum(t, {}, 3).value()[2], 0.0);
}

TEST(Layers, GruMatchesScalarReference) {
  ParameterStore store;
  Rng rng(11);
  const auto gru = GruCell::create(store, "g", 1, 1, rng);
  gru.update.weight->value() = Tensor::matrix(1, 2, {0.5, -0.4});
  gru.update.bias->value() = Tensor::vector({0.1});
  gru.reset.weight->value() = Tensor::matrix(1, 2, {-0.2, 0.3});
  gru.reset.bias->value() = Tensor::vector({0.05});
  gru.candidate.weight->value() = Tensor::matrix(1, 2, {0.9, 0.6});
  gru.candidate.bias->value() = Tensor::vector({-0.2});
  Tape t;
  const Var h = gru(t, t.constant(std::vector<double>{0.7}), t.constant(std::vector<double>{-0.3}));
  EXPECT_NEAR(h.item(), 0.10540388397476525, 1e-15);
  EXPECT_THROW(gru(t, t.zeros(2), t.zeros(1)), ShapeError);
}

TEST(Layers, GlorotBounds) {
  Rng rng(1);
  const Tensor w = glorot_uniform(30, 20, rng);
  const double s = std::sqrt(6.0 / 50.0);
  for (double v : w.data()) EXPECT_LE(std::abs(v), s);
}

class PrimitiveGradient : public ::testing::TestWithParam<std::size_t> {};

TEST_P(PrimitiveGradient, MatchesFiniteDifferences) {
  const auto gc = testing::primitive_grad_cases()[GetParam()];
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    ParameterStore store;
    Rng rng(Rng::derive(seed, GetParam()));
    auto loss = gc.make(store, rng);
    const auto res = testing::check_gradients(store, loss);
    EXPECT_LE(res.max_rel_error, 1e-4) << gc.name << " seed " << seed << " param " << res.worst_param;
  }
}

INSTANTIATE_TEST_SUITE_P(AllOps, PrimitiveGradient,
                         ::testing::Range<std::size_t>(0, testing::primitive_grad_cases().size()),
                         [](const auto& info) { return testing::primitive_grad_cases()[info.param].name; });

TEST(Adam, FirstStepMovesByLearningRate) {
  ParameterStore store;
  auto& x = store.add("x", Tensor::vector({1.0, -2.0}));
  Adam adam(store, {.lr = 0.1});
  x.grad() = {1.0, -5.0};
  adam.step(store);
  EXPECT_NEAR(x.value()[0], 0.9, 1e-8);
  EXPECT_NEAR(x.value()[1], -1.9, 1e-8);
  EXPECT_EQ(x.grad()[0], 0.0);
  EXPECT_EQ(adam.steps(), 1u);
}

TEST(Adam, MissingGradientThrows) {
  ParameterStore store;
  store.add("x", Tensor::vector({1.0}));
  Adam adam(store);
  EXPECT_THROW(adam.step(store), std::logic_error);
}

TEST(Adam, MinimizesQuadratic) {
  ParameterStore store;
  auto& x = store.add("x", Tensor::vector({3.0}));
  Adam adam(store, {.lr = 0.05});
  for (int i = 0; i < 2000; ++i) {
    Tape t;
    const Var v = t.param(x);
    t.backward(t.mul(v, v));
    adam.step(store);
  }
  EXPECT_NEAR(x.value()[0], 0.0, 1e-3);
}

TEST(Checkpoint, RoundTripIsBitExactAtFloat32) {
  ParameterStore store;
  Rng rng(3);
  store.add("jt.a", testing::random_tensor(rng, 3, 4));
  store.add("rxn.b", testing::random_tensor(rng, 5));
  const auto dir = std::filesystem::temp_directory_path() / "rxngen_ckpt_test";
  std::filesystem::create_directories(dir);
  save_checkpoint(dir / "a.ckpt", store);
  load_checkpoint(dir / "a.ckpt", store);
  EXPECT_EQ(store.at("jt.a").value()[0], static_cast<double>(static_cast<float>(store.at("jt.a").value()[0])));
  save_checkpoint(dir / "b.ckpt", store);
  auto slurp = [](const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  EXPECT_EQ(slurp(dir / "a.ckpt"), slurp(dir / "b.ckpt"));
  const TensorMap m = read_checkpoint(dir / "a.ckpt");
  EXPECT_EQ(m.at("jt.a").shape(), (Shape{3, 4}));
  std::filesystem::remove_all(dir);
}

TEST(Checkpoint, StrictLoading) {
  ParameterStore store;
  store.add("a", Tensor::vector({1.0, 2.0}));
  const std::string bytes = encode_checkpoint({{"a", Tensor::vector({1.0, 2.0, 3.0})}});
  EXPECT_EQ(decode_checkpoint(bytes).at("a").size(), 3u);
  EXPECT_THROW(decode_checkpoint("not a checkpoint"), CheckpointError);
  EXPECT_THROW(decode_checkpoint(bytes.substr(0, bytes.size() - 1)), CheckpointError);
  const auto dir = std::filesystem::temp_directory_path() / "rxngen_ckpt_strict";
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "x.ckpt", std::ios::binary);
    out << bytes;
  }
  EXPECT_THROW(load_checkpoint(dir / "x.ckpt", store), CheckpointError);
  std::filesystem::remove_all(dir);
}

TEST(Rng, DeterministicStreams) {
  Rng a(42), b(42);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a.next(), b.next());
  EXPECT_NE(Rng::derive(1, 0), Rng::derive(1, 1));
  Rng c(9);
  for (int i = 0; i < 1000; ++i) {
    const double u = c.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    EXPECT_LT(c.index(7), 7u);
  }
}

}  // namespace
}  // namespace rxngen::numerics
