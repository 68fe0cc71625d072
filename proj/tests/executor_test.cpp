// Copyright 2026 The rxngen Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <json.hpp>

#include "rxngen/executor/executor.hpp"
#include "support/executor_fixture.hpp"

namespace rxngen::executor {
namespace {

using testing::failing_tree;
using testing::fixture_vocab;
using testing::one_step;
using testing::two_step;
using trees::NodeKind;
using trees::ReactionTree;

TEST(Execute, OneStepProduct) {
  const auto vocab = fixture_vocab();
  const trees::ToyBackend be(vocab.templates());
  const auto r = execute(one_step(3, {0, 1}), vocab, be);
  ASSERT_TRUE(r.valid);
  EXPECT_EQ(*r.product, "T3(AQB,QC)");
  ASSERT_EQ(r.trace.size(), 1u);
  EXPECT_EQ(r.trace[0].node_id, 1);
  EXPECT_EQ(r.trace[0].template_id, 3);
  EXPECT_EQ(r.trace[0].reactants, (std::vector<std::string>{"AQB", "QC"}));
  EXPECT_EQ(r.failed_node, -1);
}

TEST(Execute, PreconditionFailureIsAResult) {
  const auto vocab = fixture_vocab();
  const trees::ToyBackend be(vocab.templates());
  const auto r = execute(one_step(3, {2, 1}), vocab, be);
  EXPECT_FALSE(r.valid);
  EXPECT_FALSE(r.product);
  EXPECT_EQ(r.failed_node, 1);
  EXPECT_NE(r.reason.find("lacks token 'Q'"), std::string::npos);
  EXPECT_TRUE(r.trace.empty());
}

TEST(Execute, TwoStepTraceIsPostOrder) {
  const auto vocab = fixture_vocab();
  const trees::ToyBackend be(vocab.templates());
  const auto r = execute(two_step(), vocab, be);
  ASSERT_TRUE(r.valid);
  EXPECT_EQ(*r.product, "T3(QC,T1(AQB))");
  ASSERT_EQ(r.trace.size(), 2u);
  EXPECT_EQ(r.trace[0].product, "T1(AQB)");
  EXPECT_EQ(r.trace[1].node_id, 1);
}

TEST(Execute, FirstFailureStopsExecution) {
  const auto vocab = fixture_vocab();
  const trees::ToyBackend be(vocab.templates());
  ReactionTree t = two_step();
  t.nodes[4].label = 3;  // XY lacks 'A'
  const auto r = execute(t, vocab, be);
  EXPECT_FALSE(r.valid);
  EXPECT_EQ(r.failed_node, 3);
  EXPECT_TRUE(r.trace.empty());
}

TEST(Execute, StructuralViolationThrows) {
  const auto vocab = fixture_vocab();
  const trees::ToyBackend be(vocab.templates());
  EXPECT_THROW(execute(one_step(3, {0}), vocab, be), trees::StructureError);
  EXPECT_THROW(execute(one_step(9, {0, 1}), vocab, be), trees::StructureError);
  EXPECT_THROW(execute(one_step(3, {0, 7}), vocab, be), trees::StructureError);
}

TEST(Execute, PureAndInvariantUnderReactantSwap) {
  const auto vocab = fixture_vocab();
  const trees::ToyBackend be(vocab.templates());
  const auto a = execute(two_step(), vocab, be);
  const auto again = execute(two_step(), vocab, be);
  EXPECT_EQ(result_to_json(a), result_to_json(again));
  ReactionTree swapped = two_step();
  std::swap(swapped.edges[1], swapped.edges[4]);
  EXPECT_EQ(execute(swapped, vocab, be).product, a.product);
}

TEST(Execute, ReproducesGeneratedProducts) {
  trees::GeneratorConfig g;
  g.n_trees = 500;
  g.seed = 17;
  const auto ds = trees::generate_toy_dataset(g);
  const trees::ToyBackend be(ds.vocab.templates());
  for (const auto& p : ds.trees) {
    const auto r = execute(p.reaction, ds.vocab, be);
    ASSERT_TRUE(r.valid) << r.reason;
    EXPECT_EQ(r.product, p.product);
  }
}

TEST(Execute, ParallelMatchesSerial) {
  trees::GeneratorConfig g;
  g.n_trees = 200;
  const auto ds = trees::generate_toy_dataset(g);
  std::vector<ReactionTree> rt;
  for (const auto& p : ds.trees) rt.push_back(p.reaction);
  rt.push_back(failing_tree(ds.vocab));
  const trees::ToyBackend be(ds.vocab.templates());
  const auto a = execute_all(rt, ds.vocab, be);
  const auto b = execute_all_serial(rt, ds.vocab, be);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(result_to_json(a[i]), result_to_json(b[i]));
}

TEST(Execute, ResultJson) {
  const auto vocab = fixture_vocab();
  const trees::ToyBackend be(vocab.templates());
  const auto j = nlohmann::json::parse(result_to_json(execute(one_step(3, {2, 1}), vocab, be)));
  EXPECT_EQ(j["status"], "invalid");
  EXPECT_TRUE(j["product"].is_null());
  EXPECT_EQ(j["invalid_at"]["node_id"], 1);
}

TEST(Quality, DefaultHook) {
  EXPECT_TRUE(default_quality("T3(AQB,QC)"));
  EXPECT_FALSE(default_quality(std::string(121, 'A')));
  std::string deep = "A";
  for (int i = 0; i < 7; ++i) deep = "T1(" + deep + ")";
  EXPECT_FALSE(default_quality(deep));
  std::string ok = "A";
  for (int i = 0; i < 6; ++i) ok = "T1(" + ok + ")";
  EXPECT_TRUE(default_quality(ok));
}

// Two valid trees sharing a product absent from training, one precondition
// failure on each template. Every count below is enumerated by hand.
TEST(Metrics, HandFixture) {
  const auto training = testing::hand_training_set();
  const auto generated = testing::hand_generated_trees();
  const auto m = compute_metrics(generated, training, trees::ToyBackend(training.vocab.templates()));
  EXPECT_EQ(m.count, 4u);
  EXPECT_EQ(m.valid, 2u);
  EXPECT_EQ(m.unique, 1u);
  EXPECT_EQ(m.novel, 2u);
  EXPECT_EQ(m.quality_pass, 2u);
  EXPECT_EQ(m.validity, 50.0);
  EXPECT_EQ(m.uniqueness, 50.0);
  EXPECT_EQ(m.novelty, 100.0);
  EXPECT_EQ(m.quality, 100.0);
  EXPECT_FALSE(m.empty);
  EXPECT_FALSE(m.no_valid);
  // Lengths 10 vs 7 fall in different bins (2); depths agree (0); template
  // usage {T3: 3/4, T1: 1/4} vs {T1: 1} differs by 1.5.
  EXPECT_DOUBLE_EQ(m.descriptor_distance, 3.5);
}

TEST(Metrics, TrainingSubsetIsValidAndNotNovel) {
  trees::GeneratorConfig g;
  g.n_trees = 100;
  const auto ds = trees::generate_toy_dataset(g);
  std::vector<ReactionTree> rt;
  for (std::size_t i = 0; i < 40; ++i) rt.push_back(ds.trees[i].reaction);
  const auto m = compute_metrics(rt, ds, trees::ToyBackend(ds.vocab.templates()));
  EXPECT_EQ(m.validity, 100.0);
  EXPECT_EQ(m.novelty, 0.0);
}

TEST(Metrics, EmptyInput) {
  trees::Dataset training;
  training.vocab = fixture_vocab();
  const auto m = compute_metrics({}, training, trees::ToyBackend(training.vocab.templates()));
  EXPECT_TRUE(m.empty);
  EXPECT_TRUE(m.no_valid);
  EXPECT_EQ(m.count, 0u);
  EXPECT_EQ(m.validity, 0.0);
  EXPECT_EQ(m.uniqueness, 0.0);
  EXPECT_EQ(m.novelty, 0.0);
  EXPECT_EQ(m.quality, 0.0);
  const auto j = nlohmann::json::parse(m.to_json());
  EXPECT_EQ(j["count"], 0);
}

TEST(Metrics, NoValidTreesFlag) {
  trees::Dataset training;
  training.vocab = fixture_vocab();
  const std::vector<ReactionTree> generated = {one_step(3, {2, 1})};
  const auto m = compute_metrics(generated, training, trees::ToyBackend(training.vocab.templates()));
  EXPECT_FALSE(m.empty);
  EXPECT_TRUE(m.no_valid);
  EXPECT_EQ(m.uniqueness, 0.0);
}

TEST(Metrics, DuplicationKeepsValidityAndHalvesUniqueness) {
  trees::GeneratorConfig g;
  g.n_trees = 60;
  const auto ds = trees::generate_toy_dataset(g);
  const trees::ToyBackend be(ds.vocab.templates());
  std::vector<ReactionTree> once;
  for (const auto& p : ds.trees) once.push_back(p.reaction);
  once.push_back(failing_tree(ds.vocab));
  std::vector<ReactionTree> twice = once;
  twice.insert(twice.end(), once.begin(), once.end());
  const auto a = compute_metrics(once, ds, be);
  const auto b = compute_metrics(twice, ds, be);
  EXPECT_EQ(a.validity, b.validity);
  EXPECT_EQ(a.unique, b.unique);
  EXPECT_DOUBLE_EQ(b.uniqueness, a.uniqueness / 2);
  for (double pct : {b.validity, b.uniqueness, b.novelty, b.quality}) {
    EXPECT_GE(pct, 0.0);
    EXPECT_LE(pct, 100.0);
  }
}

TEST(Descriptors, IdenticalSetsAreAtZeroAndEmptyAtTwo) {
  trees::GeneratorConfig g;
  g.n_trees = 50;
  const auto ds = trees::generate_toy_dataset(g);
  std::vector<ReactionTree> rt;
  std::vector<std::string> products;
  for (const auto& p : ds.trees) {
    rt.push_back(p.reaction);
    products.push_back(*p.product);
  }
  const auto d = describe(rt, products, ds.vocab.templates().size());
  EXPECT_EQ(descriptor_distance(d, d), 0.0);
  const auto none = describe({}, {}, ds.vocab.templates().size());
  EXPECT_EQ(descriptor_distance(d, none), 6.0);
  double s = 0;
  for (double v : d.product_length) s += v;
  EXPECT_NEAR(s, 1.0, 1e-12);
}

class SynthTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    trees::GeneratorConfig g;
    g.n_trees = 30;
    ds_ = new trees::Dataset(trees::generate_toy_dataset(g));
    vae::ModelConfig c;
    c.hidden_dim = 16;
    c.latent_dim = 4;
    c.epochs = 10;
    c.batch_size = 10;
    c.lr = 0.003;
    model_ = new vae::Model(c, ds_->vocab);
    vae::train(*model_, *ds_);
  }
  static void TearDownTestSuite() {
    delete model_;
    delete ds_;
  }
  static trees::Dataset* ds_;
  static vae::Model* model_;
};

trees::Dataset* SynthTest::ds_ = nullptr;
vae::Model* SynthTest::model_ = nullptr;

TEST_F(SynthTest, GreedyModalProductIsTheSingleDecode) {
  const trees::ToyBackend be(ds_->vocab.templates());
  const auto r = synthesizability_eval(*model_, 30, 4, be, 3, 0.0);
  ASSERT_EQ(r.modal_products.size(), 30u);
  EXPECT_EQ(r.rate, r.single_sample_validity);
  EXPECT_EQ(r.rate, 100.0 * static_cast<double>(r.codes_with_valid) / 30.0);
}

TEST_F(SynthTest, SingleDecodeReducesToValidity) {
  const trees::ToyBackend be(ds_->vocab.templates());
  const auto r = synthesizability_eval(*model_, 60, 1, be, 5);
  EXPECT_EQ(r.rate, r.single_sample_validity);
}

TEST_F(SynthTest, ModalSelectionDoesNotHurt) {
  const trees::ToyBackend be(ds_->vocab.templates());
  const auto r = synthesizability_eval(*model_, 60, 10, be, 5);
  EXPECT_GE(r.rate, r.single_sample_validity);
  const auto j = nlohmann::json::parse(r.to_json());
  EXPECT_EQ(j["k_decodes"], 10);
  const auto again = synthesizability_eval(*model_, 60, 10, be, 5);
  EXPECT_EQ(again.modal_products, r.modal_products);
}

}  // namespace
}  // namespace rxngen::executor
