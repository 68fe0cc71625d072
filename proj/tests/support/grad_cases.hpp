// Copyright 2026 The rxngen Authors
// SPDX-License-Identifier: Apache-2.0

// One finite-difference case per differentiable primitive or layer. Each
// case fills a fresh store with random parameters and returns a scalar loss.

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "rxngen/jt/latent.hpp"
#include "rxngen/numerics/layers.hpp"
#include "rxngen/rxn/reaction_codec.hpp"

namespace rxngen::testing {

using LossFn = std::function<numerics::Var(numerics::Tape&)>;

struct GradCase {
  std::string name;
  std::function<LossFn(numerics::ParameterStore&, numerics::Rng&)> make;
};

inline numerics::Tensor random_tensor(numerics::Rng& rng, std::size_t rows, std::size_t cols = 0, double scale = 1.0) {
  std::vector<double> v(cols == 0 ? rows : rows * cols);
  for (double& x : v) x = scale * rng.normal();
  return cols == 0 ? numerics::Tensor::vector(std::move(v)) : numerics::Tensor::matrix(rows, cols, std::move(v));
}

/// Projects any output onto a fixed random direction so every element
/// contributes to the loss.
inline numerics::Var project(numerics::Tape& tape, numerics::Var out, const std::vector<double>& dir) {
  return tape.dot(out, tape.constant(std::vector<double>(dir.begin(), dir.begin() + out.size())));
}

inline std::vector<double> random_dir(numerics::Rng& rng, std::size_t n) {
  std::vector<double> d(n);
  for (double& x : d) x = rng.normal();
  return d;
}

inline std::vector<GradCase> primitive_grad_cases() {
  using numerics::ParameterStore;
  using numerics::Rng;
  using numerics::Tape;
  using numerics::Var;
  std::vector<GradCase> cases;

  auto unary = [&](std::string name, std::function<Var(Tape&, Var)> op, double shift = 0.0) {
    cases.push_back({name, [op, shift](ParameterStore& s, Rng& rng) -> LossFn {
                       auto t = random_tensor(rng, 6);
                       for (double& x : t.storage()) x += shift;
                       auto* a = &s.add("a", t);
                       auto dir = random_dir(rng, 64);
                       return [=](Tape& tape) { return project(tape, op(tape, tape.param(*a)), dir); };
                     }});
  };
  auto binary = [&](std::string name, std::function<Var(Tape&, Var, Var)> op) {
    cases.push_back({name, [op](ParameterStore& s, Rng& rng) -> LossFn {
                       auto* a = &s.add("a", random_tensor(rng, 5));
                       auto* b = &s.add("b", random_tensor(rng, 5));
                       auto dir = random_dir(rng, 64);
                       return [=](Tape& tape) {
                         return project(tape, op(tape, tape.param(*a), tape.param(*b)), dir);
                       };
                     }});
  };

  cases.push_back({"linear", [](ParameterStore& s, Rng& rng) -> LossFn {
                     auto* w = &s.add("w", random_tensor(rng, 4, 3));
                     auto* b = &s.add("b", random_tensor(rng, 4));
                     auto* x = &s.add("x", random_tensor(rng, 3));
                     auto dir = random_dir(rng, 64);
                     return [=](Tape& t) {
                       return project(t, t.linear(t.param(*w), t.param(*b), t.param(*x)), dir);
                     };
                   }});
  cases.push_back({"linear_no_bias", [](ParameterStore& s, Rng& rng) -> LossFn {
                     auto* w = &s.add("w", random_tensor(rng, 4, 3));
                     auto* x = &s.add("x", random_tensor(rng, 3));
                     auto dir = random_dir(rng, 64);
                     return [=](Tape& t) { return project(t, t.linear(t.param(*w), Var{}, t.param(*x)), dir); };
                   }});
  cases.push_back({"mat_t_vec", [](ParameterStore& s, Rng& rng) -> LossFn {
                     auto* m = &s.add("m", random_tensor(rng, 4, 3));
                     auto* x = &s.add("x", random_tensor(rng, 4));
                     auto dir = random_dir(rng, 64);
                     return [=](Tape& t) { return project(t, t.mat_t_vec(t.param(*m), t.param(*x)), dir); };
                   }});
  binary("add", [](Tape& t, Var a, Var b) { return t.add(a, b); });
  binary("sub", [](Tape& t, Var a, Var b) { return t.sub(a, b); });
  binary("mul", [](Tape& t, Var a, Var b) { return t.mul(a, b); });
  binary("dot", [](Tape& t, Var a, Var b) { return t.dot(a, b); });
  binary("concat", [](Tape& t, Var a, Var b) { return numerics::concat({a, b, a}); });
  binary("sum", [](Tape& t, Var a, Var b) { return numerics::sum({a, b, t.mul(a, b)}); });
  binary("stack_rows", [](Tape& t, Var a, Var b) { return numerics::stack_rows({a, b}); });
  binary("canonical_sum", [](Tape& t, Var a, Var b) { return numerics::canonical_sum(t, {b, a, t.mul(a, a)}, 5); });
  unary("scale", [](Tape& t, Var a) { return t.scale(a, -2.5); });
  unary("one_minus", [](Tape& t, Var a) { return t.one_minus(a); });
  unary("sigmoid", [](Tape& t, Var a) { return t.sigmoid(a); });
  unary("tanh", [](Tape& t, Var a) { return t.tanh(a); });
  unary("relu", [](Tape& t, Var a) { return t.relu(a); });
  unary("exp", [](Tape& t, Var a) { return t.exp(a); });
  unary("reduce_sum", [](Tape& t, Var a) { return t.reduce_sum(a); });
  unary("softmax", [](Tape& t, Var a) { return t.softmax(a); });
  unary("cross_entropy", [](Tape& t, Var a) { return t.cross_entropy(a, 2); });
  unary("bce_true", [](Tape& t, Var a) { return t.bce_with_logits(t.row(a, 1), true); });
  unary("bce_false", [](Tape& t, Var a) { return t.bce_with_logits(t.row(a, 4), false); });
  cases.push_back({"row", [](ParameterStore& s, Rng& rng) -> LossFn {
                     auto* m = &s.add("m", random_tensor(rng, 4, 3));
                     auto dir = random_dir(rng, 64);
                     return [=](Tape& t) { return project(t, t.row(t.param(*m), 2), dir); };
                   }});
  binary("kl_diag_gaussian", [](Tape& t, Var a, Var b) { return t.kl_diag_gaussian(a, b); });
  binary("sample_latent", [](Tape& t, Var a, Var b) {
    numerics::Rng eps(99);
    return jt::sample_latent(t, {a, b}, eps);
  });
  binary("attention", [](Tape& t, Var a, Var b) {
    const Var nodes = numerics::stack_rows({a, b, t.mul(a, b)});
    const auto att = rxn::attention(t, nodes, t.sub(a, b));
    return numerics::concat({att.alpha, att.context});
  });
  cases.push_back({"embedding", [](ParameterStore& s, Rng& rng) -> LossFn {
                     auto emb = numerics::Embedding::create(s, "e", 5, 4, rng);
                     auto dir = random_dir(rng, 64);
                     return [emb, dir](Tape& t) { return project(t, t.mul(emb(t, 3), emb(t, 1)), dir); };
                   }});
  cases.push_back({"gru", [](ParameterStore& s, Rng& rng) -> LossFn {
                     auto gru = numerics::GruCell::create(s, "g", 3, 4, rng);
                     auto* bias = &s.at("g.update.bias");
                     bias->value() = random_tensor(rng, 4, 0, 0.5);
                     auto* x = &s.add("x", random_tensor(rng, 3));
                     auto* h = &s.add("h", random_tensor(rng, 4));
                     auto dir = random_dir(rng, 64);
                     return [=](Tape& t) {
                       const Var h1 = gru(t, t.param(*x), t.param(*h));
                       return project(t, gru(t, t.param(*x), h1), dir);
                     };
                   }});
  return cases;
}

}  // namespace rxngen::testing
