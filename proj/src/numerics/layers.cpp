// Copyright 2026 The rxngen Authors
// SPDX-License-Identifier: Apache-2.0

#include "rxngen/numerics/layers.hpp"

#include <cmath>

namespace rxngen::numerics {

Tensor glorot_uniform(std::size_t rows, std::size_t cols, Rng& rng) {
  const double s = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::vector<double> data(rows * cols);
  for (double& v : data) v = (2.0 * rng.uniform() - 1.0) * s;
  return Tensor::matrix(rows, cols, std::move(data));
}

Linear Linear::create(ParameterStore& store, const std::string& prefix, std::size_t in, std::size_t out, Rng& rng) {
  Linear l;
  l.weight = &store.add(prefix + ".weight", glorot_uniform(out, in, rng));
  l.bias = &store.add(prefix + ".bias", Tensor({out}));
  return l;
}

Linear Linear::bind(ParameterStore& store, const std::string& prefix) {
  return {&store.at(prefix + ".weight"), &store.at(prefix + ".bias")};
}

Var Linear::operator()(Tape& tape, Var x) const { return tape.linear(tape.param(*weight), tape.param(*bias), x); }

Embedding Embedding::create(ParameterStore& store, const std::string& name, std::size_t count, std::size_t dim,
                            Rng& rng) {
  std::vector<double> data(count * dim);
  const double s = 1.0 / std::sqrt(static_cast<double>(dim));
  for (double& v : data) v = s * rng.normal();
  return {&store.add(name, Tensor::matrix(count, dim, std::move(data)))};
}

Embedding Embedding::bind(ParameterStore& store, const std::string& name) { return {&store.at(name)}; }

Var Embedding::operator()(Tape& tape, std::size_t index) const { return tape.row(tape.param(*table), index); }

GruCell GruCell::create(ParameterStore& store, const std::string& prefix, std::size_t input_dim,
                        std::size_t hidden_dim, Rng& rng) {
  GruCell g;
  g.update = Linear::create(store, prefix + ".update", input_dim + hidden_dim, hidden_dim, rng);
  g.reset = Linear::create(store, prefix + ".reset", input_dim + hidden_dim, hidden_dim, rng);
  g.candidate = Linear::create(store, prefix + ".candidate", input_dim + hidden_dim, hidden_dim, rng);
  return g;
}

GruCell GruCell::bind(ParameterStore& store, const std::string& prefix) {
  return {Linear::bind(store, prefix + ".update"), Linear::bind(store, prefix + ".reset"),
          Linear::bind(store, prefix + ".candidate")};
}

Var GruCell::operator()(Tape& tape, Var input, Var hidden) const {
  if (input.size() != input_dim() || hidden.size() != hidden_dim()) {
    throw ShapeError("gru_cell: expected input " + std::to_string(input_dim()) + " and hidden " +
                     std::to_string(hidden_dim()) + ", got " + std::to_string(input.size()) + " and " +
                     std::to_string(hidden.size()));
  }
  const Var xh = concat({input, hidden});
  const Var z = tape.sigmoid(update(tape, xh));
  const Var r = tape.sigmoid(reset(tape, xh));
  const Var xrh = concat({input, tape.mul(r, hidden)});
  const Var c = tape.tanh(candidate(tape, xrh));
  return tape.add(tape.mul(tape.one_minus(z), hidden), tape.mul(z, c));
}

}  // namespace rxngen::numerics
