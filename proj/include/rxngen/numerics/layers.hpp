// Copyright 2026 The rxngen Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "rxngen/numerics/ops.hpp"
#include "rxngen/numerics/random.hpp"
#include "rxngen/numerics/tensor.hpp"

namespace rxngen::numerics {

/// Uniform(-s, s) with s = sqrt(6 / (fan_in + fan_out)).
Tensor glorot_uniform(std::size_t rows, std::size_t cols, Rng& rng);

/// y = W x + b. Registers "<prefix>.weight" [out x in] and "<prefix>.bias".
struct Linear {
  Parameter* weight = nullptr;
  Parameter* bias = nullptr;

  static Linear create(ParameterStore& store, const std::string& prefix, std::size_t in, std::size_t out, Rng& rng);
  static Linear bind(ParameterStore& store, const std::string& prefix);

  std::size_t in_dim() const { return weight->value().cols(); }
  std::size_t out_dim() const { return weight->value().rows(); }
  Var operator()(Tape& tape, Var x) const;
};

/// Lookup table of `count` row vectors of width `dim`.
struct Embedding {
  Parameter* table = nullptr;

  static Embedding create(ParameterStore& store, const std::string& name, std::size_t count, std::size_t dim,
                          Rng& rng);
  static Embedding bind(ParameterStore& store, const std::string& name);

  std::size_t count() const { return table->value().rows(); }
  std::size_t dim() const { return table->value().cols(); }
  Var operator()(Tape& tape, std::size_t index) const;
};

/// Standard GRU cell over the concatenation [input, hidden]:
///   z = sigmoid(W_z [x, h] + b_z)
///   r = sigmoid(W_r [x, h] + b_r)
///   c = tanh(W_h [x, r * h] + b_h)
///   h' = (1 - z) * h + z * c
struct GruCell {
  Linear update;
  Linear reset;
  Linear candidate;

  static GruCell create(ParameterStore& store, const std::string& prefix, std::size_t input_dim,
                        std::size_t hidden_dim, Rng& rng);
  static GruCell bind(ParameterStore& store, const std::string& prefix);

  std::size_t hidden_dim() const { return update.out_dim(); }
  std::size_t input_dim() const { return update.in_dim() - update.out_dim(); }
  Var operator()(Tape& tape, Var input, Var hidden) const;
};

}  // namespace rxngen::numerics
