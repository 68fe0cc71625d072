// Copyright 2026 The rxngen Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include "rxngen/numerics/ops.hpp"
#include "rxngen/numerics/random.hpp"

namespace rxngen::jt {

/// Diagonal Gaussian posterior q(z | tree).
struct PosteriorParams {
  numerics::Var mu;
  numerics::Var logvar;
};

/// Reparameterized draw z = mu + exp(logvar / 2) * eps, eps ~ N(0, I).
/// Gradients flow to mu and logvar.
numerics::Var sample_latent(numerics::Tape& tape, const PosteriorParams& post, numerics::Rng& rng);

/// Index of the largest value; ties resolve to the lowest index.
std::size_t argmax(std::span<const double> values);

/// Draws a class from softmax(logits / temperature). A temperature <= 0
/// means argmax. Entries with mask[i] == false are excluded.
std::size_t sample_class(std::span<const double> logits, double temperature, numerics::Rng* rng,
                         const std::vector<bool>* mask = nullptr);

}  // namespace rxngen::jt
