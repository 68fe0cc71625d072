// Copyright 2026 The rxngen Authors
// SPDX-License-Identifier: Apache-2.0

#include "rxngen/jt/latent.hpp"

#include <cmath>
#include <limits>

namespace rxngen::jt {

numerics::Var sample_latent(numerics::Tape& tape, const PosteriorParams& post, numerics::Rng& rng) {
  std::vector<double> eps(post.mu.size());
  for (double& e : eps) e = rng.normal();
  const auto sigma = tape.exp(tape.scale(post.logvar, 0.5));
  return tape.add(post.mu, tape.mul(sigma, tape.constant(std::move(eps))));
}

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

std::size_t sample_class(std::span<const double> logits, double temperature, numerics::Rng* rng,
                         const std::vector<bool>* mask) {
  auto allowed = [&](std::size_t i) { return !mask || (*mask)[i]; };
  if (!rng || temperature <= 0.0) {
    std::size_t best = logits.size();
    for (std::size_t i = 0; i < logits.size(); ++i) {
      if (allowed(i) && (best == logits.size() || logits[i] > logits[best])) best = i;
    }
    return best;
  }
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (allowed(i)) mx = std::max(mx, logits[i] / temperature);
  }
  std::vector<double> w(logits.size(), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (allowed(i)) total += w[i] = std::exp(logits[i] / temperature - mx);
  }
  double u = rng->uniform() * total;
  std::size_t last = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (!allowed(i)) continue;
    last = i;
    if (u < w[i]) return i;
    u -= w[i];
  }
  return last;
}

}  // namespace rxngen::jt
