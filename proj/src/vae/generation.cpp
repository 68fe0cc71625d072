// Copyright 2026 The rxngen Authors
// SPDX-License-Identifier: Apache-2.0

#include <exception>

#include "rxngen/vae/model.hpp"

namespace rxngen::vae {

trees::TreePair decode_latent(const Model& model, std::span<const double> z_x, std::span<const double> z_y,
                              numerics::Rng* rng, double temperature) {
  const ModelConfig& cfg = model.config();
  Tape tape;
  const Var zx = tape.constant(std::vector<double>(z_x.begin(), z_x.end()));
  const Var zy = tape.constant(std::vector<double>(z_y.begin(), z_y.end()));
  trees::TreePair out;
  out.junction = model.jt_decoder.decode(tape, zx, rng, {.max_nodes = cfg.jt_max_nodes}, temperature);
  const auto enc = model.jt_encoder.encode(tape, out.junction);
  const Var nodes = numerics::stack_rows(enc.nodes.h);
  out.reaction = model.rxn_decoder.decode(tape, zy, nodes, model.vocab().templates(), rng,
                                          {.max_depth = cfg.rxn_max_depth, .max_nodes = cfg.rxn_max_nodes},
                                          temperature);
  return out;
}

namespace {

trees::TreePair sample_one(const Model& model, std::uint64_t seed, std::size_t i, const DecodeOptions& options) {
  numerics::Rng rng(numerics::Rng::derive(seed, i));
  const std::size_t d = model.config().latent_dim;
  std::vector<double> z_x(d), z_y(d);
  for (double& v : z_x) v = rng.normal();
  for (double& v : z_y) v = rng.normal();
  return decode_latent(model, z_x, z_y, &rng, options.temperature);
}

}  // namespace

std::vector<trees::TreePair> sample_prior_serial(const Model& model, std::size_t n, std::uint64_t seed,
                                                 DecodeOptions options) {
  std::vector<trees::TreePair> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(sample_one(model, seed, i, options));
  return out;
}

std::vector<trees::TreePair> sample_prior(const Model& model, std::size_t n, std::uint64_t seed,
                                          DecodeOptions options) {
  std::vector<trees::TreePair> out(n);
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < n; ++i) {
    try {
      out[i] = sample_one(model, seed, i, options);
    } catch (...) {
#pragma omp critical
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return out;
}

Embedding embed(const Model& model, const trees::TreePair& pair) {
  Tape tape;
  const auto mx = model.jt_encoder.encode(tape, pair.junction).posterior.mu.value();
  const auto my = model.rxn_encoder.encode(tape, pair.reaction, model.vocab().templates()).mu.value();
  return {{mx.begin(), mx.end()}, {my.begin(), my.end()}};
}

trees::TreePair reconstruct(const Model& model, const trees::TreePair& pair) {
  const Embedding e = embed(model, pair);
  return decode_latent(model, e.mu_x, e.mu_y, nullptr, 0.0);
}

}  // namespace rxngen::vae
