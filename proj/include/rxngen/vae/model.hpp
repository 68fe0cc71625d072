// Copyright 2026 The rxngen Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "rxngen/jt/junction_codec.hpp"
#include "rxngen/rxn/reaction_codec.hpp"
#include "rxngen/trees/dataset.hpp"

namespace rxngen::vae {

using numerics::Tape;
using numerics::Var;

struct ModelConfig {
  std::size_t latent_dim = 50;
  std::size_t hidden_dim = 200;
  double lr = 1e-3;
  std::size_t batch_size = 32;
  std::size_t epochs = 100;
  std::size_t kl_warmup_epochs = 10;  // 0 disables warmup (beta = 1 throughout)
  double clip_norm = 10.0;
  std::uint64_t seed = 1;
  bool use_step_context = false;
  std::size_t jt_max_nodes = 40;
  int rxn_max_depth = 5;
  std::size_t rxn_max_nodes = 50;
};

/// Throws std::invalid_argument naming the first non-positive field.
void validate(const ModelConfig& config);
std::string config_to_json(const ModelConfig& config);
ModelConfig config_from_json(const std::string& text);

/// Both codecs and their parameters. Parameter names carry the "jt.",
/// "rxn." and "vae." prefixes.
class Model {
 public:
  Model(ModelConfig config, trees::Vocabularies vocab);
  Model(Model&&) = default;
  Model& operator=(Model&&) = default;

  const ModelConfig& config() const { return config_; }
  const trees::Vocabularies& vocab() const { return vocab_; }
  numerics::ParameterStore& params() { return store_; }
  const numerics::ParameterStore& params() const { return store_; }

  jt::JunctionEncoder jt_encoder;
  jt::JunctionDecoder jt_decoder;
  rxn::ReactionEncoder rxn_encoder;
  rxn::ReactionDecoder rxn_decoder;

 private:
  ModelConfig config_;
  trees::Vocabularies vocab_;
  numerics::ParameterStore store_;
};

/// Writes the checkpoint to `path` and the config plus vocabularies to
/// `path` + ".json".
void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);
std::filesystem::path sidecar_path(const std::filesystem::path& checkpoint);

struct ElboTerms {
  Var total;
  Var junction;
  Var reaction;
  Var kl_x;
  Var kl_y;
};

struct ElboValues {
  double total = 0;
  double junction = 0;
  double reaction = 0;
  double kl_x = 0;
  double kl_y = 0;

  ElboValues& operator+=(const ElboValues& o);
  ElboValues scaled(double k) const;
};

ElboValues values_of(const ElboTerms& terms);

/// total = L_junction + L_reaction + beta * (KL_x + KL_y), with both codes
/// drawn by reparameterization from `rng`.
ElboTerms elbo_loss(Tape& tape, const Model& model, const trees::TreePair& pair, double beta, numerics::Rng& rng);

double beta_for_epoch(const ModelConfig& config, std::size_t epoch);  // epoch is 1-based

struct EpochRow {
  std::size_t epoch = 0;
  double beta = 0;
  ElboValues mean;  // per-example means over the epoch
  double grad_norm = 0;
  double seconds = 0;
};

struct TrainReport {
  std::vector<EpochRow> epochs;
  /// Deterministic re-evaluation of the final (float32-rounded) parameters.
  ElboValues final_eval;
  bool kl_warmup = true;
  std::string to_csv() const;
};

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using EpochCallback = std::function<void(const EpochRow&)>;

/// Adam on shuffled mini-batches; the summed batch loss is divided by the
/// batch size before one backward pass. Parameters are rounded to float32
/// at the end so that the in-memory model equals its checkpoint.
TrainReport train(Model& model, const trees::Dataset& dataset, const EpochCallback& on_epoch = {});

/// Mean ELBO terms over the dataset with a fixed noise stream.
ElboValues evaluate(const Model& model, const trees::Dataset& dataset, double beta, std::uint64_t seed);

/// Rounds every parameter to the nearest float32.
void round_to_float32(numerics::ParameterStore& store);

struct DecodeOptions {
  double temperature = 1.0;  // <= 0 means greedy
};

/// Decodes z_x to a junction tree, re-encodes it for the node embeddings
/// and decodes z_y against them. `rng` may be null for greedy decoding.
trees::TreePair decode_latent(const Model& model, std::span<const double> z_x, std::span<const double> z_y,
                              numerics::Rng* rng, double temperature = 1.0);

/// Sample i draws z_x then z_y from N(0, I) and decodes with the stream
/// Rng::derive(seed, i). Results do not depend on the thread count.
std::vector<trees::TreePair> sample_prior(const Model& model, std::size_t n, std::uint64_t seed,
                                          DecodeOptions options = {});
std::vector<trees::TreePair> sample_prior_serial(const Model& model, std::size_t n, std::uint64_t seed,
                                                 DecodeOptions options = {});

struct Embedding {
  std::vector<double> mu_x;
  std::vector<double> mu_y;
};

Embedding embed(const Model& model, const trees::TreePair& pair);
/// Greedy decode from the posterior means.
trees::TreePair reconstruct(const Model& model, const trees::TreePair& pair);

}  // namespace rxngen::vae
