// Copyright 2026 The rxngen Authors
// SPDX-License-Identifier: Apache-2.0

#include "rxngen/vae/model.hpp"

#include <fstream>
#include <json.hpp>
#include <stdexcept>

#include "rxngen/numerics/checkpoint.hpp"

namespace rxngen::vae {

using json = nlohmann::json;

void validate(const ModelConfig& c) {
  auto positive = [](bool ok, const char* name) {
    if (!ok) throw std::invalid_argument(std::string("model config: ") + name + " must be positive");
  };
  positive(c.latent_dim > 0, "latent_dim");
  positive(c.hidden_dim > 0, "hidden_dim");
  positive(c.lr > 0, "lr");
  positive(c.batch_size > 0, "batch_size");
  positive(c.epochs > 0, "epochs");
  positive(c.clip_norm > 0, "clip_norm");
  positive(c.jt_max_nodes > 0, "jt_max_nodes");
  positive(c.rxn_max_depth > 0, "rxn_max_depth");
  positive(c.rxn_max_nodes > 0, "rxn_max_nodes");
}

std::string config_to_json(const ModelConfig& c) {
  const json j = {
      {"latent_dim", c.latent_dim},         {"hidden_dim", c.hidden_dim},
      {"lr", c.lr},                         {"batch_size", c.batch_size},
      {"epochs", c.epochs},                 {"kl_warmup_epochs", c.kl_warmup_epochs},
      {"clip_norm", c.clip_norm},           {"seed", c.seed},
      {"use_step_context", c.use_step_context}, {"jt_max_nodes", c.jt_max_nodes},
      {"rxn_max_depth", c.rxn_max_depth},   {"rxn_max_nodes", c.rxn_max_nodes},
  };
  return j.dump();
}

ModelConfig config_from_json(const std::string& text) {
  const json j = json::parse(text);
  ModelConfig c;
  c.latent_dim = j.at("latent_dim").get<std::size_t>();
  c.hidden_dim = j.at("hidden_dim").get<std::size_t>();
  c.lr = j.at("lr").get<double>();
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.epochs = j.at("epochs").get<std::size_t>();
  c.kl_warmup_epochs = j.at("kl_warmup_epochs").get<std::size_t>();
  c.clip_norm = j.at("clip_norm").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.use_step_context = j.at("use_step_context").get<bool>();
  c.jt_max_nodes = j.at("jt_max_nodes").get<std::size_t>();
  c.rxn_max_depth = j.at("rxn_max_depth").get<int>();
  c.rxn_max_nodes = j.at("rxn_max_nodes").get<std::size_t>();
  validate(c);
  return c;
}

Model::Model(ModelConfig config, trees::Vocabularies vocab) : config_(config), vocab_(std::move(vocab)) {
  validate(config_);
  const std::size_t v = vocab_.substructures().size();
  const std::size_t s = vocab_.starting_molecules().size();
  const std::size_t t = vocab_.templates().size();
  if (v == 0 || s == 0 || t == 0) throw std::invalid_argument("model needs non-empty vocabularies");
  numerics::Rng rng(numerics::Rng::derive(config_.seed, 0));
  const std::size_t h = config_.hidden_dim;
  const std::size_t d = config_.latent_dim;
  jt_encoder = jt::JunctionEncoder::create(store_, v, h, d, rng);
  jt_decoder = jt::JunctionDecoder::create(store_, v, h, d, rng);
  rxn_encoder = rxn::ReactionEncoder::create(store_, s, t, h, d, rng);
  rxn_decoder = rxn::ReactionDecoder::create(store_, s, t, h, d, rng);
  rxn_decoder.use_step_context = config_.use_step_context;
}

std::filesystem::path sidecar_path(const std::filesystem::path& checkpoint) {
  return std::filesystem::path(checkpoint.string() + ".json");
}

void save_model(const Model& model, const std::filesystem::path& path) {
  numerics::save_checkpoint(path, model.params());
  const json vocab = json::parse(trees::dataset_to_json({model.vocab(), {}})).at("vocabularies");
  const json doc = {{"format_version", 1}, {"config", json::parse(config_to_json(model.config()))},
                    {"vocabularies", vocab}};
  std::ofstream os(sidecar_path(path), std::ios::binary | std::ios::trunc);
  if (!os) throw numerics::CheckpointError("cannot write " + sidecar_path(path).string());
  os << doc.dump(1) << "\n";
  if (!os) throw numerics::CheckpointError("write failed: " + sidecar_path(path).string());
}

Model load_model(const std::filesystem::path& path) {
  std::ifstream is(sidecar_path(path), std::ios::binary);
  if (!is) throw numerics::CheckpointError("missing model sidecar " + sidecar_path(path).string());
  json doc;
  try {
    doc = json::parse(is);
  } catch (const json::exception& e) {
    throw numerics::CheckpointError("model sidecar: " + std::string(e.what()));
  }
  ModelConfig config;
  trees::Vocabularies vocab;
  try {
    config = config_from_json(doc.at("config").dump());
    const json ds = {{"format_version", trees::kDatasetFormatVersion},
                     {"vocabularies", doc.at("vocabularies")},
                     {"trees", json::array()}};
    vocab = trees::dataset_from_json(ds.dump()).vocab;
  } catch (const std::exception& e) {
    throw numerics::CheckpointError("model sidecar: " + std::string(e.what()));
  }
  Model model(config, std::move(vocab));
  numerics::load_checkpoint(path, model.params());
  return model;
}

}  // namespace rxngen::vae
