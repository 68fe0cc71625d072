// Copyright 2026 The rxngen Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include "rxngen/jt/latent.hpp"
#include "rxngen/numerics/layers.hpp"
#include "rxngen/trees/chemistry.hpp"

namespace rxngen::rxn {

using numerics::Tape;
using numerics::Var;

struct Attention {
  Var alpha;    // [n], softmax of <s, h_j>
  Var context;  // [h], sum_j alpha_j h_j
};

/// `nodes` is the junction-tree embedding matrix with one row per node.
Attention attention(Tape& tape, Var nodes, Var s);

/// Bottom-up reaction-tree encoder. Leaves read a starting-molecule
/// embedding; an internal molecule made by template T from reactants j_t is
///   v = ReLU(W1[T] + U1 sum_t v_{j_t}).
/// The posterior is read from v_root.
struct ReactionEncoder {
  numerics::Embedding start_embed;
  numerics::Embedding template_embed;  // W1 as a row lookup
  numerics::Parameter* u1 = nullptr;
  numerics::Linear mu_head;
  numerics::Linear logvar_head;

  static ReactionEncoder create(numerics::ParameterStore& store, std::size_t n_start, std::size_t n_templates,
                                std::size_t hidden_dim, std::size_t latent_dim, numerics::Rng& rng);
  static ReactionEncoder bind(numerics::ParameterStore& store);

  std::size_t hidden_dim() const { return start_embed.dim(); }

  /// Throws trees::StructureError for invalid trees.
  jt::PosteriorParams encode(Tape& tape, const trees::ReactionTree& tree,
                             const trees::TemplateRegistry& registry) const;
};

struct ReactionLimits {
  int max_depth = 5;
  std::size_t max_nodes = 50;
};

/// Top-down decoder. Pending molecule nodes are expanded first-in first-out.
/// For pending node i with state s_i:
///   c_i = attention(H, s_i)
///   s_T = GRU_t([z, c_i], s_i), template ~ softmax(W_t [z, s_T])
/// then for each of the template's reactants, starting from prev = s_T,
///   s_j = GRU_m([z, c], prev), label ~ softmax(W_m [z, s_j])
/// where c is c_i, or attention(H, prev) with use_step_context. The last
/// molecule class means "expand further" and queues the reactant.
struct ReactionDecoder {
  numerics::Linear root;
  numerics::GruCell template_gru;
  numerics::GruCell molecule_gru;
  numerics::Linear template_head;
  numerics::Linear molecule_head;
  bool use_step_context = false;

  static ReactionDecoder create(numerics::ParameterStore& store, std::size_t n_start, std::size_t n_templates,
                                std::size_t hidden_dim, std::size_t latent_dim, numerics::Rng& rng);
  static ReactionDecoder bind(numerics::ParameterStore& store);

  std::size_t n_start() const { return molecule_head.out_dim() - 1; }
  std::size_t n_templates() const { return template_head.out_dim(); }

  /// `nodes` as for attention(). Greedy when rng is null or temperature <= 0.
  trees::ReactionTree decode(Tape& tape, Var z, Var nodes, const trees::TemplateRegistry& registry,
                             numerics::Rng* rng, ReactionLimits limits = {}, double temperature = 1.0) const;

  /// One cross-entropy term per template and molecule label along the
  /// ground-truth generation order.
  std::vector<Var> teacher_forced_terms(Tape& tape, const trees::ReactionTree& tree, Var z, Var nodes) const;
  Var teacher_forced_loss(Tape& tape, const trees::ReactionTree& tree, Var z, Var nodes) const;

  // Single steps, exposed for tests.
  Var root_state(Tape& tape, Var z) const;
  Var template_step(Tape& tape, Var z, Var context, Var state) const;
  Var molecule_step(Tape& tape, Var z, Var context, Var prev) const;
  Var template_logits(Tape& tape, Var z, Var state) const;
  Var molecule_logits(Tape& tape, Var z, Var state) const;
};

}  // namespace rxngen::rxn
