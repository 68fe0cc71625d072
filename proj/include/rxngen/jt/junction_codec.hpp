// Copyright 2026 The rxngen Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "rxngen/jt/latent.hpp"
#include "rxngen/numerics/layers.hpp"
#include "rxngen/trees/trees.hpp"

namespace rxngen::jt {

using numerics::Tape;
using numerics::Var;

/// Directed edge (from, to) -> message vector.
using MessageTable = std::map<std::pair<int, int>, Var>;

struct NodeEmbeddings {
  std::vector<Var> h;  // indexed by node id
  int root = 0;
};

struct JunctionEncoding {
  NodeEmbeddings nodes;
  PosteriorParams posterior;
  MessageTable messages;
};

/// The leaf with the smallest node id (node 0 for a single-node tree).
int default_encoding_root(const trees::JunctionTree& tree);

/// Tree message-passing encoder. Messages are
///   m_ij = GRU(e(x_i), sum_{k in N(i)\j} m_ki)
/// computed bottom-up towards the root and then top-down, and node embeddings
///   h_i = ReLU(W0 x_i + U0 sum_{k in N(i)} m_ki).
/// The posterior is read from h_root with two linear heads.
struct JunctionEncoder {
  numerics::Embedding label_embed;  // GRU input e(x_i)
  numerics::GruCell gru;            // shared by both passes
  numerics::Embedding w0;           // W0 x_i as a row lookup
  numerics::Parameter* u0 = nullptr;
  numerics::Linear mu_head;
  numerics::Linear logvar_head;

  static JunctionEncoder create(numerics::ParameterStore& store, std::size_t vocab_size, std::size_t hidden_dim,
                                std::size_t latent_dim, numerics::Rng& rng);
  static JunctionEncoder bind(numerics::ParameterStore& store);

  std::size_t vocab_size() const { return label_embed.count(); }
  std::size_t hidden_dim() const { return gru.hidden_dim(); }

  /// Throws trees::StructureError for malformed trees or out-of-vocab labels.
  JunctionEncoding encode(Tape& tape, const trees::JunctionTree& tree, std::optional<int> root = std::nullopt) const;
};

struct JunctionLimits {
  std::size_t max_nodes = 40;
};

/// Depth-first junction-tree decoder. A single traversal state is carried
/// through the walk: it is updated by the GRU on every move down (input
/// [z, e(parent label), 1]) and every move back up (input [z, e(child
/// label), 0]). At each visit the topology head decides expand vs backtrack
/// and the label head predicts each new child.
struct JunctionDecoder {
  numerics::Embedding label_embed;
  numerics::Linear init;
  numerics::GruCell gru;
  numerics::Linear topology_head;
  numerics::Linear label_head;

  static JunctionDecoder create(numerics::ParameterStore& store, std::size_t vocab_size, std::size_t hidden_dim,
                                std::size_t latent_dim, numerics::Rng& rng);
  static JunctionDecoder bind(numerics::ParameterStore& store);

  std::size_t vocab_size() const { return label_embed.count(); }

  /// Greedy when rng is null (or temperature <= 0), sampling otherwise.
  trees::JunctionTree decode(Tape& tape, Var z, numerics::Rng* rng, JunctionLimits limits = {},
                             double temperature = 1.0) const;

  /// Binary cross-entropy of every topology decision along the
  /// ground-truth walk plus categorical cross-entropy of every label.
  Var teacher_forced_loss(Tape& tape, const trees::JunctionTree& tree, Var z) const;

  // Single steps, exposed for tests.
  Var initial_state(Tape& tape, Var z) const;
  Var move(Tape& tape, Var z, Var state, int label, bool down) const;
  Var topology_logit(Tape& tape, Var z, Var state) const;
  Var label_logits(Tape& tape, Var z, Var state) const;
};

}  // namespace rxngen::jt
