// Copyright 2026 The rxngen Authors
// SPDX-License-Identifier: Apache-2.0

#include "rxngen/rxn/reaction_codec.hpp"

#include <deque>
#include <functional>
#include <stdexcept>

namespace rxngen::rxn {

using numerics::Embedding;
using numerics::GruCell;
using numerics::Linear;
using numerics::ParameterStore;
using numerics::Rng;
using trees::NodeKind;

Attention attention(Tape& tape, Var nodes, Var s) {
  const Var alpha = tape.softmax(tape.linear(nodes, Var{}, s));
  return {alpha, tape.mat_t_vec(nodes, alpha)};
}

ReactionEncoder ReactionEncoder::create(ParameterStore& store, std::size_t n_start, std::size_t n_templates,
                                        std::size_t hidden_dim, std::size_t latent_dim, Rng& rng) {
  ReactionEncoder e;
  e.start_embed = Embedding::create(store, "rxn.enc.start", n_start, hidden_dim, rng);
  e.template_embed = Embedding::create(store, "rxn.enc.W1", n_templates, hidden_dim, rng);
  e.u1 = &store.add("rxn.enc.U1", numerics::glorot_uniform(hidden_dim, hidden_dim, rng));
  e.mu_head = Linear::create(store, "vae.qy.mu", hidden_dim, latent_dim, rng);
  e.logvar_head = Linear::create(store, "vae.qy.logvar", hidden_dim, latent_dim, rng);
  return e;
}

ReactionEncoder ReactionEncoder::bind(ParameterStore& store) {
  ReactionEncoder e;
  e.start_embed = Embedding::bind(store, "rxn.enc.start");
  e.template_embed = Embedding::bind(store, "rxn.enc.W1");
  e.u1 = &store.at("rxn.enc.U1");
  e.mu_head = Linear::bind(store, "vae.qy.mu");
  e.logvar_head = Linear::bind(store, "vae.qy.logvar");
  return e;
}

jt::PosteriorParams ReactionEncoder::encode(Tape& tape, const trees::ReactionTree& tree,
                                            const trees::TemplateRegistry& registry) const {
  trees::validate_structure(tree, registry, start_embed.count());
  if (registry.size() != template_embed.count()) {
    throw trees::StructureError("template registry size does not match the encoder");
  }
  const auto children = tree.children();
  const Var u1_var = tape.param(*u1);
  const std::size_t h = hidden_dim();

  std::function<Var(int)> molecule = [&](int node) -> Var {
    const auto& n = tree.nodes[node];
    if (n.label != trees::kExpandLabel) return start_embed(tape, static_cast<std::size_t>(n.label));
    const int t = children[node].front();
    std::vector<Var> reactants;
    for (int r : children[t]) reactants.push_back(molecule(r));
    const Var total = numerics::canonical_sum(tape, std::move(reactants), h);
    const Var pre = tape.add(template_embed(tape, static_cast<std::size_t>(tree.nodes[t].label)),
                             tape.linear(u1_var, Var{}, total));
    return tape.relu(pre);
  };
  const Var v_root = molecule(tree.root);
  return {mu_head(tape, v_root), logvar_head(tape, v_root)};
}

ReactionDecoder ReactionDecoder::create(ParameterStore& store, std::size_t n_start, std::size_t n_templates,
                                        std::size_t hidden_dim, std::size_t latent_dim, Rng& rng) {
  ReactionDecoder d;
  d.root = Linear::create(store, "rxn.dec.root", latent_dim, hidden_dim, rng);
  d.template_gru = GruCell::create(store, "rxn.dec.gru_t", latent_dim + hidden_dim, hidden_dim, rng);
  d.molecule_gru = GruCell::create(store, "rxn.dec.gru_m", latent_dim + hidden_dim, hidden_dim, rng);
  d.template_head = Linear::create(store, "rxn.dec.template", latent_dim + hidden_dim, n_templates, rng);
  d.molecule_head = Linear::create(store, "rxn.dec.molecule", latent_dim + hidden_dim, n_start + 1, rng);
  return d;
}

ReactionDecoder ReactionDecoder::bind(ParameterStore& store) {
  ReactionDecoder d;
  d.root = Linear::bind(store, "rxn.dec.root");
  d.template_gru = GruCell::bind(store, "rxn.dec.gru_t");
  d.molecule_gru = GruCell::bind(store, "rxn.dec.gru_m");
  d.template_head = Linear::bind(store, "rxn.dec.template");
  d.molecule_head = Linear::bind(store, "rxn.dec.molecule");
  return d;
}

Var ReactionDecoder::root_state(Tape& tape, Var z) const { return tape.relu(root(tape, z)); }

Var ReactionDecoder::template_step(Tape& tape, Var z, Var context, Var state) const {
  return template_gru(tape, numerics::concat({z, context}), state);
}

Var ReactionDecoder::molecule_step(Tape& tape, Var z, Var context, Var prev) const {
  return molecule_gru(tape, numerics::concat({z, context}), prev);
}

Var ReactionDecoder::template_logits(Tape& tape, Var z, Var state) const {
  return template_head(tape, numerics::concat({z, state}));
}

Var ReactionDecoder::molecule_logits(Tape& tape, Var z, Var state) const {
  return molecule_head(tape, numerics::concat({z, state}));
}

namespace {

struct Pending {
  int node;
  Var state;
  int depth;  // templates above this molecule
};

}  // namespace

std::vector<Var> ReactionDecoder::teacher_forced_terms(Tape& tape, const trees::ReactionTree& tree, Var z,
                                                       Var nodes) const {
  const auto children = tree.children();
  const int expand_class = static_cast<int>(n_start());
  std::vector<Var> terms;
  std::deque<Pending> queue{{tree.root, root_state(tape, z), 0}};
  while (!queue.empty()) {
    const Pending p = queue.front();
    queue.pop_front();
    const Var c_i = attention(tape, nodes, p.state).context;
    const Var s_t = template_step(tape, z, c_i, p.state);
    const int t = children[p.node].front();
    terms.push_back(tape.cross_entropy(template_logits(tape, z, s_t), static_cast<std::size_t>(tree.nodes[t].label)));
    Var prev = s_t;
    for (int r : children[t]) {
      const Var ctx = use_step_context ? attention(tape, nodes, prev).context : c_i;
      const Var s_j = molecule_step(tape, z, ctx, prev);
      const int label = tree.nodes[r].label;
      const int target = label == trees::kExpandLabel ? expand_class : label;
      terms.push_back(tape.cross_entropy(molecule_logits(tape, z, s_j), static_cast<std::size_t>(target)));
      if (label == trees::kExpandLabel) queue.push_back({r, s_j, p.depth + 1});
      prev = s_j;
    }
  }
  return terms;
}

Var ReactionDecoder::teacher_forced_loss(Tape& tape, const trees::ReactionTree& tree, Var z, Var nodes) const {
  return tape.sum(teacher_forced_terms(tape, tree, z, nodes));
}

trees::ReactionTree ReactionDecoder::decode(Tape& tape, Var z, Var nodes, const trees::TemplateRegistry& registry,
                                            Rng* rng, ReactionLimits limits, double temperature) const {
  if (limits.max_depth < 1) throw std::invalid_argument("ReactionLimits.max_depth must be >= 1");
  if (registry.size() != n_templates()) throw std::invalid_argument("template registry size does not match decoder");
  const std::size_t expand_class = n_start();
  const std::size_t reserve = 1 + static_cast<std::size_t>(registry.max_arity());

  trees::ReactionTree tree;
  tree.nodes.push_back({NodeKind::kMolecule, trees::kExpandLabel});
  // Best starting molecule per node, used when the node budget runs out.
  std::vector<int> fallback{-1};

  std::vector<bool> no_expand(expand_class + 1, true);
  no_expand[expand_class] = false;

  std::deque<Pending> queue{{0, root_state(tape, z), 0}};
  while (!queue.empty()) {
    const Pending p = queue.front();
    queue.pop_front();
    if (p.node != 0 && tree.size() + reserve > limits.max_nodes) {
      tree.nodes[p.node].label = fallback[p.node];
      continue;
    }
    const Var c_i = attention(tape, nodes, p.state).context;
    const Var s_t = template_step(tape, z, c_i, p.state);
    const int tid = static_cast<int>(jt::sample_class(template_logits(tape, z, s_t).value(), temperature, rng));
    const int t = static_cast<int>(tree.size());
    tree.nodes.push_back({NodeKind::kTemplate, tid});
    tree.edges.emplace_back(p.node, t);
    fallback.push_back(-1);

    const bool frontier = p.depth + 1 >= limits.max_depth;
    Var prev = s_t;
    for (int k = 0; k < registry.at(tid).arity; ++k) {
      const Var ctx = use_step_context ? attention(tape, nodes, prev).context : c_i;
      const Var s_j = molecule_step(tape, z, ctx, prev);
      const Var logits = molecule_logits(tape, z, s_j);
      const auto label = jt::sample_class(logits.value(), temperature, rng, frontier ? &no_expand : nullptr);
      const int r = static_cast<int>(tree.size());
      tree.edges.emplace_back(t, r);
      if (label == expand_class) {
        tree.nodes.push_back({NodeKind::kMolecule, trees::kExpandLabel});
        fallback.push_back(static_cast<int>(jt::argmax(logits.value().first(expand_class))));
        queue.push_back({r, s_j, p.depth + 1});
      } else {
        tree.nodes.push_back({NodeKind::kMolecule, static_cast<int>(label)});
        fallback.push_back(-1);
      }
      prev = s_j;
    }
  }
  return tree;
}

}  // namespace rxngen::rxn
