// Copyright 2026 The rxngen Authors
// SPDX-License-Identifier: Apache-2.0

#include "rxngen/jt/junction_codec.hpp"

#include <cmath>
#include <stdexcept>

namespace rxngen::jt {

using numerics::Embedding;
using numerics::GruCell;
using numerics::Linear;
using numerics::ParameterStore;
using numerics::Rng;

int default_encoding_root(const trees::JunctionTree& tree) {
  if (tree.size() <= 1) return 0;
  std::vector<int> degree(tree.size(), 0);
  for (const auto& [p, c] : tree.edges) {
    ++degree[p];
    ++degree[c];
  }
  for (std::size_t i = 0; i < tree.size(); ++i) {
    if (degree[i] == 1) return static_cast<int>(i);
  }
  return 0;
}

JunctionEncoder JunctionEncoder::create(ParameterStore& store, std::size_t vocab_size, std::size_t hidden_dim,
                                        std::size_t latent_dim, Rng& rng) {
  JunctionEncoder e;
  e.label_embed = Embedding::create(store, "jt.enc.embed", vocab_size, hidden_dim, rng);
  e.gru = GruCell::create(store, "jt.enc.gru", hidden_dim, hidden_dim, rng);
  e.w0 = Embedding::create(store, "jt.enc.W0", vocab_size, hidden_dim, rng);
  e.u0 = &store.add("jt.enc.U0", numerics::glorot_uniform(hidden_dim, hidden_dim, rng));
  e.mu_head = Linear::create(store, "vae.qx.mu", hidden_dim, latent_dim, rng);
  e.logvar_head = Linear::create(store, "vae.qx.logvar", hidden_dim, latent_dim, rng);
  return e;
}

JunctionEncoder JunctionEncoder::bind(ParameterStore& store) {
  JunctionEncoder e;
  e.label_embed = Embedding::bind(store, "jt.enc.embed");
  e.gru = GruCell::bind(store, "jt.enc.gru");
  e.w0 = Embedding::bind(store, "jt.enc.W0");
  e.u0 = &store.at("jt.enc.U0");
  e.mu_head = Linear::bind(store, "vae.qx.mu");
  e.logvar_head = Linear::bind(store, "vae.qx.logvar");
  return e;
}

JunctionEncoding JunctionEncoder::encode(Tape& tape, const trees::JunctionTree& tree, std::optional<int> root) const {
  trees::validate_junction(tree, vocab_size());
  const std::size_t n = tree.size();
  const std::size_t h = hidden_dim();
  const auto nbrs = tree.neighbors();

  JunctionEncoding out;
  out.nodes.root = root.value_or(default_encoding_root(tree));
  if (out.nodes.root < 0 || static_cast<std::size_t>(out.nodes.root) >= n) {
    throw trees::StructureError("encoding root out of range");
  }

  std::vector<std::optional<Var>> input(n);
  auto embed = [&](int i) {
    if (!input[i]) input[i] = label_embed(tape, static_cast<std::size_t>(tree.labels[i]));
    return *input[i];
  };

  auto compute_message = [&](int i, int j) {
    std::vector<Var> precursors;
    for (int k : nbrs[i]) {
      if (k == j) continue;
      auto it = out.messages.find({k, i});
      if (it == out.messages.end()) {
        throw std::logic_error("message schedule: m(" + std::to_string(k) + "->" + std::to_string(i) +
                               ") needed before m(" + std::to_string(i) + "->" + std::to_string(j) + ")");
      }
      precursors.push_back(it->second);
    }
    const Var hidden = numerics::canonical_sum(tape, std::move(precursors), h);
    out.messages.emplace(std::make_pair(i, j), gru(tape, embed(i), hidden));
  };

  // Preorder from the root gives parents before children.
  std::vector<int> order;
  std::vector<int> parent(n, -1);
  {
    std::vector<int> stack{out.nodes.root};
    std::vector<bool> seen(n, false);
    seen[out.nodes.root] = true;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      order.push_back(u);
      for (auto it = nbrs[u].rbegin(); it != nbrs[u].rend(); ++it) {
        if (!seen[*it]) {
          seen[*it] = true;
          parent[*it] = u;
          stack.push_back(*it);
        }
      }
    }
  }
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if (parent[*it] >= 0) compute_message(*it, parent[*it]);
  }
  for (int u : order) {
    for (int v : nbrs[u]) {
      if (v != parent[u]) compute_message(u, v);
    }
  }

  const Var u0_var = tape.param(*u0);
  out.nodes.h.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Var> inward;
    for (int k : nbrs[i]) inward.push_back(out.messages.at({k, static_cast<int>(i)}));
    const Var msum = numerics::canonical_sum(tape, std::move(inward), h);
    const Var pre = tape.add(w0(tape, static_cast<std::size_t>(tree.labels[i])), tape.linear(u0_var, Var{}, msum));
    out.nodes.h.push_back(tape.relu(pre));
  }
  const Var hroot = out.nodes.h[out.nodes.root];
  out.posterior = {mu_head(tape, hroot), logvar_head(tape, hroot)};
  return out;
}

JunctionDecoder JunctionDecoder::create(ParameterStore& store, std::size_t vocab_size, std::size_t hidden_dim,
                                        std::size_t latent_dim, Rng& rng) {
  JunctionDecoder d;
  d.label_embed = Embedding::create(store, "jt.dec.embed", vocab_size, hidden_dim, rng);
  d.init = Linear::create(store, "jt.dec.init", latent_dim, hidden_dim, rng);
  d.gru = GruCell::create(store, "jt.dec.gru", latent_dim + hidden_dim + 1, hidden_dim, rng);
  d.topology_head = Linear::create(store, "jt.dec.topology", latent_dim + hidden_dim, 1, rng);
  d.label_head = Linear::create(store, "jt.dec.label", latent_dim + hidden_dim, vocab_size, rng);
  return d;
}

JunctionDecoder JunctionDecoder::bind(ParameterStore& store) {
  JunctionDecoder d;
  d.label_embed = Embedding::bind(store, "jt.dec.embed");
  d.init = Linear::bind(store, "jt.dec.init");
  d.gru = GruCell::bind(store, "jt.dec.gru");
  d.topology_head = Linear::bind(store, "jt.dec.topology");
  d.label_head = Linear::bind(store, "jt.dec.label");
  return d;
}

Var JunctionDecoder::initial_state(Tape& tape, Var z) const { return tape.tanh(init(tape, z)); }

Var JunctionDecoder::move(Tape& tape, Var z, Var state, int label, bool down) const {
  const Var input = numerics::concat(
      {z, label_embed(tape, static_cast<std::size_t>(label)), tape.constant(std::vector<double>{down ? 1.0 : 0.0})});
  return gru(tape, input, state);
}

Var JunctionDecoder::topology_logit(Tape& tape, Var z, Var state) const {
  return topology_head(tape, numerics::concat({z, state}));
}

Var JunctionDecoder::label_logits(Tape& tape, Var z, Var state) const {
  return label_head(tape, numerics::concat({z, state}));
}

Var JunctionDecoder::teacher_forced_loss(Tape& tape, const trees::JunctionTree& tree, Var z) const {
  trees::validate_junction(tree, vocab_size());
  const auto children = tree.children();
  std::vector<Var> terms;
  Var state = initial_state(tape, z);
  terms.push_back(tape.cross_entropy(label_logits(tape, z, state), static_cast<std::size_t>(tree.labels[tree.root])));

  // Explicit stack of (node, index of next child) mirrors the recursive walk.
  std::vector<std::pair<int, std::vector<int>>> stack;
  std::vector<std::size_t> next;
  stack.push_back({tree.root, trees::ordered_children(tree, children, tree.root)});
  next.push_back(0);
  while (!stack.empty()) {
    auto& [node, kids] = stack.back();
    std::size_t& k = next.back();
    if (k < kids.size()) {
      const int child = kids[k++];
      terms.push_back(tape.bce_with_logits(topology_logit(tape, z, state), true));
      state = move(tape, z, state, tree.labels[node], true);
      terms.push_back(tape.cross_entropy(label_logits(tape, z, state), static_cast<std::size_t>(tree.labels[child])));
      stack.push_back({child, trees::ordered_children(tree, children, child)});
      next.push_back(0);
      continue;
    }
    terms.push_back(tape.bce_with_logits(topology_logit(tape, z, state), false));
    const int finished = node;
    stack.pop_back();
    next.pop_back();
    if (!stack.empty()) state = move(tape, z, state, tree.labels[finished], false);
  }
  return tape.sum(terms);
}

trees::JunctionTree JunctionDecoder::decode(Tape& tape, Var z, Rng* rng, JunctionLimits limits,
                                            double temperature) const {
  if (limits.max_nodes < 1) throw std::invalid_argument("JunctionLimits.max_nodes must be >= 1");
  const bool greedy = rng == nullptr || temperature <= 0.0;
  trees::JunctionTree tree;
  tree.root = 0;

  Var state = initial_state(tape, z);
  tree.labels.push_back(static_cast<int>(sample_class(label_logits(tape, z, state).value(), temperature, rng)));

  std::vector<int> stack{0};
  while (!stack.empty()) {
    const int node = stack.back();
    bool expand = false;
    if (tree.size() < limits.max_nodes) {
      const double logit = topology_logit(tape, z, state).item();
      const double p = logit >= 0 ? 1.0 / (1.0 + std::exp(-logit)) : std::exp(logit) / (1.0 + std::exp(logit));
      expand = greedy ? p > 0.5 : rng->bernoulli(p);
    }
    if (expand) {
      state = move(tape, z, state, tree.labels[node], true);
      const int child = static_cast<int>(tree.size());
      tree.labels.push_back(static_cast<int>(sample_class(label_logits(tape, z, state).value(), temperature, rng)));
      tree.edges.emplace_back(node, child);
      stack.push_back(child);
      continue;
    }
    stack.pop_back();
    if (!stack.empty()) state = move(tape, z, state, tree.labels[node], false);
  }
  return tree;
}

}  // namespace rxngen::jt
