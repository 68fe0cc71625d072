// Copyright 2026 The rxngen Authors
// SPDX-License-Identifier: Apache-2.0

#include "rxngen/trees/trees.hpp"

#include <algorithm>
#include <functional>

#include "rxngen/trees/chemistry.hpp"

namespace rxngen::trees {

namespace {

std::vector<std::vector<int>> child_lists(std::size_t n, const std::vector<Edge>& edges) {
  std::vector<std::vector<int>> out(n);
  for (const auto& [p, c] : edges) out.at(static_cast<std::size_t>(p)).push_back(c);
  return out;
}

// Checks that edges form a tree rooted at `root` over nodes 0..n-1.
std::optional<std::string> tree_shape_violation(std::size_t n, const std::vector<Edge>& edges, int root) {
  if (n == 0) return "tree has no nodes";
  if (root < 0 || static_cast<std::size_t>(root) >= n) return "root id " + std::to_string(root) + " out of range";
  if (edges.size() != n - 1) {
    return "tree with " + std::to_string(n) + " nodes has " + std::to_string(edges.size()) + " edges";
  }
  std::vector<int> parent(n, -1);
  for (const auto& [p, c] : edges) {
    if (p < 0 || c < 0 || static_cast<std::size_t>(p) >= n || static_cast<std::size_t>(c) >= n) {
      return "edge [" + std::to_string(p) + "," + std::to_string(c) + "] references a missing node";
    }
    if (c == root) return "root node " + std::to_string(root) + " has a parent";
    if (parent[c] != -1) return "node " + std::to_string(c) + " has more than one parent";
    parent[c] = p;
  }
  // n-1 edges, single parents, root has none: connected iff every node reaches the root.
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t steps = 0;
    int cur = static_cast<int>(i);
    while (cur != root) {
      cur = parent[cur];
      if (cur < 0 || ++steps > n) return "node " + std::to_string(i) + " is not connected to the root";
    }
  }
  return std::nullopt;
}

}  // namespace

std::vector<std::vector<int>> JunctionTree::children() const { return child_lists(size(), edges); }

std::vector<std::vector<int>> JunctionTree::neighbors() const {
  std::vector<std::vector<int>> out(size());
  for (const auto& [p, c] : edges) {
    out.at(p).push_back(c);
    out.at(c).push_back(p);
  }
  return out;
}

void validate_junction(const JunctionTree& tree, std::size_t vocab_size) {
  if (auto v = tree_shape_violation(tree.size(), tree.edges, tree.root)) throw StructureError("junction tree: " + *v);
  for (std::size_t i = 0; i < tree.size(); ++i) {
    if (tree.labels[i] < 0 || static_cast<std::size_t>(tree.labels[i]) >= vocab_size) {
      throw StructureError("junction tree: node " + std::to_string(i) + " label " + std::to_string(tree.labels[i]) +
                           " outside substructure vocabulary of size " + std::to_string(vocab_size));
    }
  }
}

namespace {
std::string jt_canonical(const JunctionTree& tree, const std::vector<std::vector<int>>& children, int node) {
  std::string out = std::to_string(tree.labels[node]);
  if (children[node].empty()) return out;
  std::vector<std::string> parts;
  for (int c : children[node]) parts.push_back(jt_canonical(tree, children, c));
  std::sort(parts.begin(), parts.end());
  out += "(";
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? "," : "") + parts[i];
  return out + ")";
}
}  // namespace

std::string canonical_string(const JunctionTree& tree) {
  if (tree.size() == 0) return "";
  const auto children = tree.children();
  return jt_canonical(tree, children, tree.root);
}

std::vector<int> ordered_children(const JunctionTree& tree, const std::vector<std::vector<int>>& children, int node) {
  std::vector<std::pair<std::pair<int, std::string>, int>> keyed;
  for (int c : children[node]) keyed.push_back({{tree.labels[c], jt_canonical(tree, children, c)}, c});
  std::stable_sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<int> out;
  for (const auto& k : keyed) out.push_back(k.second);
  return out;
}

std::vector<std::vector<int>> ReactionTree::children() const { return child_lists(size(), edges); }

std::vector<int> ReactionTree::parents() const {
  std::vector<int> out(size(), -1);
  for (const auto& [p, c] : edges) out.at(c) = p;
  return out;
}

int ReactionTree::depth() const {
  if (nodes.empty()) return 0;
  const auto ch = children();
  std::function<int(int)> rec = [&](int n) {
    int best = 0;
    for (int c : ch[n]) best = std::max(best, rec(c));
    return best + (nodes[n].kind == NodeKind::kTemplate ? 1 : 0);
  };
  return rec(root);
}

int ReactionTree::template_count() const {
  return static_cast<int>(
      std::count_if(nodes.begin(), nodes.end(), [](const ReactionNode& n) { return n.kind == NodeKind::kTemplate; }));
}

std::optional<std::string> structure_violation(const ReactionTree& tree, const TemplateRegistry& registry,
                                               std::size_t starting_vocab_size) {
  if (auto v = tree_shape_violation(tree.size(), tree.edges, tree.root)) return v;
  const auto& root = tree.nodes[tree.root];
  if (root.kind != NodeKind::kMolecule || root.label != kExpandLabel) {
    return "root node " + std::to_string(tree.root) + " must be a molecule labelled -1";
  }
  const auto children = tree.children();
  for (std::size_t i = 0; i < tree.size(); ++i) {
    const auto& node = tree.nodes[i];
    const auto& ch = children[i];
    const std::string where = "node " + std::to_string(i);
    if (node.kind == NodeKind::kTemplate) {
      if (!registry.contains(node.label)) {
        return where + ": template label " + std::to_string(node.label) + " not in registry";
      }
      const int arity = registry.at(node.label).arity;
      if (static_cast<int>(ch.size()) != arity) {
        return where + ": template " + std::to_string(node.label) + " has " + std::to_string(ch.size()) +
               " children, arity is " + std::to_string(arity);
      }
      for (int c : ch) {
        if (tree.nodes[c].kind != NodeKind::kMolecule) return where + ": template child " + std::to_string(c) + " is not a molecule";
      }
      if (static_cast<int>(i) == tree.root) return where + ": root is a template";
    } else if (ch.empty()) {
      if (node.label < 0 || static_cast<std::size_t>(node.label) >= starting_vocab_size) {
        return where + ": leaf molecule label " + std::to_string(node.label) +
               " is not a starting-molecule index (vocabulary size " + std::to_string(starting_vocab_size) + ")";
      }
    } else {
      if (ch.size() != 1) return where + ": molecule has " + std::to_string(ch.size()) + " children, expected one template";
      if (tree.nodes[ch[0]].kind != NodeKind::kTemplate) return where + ": molecule child is not a template";
      if (node.label != kExpandLabel) return where + ": intermediate molecule must be labelled -1";
    }
  }
  return std::nullopt;
}

void validate_structure(const ReactionTree& tree, const TemplateRegistry& registry, std::size_t starting_vocab_size) {
  if (auto v = structure_violation(tree, registry, starting_vocab_size)) throw StructureError("reaction tree: " + *v);
}

namespace {
std::string rxn_canonical(const ReactionTree& tree, const std::vector<std::vector<int>>& children, int node) {
  const auto& n = tree.nodes[node];
  std::string out = (n.kind == NodeKind::kTemplate ? "t" : "m") + std::to_string(n.label);
  if (children[node].empty()) return out;
  std::vector<std::string> parts;
  for (int c : children[node]) parts.push_back(rxn_canonical(tree, children, c));
  std::sort(parts.begin(), parts.end());
  out += "(";
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? "," : "") + parts[i];
  return out + ")";
}
}  // namespace

std::string canonical_string(const ReactionTree& tree) {
  if (tree.size() == 0) return "";
  const auto children = tree.children();
  return rxn_canonical(tree, children, tree.root);
}

}  // namespace rxngen::trees
