// Copyright 2026 The rxngen Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rxngen::trees {

class TemplateRegistry;

/// Structural violation of a tree invariant (as opposed to a chemical
/// precondition failure, which is a result value).
class StructureError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using Edge = std::pair<int, int>;  // parent -> child

/// Substructure tree of a product molecule. Node ids are dense 0..n-1 and
/// label nodes by substructure-vocabulary index.
struct JunctionTree {
  std::vector<int> labels;
  std::vector<Edge> edges;
  int root = 0;

  std::size_t size() const { return labels.size(); }
  std::vector<std::vector<int>> children() const;
  std::vector<std::vector<int>> neighbors() const;

  bool operator==(const JunctionTree&) const = default;
};

void validate_junction(const JunctionTree& tree, std::size_t vocab_size);

/// Order-insensitive rendering: label followed by the sorted renderings of
/// its children. Two trees are isomorphic iff their strings are equal.
std::string canonical_string(const JunctionTree& tree);

/// Children of `node` in teacher-forcing order: ascending label index, ties
/// broken by subtree canonical string.
std::vector<int> ordered_children(const JunctionTree& tree, const std::vector<std::vector<int>>& children, int node);

enum class NodeKind { kMolecule, kTemplate };

inline constexpr int kExpandLabel = -1;

struct ReactionNode {
  NodeKind kind = NodeKind::kMolecule;
  int label = kExpandLabel;

  bool operator==(const ReactionNode&) const = default;
};

/// Alternating molecule/template tree. Reactant order is edge order.
struct ReactionTree {
  std::vector<ReactionNode> nodes;
  std::vector<Edge> edges;
  int root = 0;

  std::size_t size() const { return nodes.size(); }
  std::vector<std::vector<int>> children() const;
  std::vector<int> parents() const;
  /// Number of template nodes on the longest root-to-leaf path.
  int depth() const;
  int template_count() const;

  bool operator==(const ReactionTree&) const = default;
};

/// The reference checker for every ReactionTree invariant: single root
/// molecule labelled -1, strict alternation, template child count equal to
/// its arity, leaves are starting molecules, internal molecules are -1 with
/// exactly one template child. Returns the first violation, if any.
std::optional<std::string> structure_violation(const ReactionTree& tree, const TemplateRegistry& registry,
                                               std::size_t starting_vocab_size);
/// Throws StructureError with the message of structure_violation().
void validate_structure(const ReactionTree& tree, const TemplateRegistry& registry,
                        std::size_t starting_vocab_size);

/// Order-insensitive rendering ("m-1(t3(m5,m7))") used for exact-match tests.
std::string canonical_string(const ReactionTree& tree);

}  // namespace rxngen::trees
