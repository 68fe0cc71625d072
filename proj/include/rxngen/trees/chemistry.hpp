// Copyright 2026 The rxngen Authors
// SPDX-License-Identifier: Apache-2.0

// Toy chemistry. A molecule is a canonical string: either a fragment of
// letters, or a term "T<id>(c1,...,cm)" with c1 <= ... <= cm. Template <id>
// fires iff every reactant contains its required token letter.

#pragma once

#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rxngen/trees/trees.hpp"

namespace rxngen::trees {

class ArityMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class MalformedMolecule : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Template {
  int id = 0;
  int arity = 1;
  char token = 'A';

  bool operator==(const Template&) const = default;
};

class TemplateRegistry {
 public:
  TemplateRegistry() = default;
  explicit TemplateRegistry(std::vector<Template> entries);

  const Template& at(int id) const;
  bool contains(int id) const { return id >= 0 && static_cast<std::size_t>(id) < entries_.size(); }
  std::size_t size() const { return entries_.size(); }
  int max_arity() const;
  const std::vector<Template>& entries() const { return entries_; }

  bool operator==(const TemplateRegistry&) const = default;

 private:
  std::vector<Template> entries_;
};

/// Result of applying one template. Precondition failures are values.
struct ApplyOutcome {
  bool ok = false;
  std::string product;
  int failed_reactant = -1;  // index into the reactant list, -1 if not reactant-specific
  std::string reason;

  static ApplyOutcome success(std::string product) { return {true, std::move(product), -1, {}}; }
  static ApplyOutcome precondition_failed(int reactant, std::string reason) {
    return {false, {}, reactant, std::move(reason)};
  }
};

/// Throws ArityMismatch when the reactant count differs from the arity.
ApplyOutcome apply_template_toy(const TemplateRegistry& registry, int template_id,
                                std::span<const std::string> reactants);

/// Anything that can run a reaction template on reactant molecules.
class TemplateBackend {
 public:
  virtual ~TemplateBackend() = default;
  virtual ApplyOutcome apply(int template_id, std::span<const std::string> reactants) const = 0;
};

class ToyBackend final : public TemplateBackend {
 public:
  explicit ToyBackend(const TemplateRegistry& registry) : registry_(&registry) {}
  ApplyOutcome apply(int template_id, std::span<const std::string> reactants) const override {
    return apply_template_toy(*registry_, template_id, reactants);
  }

 private:
  const TemplateRegistry* registry_;
};

bool is_fragment(std::string_view molecule);

/// Parsed term structure of a molecule: head is "T<id>" or the fragment.
struct MoleculeTerm {
  std::string head;
  std::vector<MoleculeTerm> children;
};

MoleculeTerm parse_molecule(std::string_view molecule);
/// Maximum nesting of template terms (a fragment has depth 0).
int nesting_depth(std::string_view molecule);

/// Label strings for substructure vocabularies, preorder.
struct LabeledTree {
  std::vector<std::string> labels;
  std::vector<Edge> edges;
};

LabeledTree decompose_labels(std::string_view molecule);

/// Substructure, starting-molecule and template vocabularies.
class Vocabularies {
 public:
  Vocabularies() = default;
  Vocabularies(std::vector<std::string> substructures, std::vector<std::string> starting_molecules,
               TemplateRegistry templates);

  const std::vector<std::string>& substructures() const { return substructures_; }
  const std::vector<std::string>& starting_molecules() const { return starting_; }
  const TemplateRegistry& templates() const { return templates_; }

  int substructure_index(std::string_view label) const;  // -1 if absent
  int starting_index(std::string_view molecule) const;    // -1 if absent

  bool operator==(const Vocabularies& o) const {
    return substructures_ == o.substructures_ && starting_ == o.starting_ && templates_ == o.templates_;
  }

 private:
  std::vector<std::string> substructures_;
  std::vector<std::string> starting_;
  TemplateRegistry templates_;
  std::unordered_map<std::string, int> substructure_index_;
  std::unordered_map<std::string, int> starting_index_;
};

/// Junction tree of a toy molecule: one node per template term and one per
/// fragment leaf occurrence, shaped like the term. Throws MalformedMolecule,
/// or StructureError if a label is missing from the vocabulary.
JunctionTree decompose_toy(std::string_view molecule, const Vocabularies& vocab);

}  // namespace rxngen::trees
