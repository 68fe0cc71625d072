// Copyright 2026 The rxngen Authors
// SPDX-License-Identifier: Apache-2.0

#include "rxngen/trees/chemistry.hpp"

#include <algorithm>
#include <cctype>

namespace rxngen::trees {

TemplateRegistry::TemplateRegistry(std::vector<Template> entries) : entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& t = entries_[i];
    if (t.id != static_cast<int>(i)) throw std::invalid_argument("template ids must be dense 0..T-1");
    if (t.arity < 1) throw std::invalid_argument("template " + std::to_string(t.id) + " has arity < 1");
    if (!std::isupper(static_cast<unsigned char>(t.token))) {
      throw std::invalid_argument("template " + std::to_string(t.id) + " token must be an uppercase letter");
    }
  }
}

const Template& TemplateRegistry::at(int id) const {
  if (!contains(id)) throw std::out_of_range("unknown template id " + std::to_string(id));
  return entries_[static_cast<std::size_t>(id)];
}

int TemplateRegistry::max_arity() const {
  int m = 0;
  for (const auto& t : entries_) m = std::max(m, t.arity);
  return m;
}

ApplyOutcome apply_template_toy(const TemplateRegistry& registry, int template_id,
                                std::span<const std::string> reactants) {
  const Template& t = registry.at(template_id);
  if (static_cast<int>(reactants.size()) != t.arity) {
    throw ArityMismatch("template " + std::to_string(template_id) + " expects " + std::to_string(t.arity) +
                        " reactants, got " + std::to_string(reactants.size()));
  }
  for (std::size_t i = 0; i < reactants.size(); ++i) {
    if (reactants[i].find(t.token) == std::string::npos) {
      return ApplyOutcome::precondition_failed(static_cast<int>(i),
                                               "reactant " + std::to_string(i) + " lacks token '" +
                                                   std::string(1, t.token) + "'");
    }
  }
  std::vector<std::string> sorted(reactants.begin(), reactants.end());
  std::sort(sorted.begin(), sorted.end());
  std::string product = "T" + std::to_string(template_id) + "(";
  for (std::size_t i = 0; i < sorted.size(); ++i) product += (i ? "," : "") + sorted[i];
  return ApplyOutcome::success(product + ")");
}

bool is_fragment(std::string_view molecule) {
  if (molecule.empty() || molecule.size() > 12) return false;
  return std::all_of(molecule.begin(), molecule.end(), [](char c) { return c >= 'A' && c <= 'Z'; });
}

namespace {

class TermParser {
 public:
  explicit TermParser(std::string_view s) : s_(s) {}

  MoleculeTerm parse() {
    MoleculeTerm t = term();
    if (pos_ != s_.size()) fail("trailing characters");
    return t;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw MalformedMolecule("malformed molecule '" + std::string(s_) + "' at offset " + std::to_string(pos_) + ": " +
                            what);
  }

  bool at_term_head() const {
    return pos_ + 1 < s_.size() && s_[pos_] == 'T' && std::isdigit(static_cast<unsigned char>(s_[pos_ + 1]));
  }

  MoleculeTerm term() {
    MoleculeTerm t;
    if (at_term_head()) {
      std::size_t end = pos_ + 1;
      while (end < s_.size() && std::isdigit(static_cast<unsigned char>(s_[end]))) ++end;
      t.head = std::string(s_.substr(pos_, end - pos_));
      pos_ = end;
      if (pos_ >= s_.size() || s_[pos_] != '(') fail("expected '('");
      ++pos_;
      std::size_t child_start = pos_;
      t.children.push_back(term());
      std::string_view prev = s_.substr(child_start, pos_ - child_start);
      while (pos_ < s_.size() && s_[pos_] == ',') {
        child_start = ++pos_;
        t.children.push_back(term());
        const std::string_view cur = s_.substr(child_start, pos_ - child_start);
        if (cur < prev) fail("reactants are not in sorted order");
        prev = cur;
      }
      if (pos_ >= s_.size() || s_[pos_] != ')') fail("expected ')'");
      ++pos_;
      return t;
    }
    const std::size_t start = pos_;
    while (pos_ < s_.size() && s_[pos_] >= 'A' && s_[pos_] <= 'Z') ++pos_;
    t.head = std::string(s_.substr(start, pos_ - start));
    if (!is_fragment(t.head)) fail("expected a fragment of 1-12 letters");
    return t;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

int term_depth(const MoleculeTerm& t) {
  int d = 0;
  for (const auto& c : t.children) d = std::max(d, term_depth(c));
  return t.children.empty() ? 0 : d + 1;
}

void flatten(const MoleculeTerm& t, int parent, LabeledTree& out) {
  const int id = static_cast<int>(out.labels.size());
  out.labels.push_back(t.head);
  if (parent >= 0) out.edges.emplace_back(parent, id);
  for (const auto& c : t.children) flatten(c, id, out);
}

}  // namespace

MoleculeTerm parse_molecule(std::string_view molecule) { return TermParser(molecule).parse(); }

int nesting_depth(std::string_view molecule) { return term_depth(parse_molecule(molecule)); }

LabeledTree decompose_labels(std::string_view molecule) {
  LabeledTree out;
  flatten(parse_molecule(molecule), -1, out);
  return out;
}

Vocabularies::Vocabularies(std::vector<std::string> substructures, std::vector<std::string> starting_molecules,
                           TemplateRegistry templates)
    : substructures_(std::move(substructures)), starting_(std::move(starting_molecules)), templates_(std::move(templates)) {
  for (std::size_t i = 0; i < substructures_.size(); ++i) {
    if (!substructure_index_.emplace(substructures_[i], static_cast<int>(i)).second) {
      throw std::invalid_argument("duplicate substructure label: " + substructures_[i]);
    }
  }
  for (std::size_t i = 0; i < starting_.size(); ++i) {
    if (!starting_index_.emplace(starting_[i], static_cast<int>(i)).second) {
      throw std::invalid_argument("duplicate starting molecule: " + starting_[i]);
    }
  }
}

int Vocabularies::substructure_index(std::string_view label) const {
  auto it = substructure_index_.find(std::string(label));
  return it == substructure_index_.end() ? -1 : it->second;
}

int Vocabularies::starting_index(std::string_view molecule) const {
  auto it = starting_index_.find(std::string(molecule));
  return it == starting_index_.end() ? -1 : it->second;
}

JunctionTree decompose_toy(std::string_view molecule, const Vocabularies& vocab) {
  const LabeledTree labeled = decompose_labels(molecule);
  JunctionTree tree;
  tree.edges = labeled.edges;
  tree.root = 0;
  for (const auto& label : labeled.labels) {
    const int idx = vocab.substructure_index(label);
    if (idx < 0) throw StructureError("substructure '" + label + "' is not in the vocabulary");
    tree.labels.push_back(idx);
  }
  return tree;
}

}  // namespace rxngen::trees
