// Copyright 2026 The rxngen Authors
// SPDX-License-Identifier: Apache-2.0

#include "rxngen/executor/executor.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <json.hpp>
#include <map>

namespace rxngen::executor {

using json = nlohmann::json;
using trees::NodeKind;

namespace {

struct Runner {
  const trees::ReactionTree& tree;
  const trees::Vocabularies& vocab;
  const trees::TemplateBackend& backend;
  std::vector<std::vector<int>> children;
  ExecutionResult result;

  // Product of a molecule node, or nullopt after a failure.
  std::optional<std::string> molecule(int node) {
    const auto& n = tree.nodes[node];
    if (n.label != trees::kExpandLabel) return vocab.starting_molecules()[static_cast<std::size_t>(n.label)];
    const int t = children[node].front();
    std::vector<std::string> reactants;
    for (int r : children[t]) {
      auto m = molecule(r);
      if (!m) return std::nullopt;
      reactants.push_back(std::move(*m));
    }
    const int tid = tree.nodes[t].label;
    trees::ApplyOutcome out = backend.apply(tid, reactants);
    if (!out.ok) {
      result.failed_node = t;
      result.reason = "precondition failed";
      if (out.failed_reactant >= 0) {
        result.reason += " for reactant " + std::to_string(out.failed_reactant) + " (" +
                         reactants[static_cast<std::size_t>(out.failed_reactant)] + ")";
      }
      if (!out.reason.empty()) result.reason += ": " + out.reason;
      return std::nullopt;
    }
    result.trace.push_back({t, tid, reactants, out.product});
    return std::move(out.product);
  }
};

}  // namespace

ExecutionResult execute(const trees::ReactionTree& tree, const trees::Vocabularies& vocab,
                        const trees::TemplateBackend& backend) {
  trees::validate_structure(tree, vocab.templates(), vocab.starting_molecules().size());
  Runner run{tree, vocab, backend, tree.children(), {}};
  auto product = run.molecule(tree.root);
  run.result.valid = product.has_value();
  run.result.product = std::move(product);
  return std::move(run.result);
}

std::vector<ExecutionResult> execute_all_serial(std::span<const trees::ReactionTree> trees,
                                                const trees::Vocabularies& vocab,
                                                const trees::TemplateBackend& backend) {
  std::vector<ExecutionResult> out;
  out.reserve(trees.size());
  for (const auto& t : trees) out.push_back(execute(t, vocab, backend));
  return out;
}

std::vector<ExecutionResult> execute_all(std::span<const trees::ReactionTree> trees, const trees::Vocabularies& vocab,
                                         const trees::TemplateBackend& backend) {
  std::vector<ExecutionResult> out(trees.size());
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < trees.size(); ++i) {
    try {
      out[i] = execute(trees[i], vocab, backend);
    } catch (...) {
#pragma omp critical
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return out;
}

std::string result_to_json(const ExecutionResult& r) {
  json trace = json::array();
  for (const auto& s : r.trace) {
    trace.push_back({{"node_id", s.node_id}, {"template_id", s.template_id}, {"reactants", s.reactants},
                     {"product", s.product}});
  }
  json j = {{"status", r.valid ? "valid" : "invalid"},
            {"product", r.product ? json(*r.product) : json(nullptr)},
            {"trace", trace}};
  if (!r.valid) j["invalid_at"] = {{"node_id", r.failed_node}, {"reason", r.reason}};
  return j.dump();
}

bool default_quality(const std::string& product) {
  if (product.size() > 120) return false;
  int depth = 0, deepest = 0;
  for (char c : product) {
    if (c == '(') deepest = std::max(deepest, ++depth);
    if (c == ')') --depth;
  }
  return deepest <= 6;
}

namespace {

constexpr std::size_t kLengthBinWidth = 4;
constexpr std::size_t kLengthBins = 32;  // up to 128 characters, then overflow
constexpr std::size_t kDepthBins = 8;

void normalize(std::vector<double>& h) {
  double total = 0;
  for (double v : h) total += v;
  if (total > 0)
    for (double& v : h) v /= total;
}

double l1(const std::vector<double>& a, const std::vector<double>& b, bool a_empty, bool b_empty) {
  if (a_empty || b_empty) return 2.0;
  double d = 0;
  const std::size_t n = std::max(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    const double x = i < a.size() ? a[i] : 0.0;
    const double y = i < b.size() ? b[i] : 0.0;
    d += std::abs(x - y);
  }
  return d;
}

bool all_zero(const std::vector<double>& h) {
  return std::all_of(h.begin(), h.end(), [](double v) { return v == 0.0; });
}

}  // namespace

Descriptors describe(std::span<const trees::ReactionTree> trees, std::span<const std::string> products,
                     std::size_t n_templates) {
  Descriptors d;
  d.product_length.assign(kLengthBins + 1, 0.0);
  d.depth.assign(kDepthBins + 1, 0.0);
  d.template_usage.assign(n_templates, 0.0);
  for (const auto& p : products) d.product_length[std::min(p.size() / kLengthBinWidth, kLengthBins)] += 1;
  for (const auto& t : trees) {
    d.depth[std::min<std::size_t>(static_cast<std::size_t>(t.depth()), kDepthBins)] += 1;
    for (const auto& n : t.nodes) {
      if (n.kind == NodeKind::kTemplate && n.label >= 0 && static_cast<std::size_t>(n.label) < n_templates) {
        d.template_usage[static_cast<std::size_t>(n.label)] += 1;
      }
    }
  }
  d.n_products = products.size();
  d.n_trees = trees.size();
  normalize(d.product_length);
  normalize(d.depth);
  normalize(d.template_usage);
  return d;
}

double descriptor_distance(const Descriptors& a, const Descriptors& b) {
  return l1(a.product_length, b.product_length, a.n_products == 0, b.n_products == 0) +
         l1(a.depth, b.depth, a.n_trees == 0, b.n_trees == 0) +
         l1(a.template_usage, b.template_usage, all_zero(a.template_usage), all_zero(b.template_usage));
}

std::string MetricsReport::to_json() const {
  const json j = {{"count", count},
                  {"valid_count", valid},
                  {"unique_count", unique},
                  {"novel_count", novel},
                  {"quality_count", quality_pass},
                  {"validity", validity},
                  {"uniqueness", uniqueness},
                  {"novelty", novelty},
                  {"quality", quality},
                  {"descriptor_distance", descriptor_distance},
                  {"empty", empty},
                  {"no_valid", no_valid}};
  return j.dump(1) + "\n";
}

MetricsReport compute_metrics(std::span<const trees::ReactionTree> generated,
                              std::span<const ExecutionResult> results, const trees::Dataset& training,
                              const QualityHook& quality) {
  if (generated.size() != results.size()) throw std::invalid_argument("one execution result per tree expected");
  std::set<std::string> training_products;
  std::vector<trees::ReactionTree> training_trees;
  std::vector<std::string> training_list;
  for (const auto& p : training.trees) {
    training_trees.push_back(p.reaction);
    if (p.product) {
      training_products.insert(*p.product);
      training_list.push_back(*p.product);
    }
  }

  MetricsReport m;
  m.count = generated.size();
  m.empty = m.count == 0;
  std::set<std::string> distinct;
  std::vector<std::string> products;
  for (const auto& r : results) {
    if (!r.valid) continue;
    ++m.valid;
    const std::string& p = *r.product;
    products.push_back(p);
    distinct.insert(p);
    m.novel += training_products.count(p) == 0;
    m.quality_pass += quality(p) ? 1 : 0;
  }
  m.unique = distinct.size();
  m.no_valid = m.valid == 0;
  if (!m.empty) m.validity = 100.0 * static_cast<double>(m.valid) / static_cast<double>(m.count);
  if (!m.no_valid) {
    const double v = static_cast<double>(m.valid);
    m.uniqueness = 100.0 * static_cast<double>(m.unique) / v;
    m.novelty = 100.0 * static_cast<double>(m.novel) / v;
    m.quality = 100.0 * static_cast<double>(m.quality_pass) / v;
  }
  const std::size_t n_templates = training.vocab.templates().size();
  m.descriptor_distance = descriptor_distance(describe(generated, products, n_templates),
                                              describe(training_trees, training_list, n_templates));
  return m;
}

MetricsReport compute_metrics(std::span<const trees::ReactionTree> generated, const trees::Dataset& training,
                              const trees::TemplateBackend& backend, const QualityHook& quality) {
  const auto results = execute_all(generated, training.vocab, backend);
  return compute_metrics(generated, results, training, quality);
}

std::string SynthReport::to_json() const {
  const json j = {{"n_codes", n_codes},
                  {"k_decodes", k_decodes},
                  {"codes_with_valid", codes_with_valid},
                  {"rate", rate},
                  {"single_sample_validity", single_sample_validity}};
  return j.dump(1) + "\n";
}

SynthReport synthesizability_eval(const vae::Model& model, std::size_t n_codes, std::size_t k_decodes,
                                  const trees::TemplateBackend& backend, std::uint64_t seed, double temperature) {
  if (k_decodes == 0) throw std::invalid_argument("k_decodes must be positive");
  SynthReport report;
  report.n_codes = n_codes;
  report.k_decodes = k_decodes;
  report.modal_products.assign(n_codes, std::nullopt);
  std::vector<std::size_t> valid_decodes(n_codes, 0);
  std::vector<char> modal_ok(n_codes, 0);
  std::exception_ptr error;
  const std::size_t d = model.config().latent_dim;

#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < n_codes; ++i) {
    try {
      numerics::Rng rng(numerics::Rng::derive(seed, i));
      std::vector<double> z_x(d), z_y(d);
      for (double& v : z_x) v = rng.normal();
      for (double& v : z_y) v = rng.normal();
      std::map<std::string, std::size_t> counts;
      std::map<std::string, trees::ReactionTree> witness;
      for (std::size_t k = 0; k < k_decodes; ++k) {
        const auto pair = vae::decode_latent(model, z_x, z_y, temperature > 0 ? &rng : nullptr, temperature);
        const auto r = execute(pair.reaction, model.vocab(), backend);
        if (!r.valid) continue;
        ++valid_decodes[i];
        ++counts[*r.product];
        witness.emplace(*r.product, pair.reaction);
      }
      if (counts.empty()) continue;
      // std::map iterates in lexicographic order, so the first maximum wins ties.
      auto best = counts.begin();
      for (auto it = counts.begin(); it != counts.end(); ++it)
        if (it->second > best->second) best = it;
      report.modal_products[i] = best->first;
      const auto again = execute(witness.at(best->first), model.vocab(), backend);
      modal_ok[i] = again.valid && again.product == best->first;
    } catch (...) {
#pragma omp critical
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);

  std::size_t total_valid = 0;
  for (std::size_t i = 0; i < n_codes; ++i) {
    total_valid += valid_decodes[i];
    report.codes_with_valid += modal_ok[i] ? 1 : 0;
  }
  if (n_codes > 0) {
    report.rate = 100.0 * static_cast<double>(report.codes_with_valid) / static_cast<double>(n_codes);
    report.single_sample_validity =
        100.0 * static_cast<double>(total_valid) / static_cast<double>(n_codes * k_decodes);
  }
  return report;
}

}  // namespace rxngen::executor
