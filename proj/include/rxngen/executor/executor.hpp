// Copyright 2026 The rxngen Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rxngen/trees/dataset.hpp"
#include "rxngen/vae/model.hpp"

namespace rxngen::executor {

struct ExecStep {
  int node_id = -1;
  int template_id = -1;
  std::vector<std::string> reactants;
  std::string product;
};

/// Valid iff every template application succeeded; product is set iff valid.
struct ExecutionResult {
  bool valid = false;
  int failed_node = -1;  // template node of the first failure
  std::string reason;
  std::optional<std::string> product;
  std::vector<ExecStep> trace;  // successful steps in execution order
};

/// Post-order execution. Leaves resolve through the starting-molecule
/// vocabulary; the first failed template stops execution. Throws
/// trees::StructureError for structurally invalid trees.
ExecutionResult execute(const trees::ReactionTree& tree, const trees::Vocabularies& vocab,
                        const trees::TemplateBackend& backend);

std::vector<ExecutionResult> execute_all(std::span<const trees::ReactionTree> trees, const trees::Vocabularies& vocab,
                                         const trees::TemplateBackend& backend);
std::vector<ExecutionResult> execute_all_serial(std::span<const trees::ReactionTree> trees,
                                                const trees::Vocabularies& vocab,
                                                const trees::TemplateBackend& backend);

std::string result_to_json(const ExecutionResult& result);

using QualityHook = std::function<bool(const std::string& product)>;

/// Product length <= 120 and parenthesis nesting <= 6.
bool default_quality(const std::string& product);

/// Normalized histograms used by descriptor_distance.
struct Descriptors {
  std::vector<double> product_length;  // 4-character bins, last bin open-ended
  std::vector<double> depth;           // templates on the longest path, last bin open-ended
  std::vector<double> template_usage;  // share of template nodes per template id
  std::size_t n_products = 0;
  std::size_t n_trees = 0;
};

/// Lengths come from `products` (valid executions only); depth and template
/// usage from all trees.
Descriptors describe(std::span<const trees::ReactionTree> trees, std::span<const std::string> products,
                     std::size_t n_templates);
/// Sum of the three L1 distances. An empty histogram is at distance 2
/// (the maximum) from anything.
double descriptor_distance(const Descriptors& a, const Descriptors& b);

struct MetricsReport {
  std::size_t count = 0;
  std::size_t valid = 0;
  std::size_t unique = 0;
  std::size_t novel = 0;
  std::size_t quality_pass = 0;
  double validity = 0;     // percent of all trees
  double uniqueness = 0;   // percent of valid trees
  double novelty = 0;      // percent of valid trees
  double quality = 0;      // percent of valid trees
  double descriptor_distance = 0;
  bool empty = true;        // no trees at all
  bool no_valid = true;     // conditioned metrics are reported as 0

  std::string to_json() const;
};

/// The training products and descriptors come from `training`.
MetricsReport compute_metrics(std::span<const trees::ReactionTree> generated, const trees::Dataset& training,
                              const trees::TemplateBackend& backend, const QualityHook& quality = default_quality);
MetricsReport compute_metrics(std::span<const trees::ReactionTree> generated,
                              std::span<const ExecutionResult> results, const trees::Dataset& training,
                              const QualityHook& quality = default_quality);

struct SynthReport {
  std::size_t n_codes = 0;
  std::size_t k_decodes = 0;
  std::size_t codes_with_valid = 0;
  double rate = 0;                     // percent of codes whose modal product re-executes valid
  double single_sample_validity = 0;   // percent of all n * k decodes that were valid
  std::vector<std::optional<std::string>> modal_products;

  std::string to_json() const;
};

/// Modal valid product among k decodes of each prior code; ties go to the
/// lexicographically smallest product.
SynthReport synthesizability_eval(const vae::Model& model, std::size_t n_codes, std::size_t k_decodes,
                                  const trees::TemplateBackend& backend, std::uint64_t seed,
                                  double temperature = 1.0);

}  // namespace rxngen::executor
