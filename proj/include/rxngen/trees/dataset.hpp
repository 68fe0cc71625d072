// Copyright 2026 The rxngen Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rxngen/trees/chemistry.hpp"
#include "rxngen/trees/trees.hpp"

namespace rxngen::trees {

inline constexpr int kDatasetFormatVersion = 1;

/// A junction tree / reaction tree pair and the product the reaction tree
/// synthesizes. Generated (not training) pairs may have no product.
struct TreePair {
  JunctionTree junction;
  ReactionTree reaction;
  std::optional<std::string> product;

  bool operator==(const TreePair&) const = default;
};

struct Dataset {
  Vocabularies vocab;
  std::vector<TreePair> trees;

  bool operator==(const Dataset&) const = default;
};

class InfeasibleConfig : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GeneratorConfig {
  std::uint64_t seed = 1;
  std::size_t n_trees = 2000;
  std::size_t n_templates = 24;
  std::size_t n_start_molecules = 120;
  int max_depth = 3;
  /// Templates and starting molecules used fewer times than this across the
  /// candidate pool are filtered out; 0 disables the floor.
  std::size_t min_occurrence = 5;
  double expand_probability = 0.35;
};

/// Deterministic synthetic corpus. Every reaction tree executes under the toy
/// backend to its stored product, and each template token appears in at
/// least 10% of the starting molecules.
Dataset generate_toy_dataset(const GeneratorConfig& config);

class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string dataset_to_json(const Dataset& dataset);
/// Parses and schema-checks a dataset. When require_products is set every
/// tree must carry a product string (training data); otherwise products may
/// be null (generated trees). Throws DatasetError naming the offending field.
Dataset dataset_from_json(const std::string& text, bool require_products = true);

void save_dataset(const Dataset& dataset, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path, bool require_products = true);

}  // namespace rxngen::trees
