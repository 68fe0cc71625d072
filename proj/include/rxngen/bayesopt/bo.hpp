// Copyright 2026 The rxngen Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rxngen/bayesopt/gp.hpp"
#include "rxngen/trees/dataset.hpp"
#include "rxngen/vae/model.hpp"

namespace rxngen::bayesopt {

/// Returns nullopt for products it cannot score; those are excluded from
/// the GP data.
using Scorer = std::function<std::optional<double>(const std::string& product)>;

/// Count of 'Q' in the product minus 0.1 times its length.
double toy_score(const std::string& product);
Scorer toy_scorer();

struct BOConfig {
  std::size_t iterations = 5;
  std::size_t batch_per_iter = 50;
  std::size_t candidate_pool_size = 2000;
  std::size_t subset_size = 1500;  // GP data cap
  std::size_t top_codes = 20;      // perturbation centres
  double perturb_sigma = 0.3;
  double decode_temperature = 0.0;  // greedy
  std::uint64_t seed = 1;
  GPFitOptions fit;
};

/// One decoded and executed latent code. z is z_y followed by z_x.
struct Proposal {
  std::size_t iteration = 0;
  std::vector<double> z;
  trees::TreePair pair;
  bool valid = false;
  std::optional<std::string> product;
  std::optional<double> score;
};

struct BOResult {
  std::vector<Proposal> proposals;
  std::vector<std::size_t> valid_per_iteration;
};

/// Embeds the training pairs at their posterior means, then for each
/// iteration fits a GP to (code, score), scores a candidate pool by EI and
/// decodes, executes and scores the best batch_per_iter candidates.
BOResult bo_loop(const vae::Model& model, const Scorer& scorer, const trees::Dataset& dataset,
                 const trees::TemplateBackend& backend, const BOConfig& config);

/// n prior codes decoded and scored the same way as BO proposals.
std::vector<Proposal> random_search(const vae::Model& model, const Scorer& scorer,
                                    const trees::TemplateBackend& backend, std::size_t n, std::uint64_t seed,
                                    double decode_temperature = 0.0);

/// One JSON object per line: {iter, z (base64 little-endian float32),
/// product, score, valid}.
std::string proposals_to_jsonl(const std::vector<Proposal>& proposals);

/// Mean of the k highest scores among valid proposals (fewer if not enough).
double top_k_mean(const std::vector<Proposal>& proposals, std::size_t k);

/// Rows "bin_lo,bin_hi,random,bo" over a shared set of equal-width bins.
std::string score_histogram_csv(const std::vector<Proposal>& random, const std::vector<Proposal>& bo,
                                std::size_t bins = 20);

std::string base64_f32(const std::vector<double>& values);

}  // namespace rxngen::bayesopt
