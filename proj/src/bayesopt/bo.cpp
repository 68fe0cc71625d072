// Copyright 2026 The rxngen Authors
// SPDX-License-Identifier: Apache-2.0

#include "rxngen/bayesopt/bo.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <exception>
#include <json.hpp>
#include <limits>
#include <numeric>
#include <sstream>

#include "rxngen/executor/executor.hpp"

namespace rxngen::bayesopt {

using json = nlohmann::json;

double toy_score(const std::string& product) {
  return static_cast<double>(std::count(product.begin(), product.end(), 'Q')) -
         0.1 * static_cast<double>(product.size());
}

Scorer toy_scorer() {
  return [](const std::string& p) -> std::optional<double> { return toy_score(p); };
}

namespace {

void decode_and_score(const vae::Model& model, const Scorer& scorer, const trees::TemplateBackend& backend,
                      std::vector<Proposal>& batch, std::uint64_t seed, double temperature) {
  const std::size_t d = model.config().latent_dim;
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < batch.size(); ++i) {
    try {
      Proposal& p = batch[i];
      const std::span<const double> z(p.z);
      numerics::Rng rng(numerics::Rng::derive(seed, i));
      p.pair = vae::decode_latent(model, z.subspan(d, d), z.first(d), temperature > 0 ? &rng : nullptr, temperature);
      const auto r = executor::execute(p.pair.reaction, model.vocab(), backend);
      p.valid = r.valid;
      p.product = r.product;
      p.pair.product = r.product;
      if (r.valid) p.score = scorer(*r.product);
    } catch (...) {
#pragma omp critical
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

struct Observation {
  std::vector<double> z;
  double score;
};

// The highest-scoring half of the budget plus the most recent points.
std::vector<std::size_t> gp_subset(const std::vector<Observation>& data, std::size_t cap) {
  std::vector<std::size_t> all(data.size());
  std::iota(all.begin(), all.end(), 0);
  if (data.size() <= cap) return all;
  std::vector<std::size_t> by_score = all;
  std::stable_sort(by_score.begin(), by_score.end(),
                   [&](std::size_t a, std::size_t b) { return data[a].score > data[b].score; });
  std::vector<char> taken(data.size(), 0);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < cap / 2; ++i) {
    out.push_back(by_score[i]);
    taken[by_score[i]] = 1;
  }
  for (std::size_t i = data.size(); i-- > 0 && out.size() < cap;) {
    if (!taken[i]) out.push_back(i);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

BOResult bo_loop(const vae::Model& model, const Scorer& scorer, const trees::Dataset& dataset,
                 const trees::TemplateBackend& backend, const BOConfig& cfg) {
  if (cfg.iterations == 0 || cfg.batch_per_iter == 0 || cfg.candidate_pool_size < cfg.batch_per_iter ||
      cfg.subset_size < 2 || cfg.top_codes == 0) {
    throw std::invalid_argument("invalid BO configuration");
  }
  const std::size_t d = model.config().latent_dim;
  std::vector<Observation> data;
  for (const auto& pair : dataset.trees) {
    if (!pair.product) continue;
    const auto s = scorer(*pair.product);
    if (!s) continue;
    const auto e = vae::embed(model, pair);
    std::vector<double> z = e.mu_y;
    z.insert(z.end(), e.mu_x.begin(), e.mu_x.end());
    data.push_back({std::move(z), *s});
  }
  if (data.size() < 2) throw std::invalid_argument("BO needs at least two scored training products");

  BOResult result;
  numerics::Rng rng(numerics::Rng::derive(cfg.seed, 0xb0));
  for (std::size_t iter = 1; iter <= cfg.iterations; ++iter) {
    const auto subset = gp_subset(data, cfg.subset_size);
    Eigen::MatrixXd Z(static_cast<Eigen::Index>(subset.size()), static_cast<Eigen::Index>(2 * d));
    Eigen::VectorXd y(static_cast<Eigen::Index>(subset.size()));
    for (std::size_t i = 0; i < subset.size(); ++i) {
      Z.row(static_cast<Eigen::Index>(i)) = Eigen::Map<const Eigen::VectorXd>(data[subset[i]].z.data(), 2 * d);
      y[static_cast<Eigen::Index>(i)] = data[subset[i]].score;
    }
    GPFitOptions fit = cfg.fit;
    fit.seed = numerics::Rng::derive(cfg.seed, iter);
    const GPModel gp = gp_fit(Z, y, {}, fit);
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& o : data) best = std::max(best, o.score);

    // Candidate pool: fresh prior draws and perturbations of the best codes.
    std::vector<std::size_t> ranked(data.size());
    std::iota(ranked.begin(), ranked.end(), 0);
    std::stable_sort(ranked.begin(), ranked.end(),
                     [&](std::size_t a, std::size_t b) { return data[a].score > data[b].score; });
    const std::size_t n_top = std::min(cfg.top_codes, ranked.size());
    const std::size_t n_prior = cfg.candidate_pool_size / 2;
    Eigen::MatrixXd pool(static_cast<Eigen::Index>(cfg.candidate_pool_size), static_cast<Eigen::Index>(2 * d));
    for (std::size_t c = 0; c < cfg.candidate_pool_size; ++c) {
      const auto row = static_cast<Eigen::Index>(c);
      if (c < n_prior) {
        for (std::size_t k = 0; k < 2 * d; ++k) pool(row, static_cast<Eigen::Index>(k)) = rng.normal();
      } else {
        const auto& centre = data[ranked[rng.index(n_top)]].z;
        for (std::size_t k = 0; k < 2 * d; ++k) {
          pool(row, static_cast<Eigen::Index>(k)) = centre[k] + cfg.perturb_sigma * rng.normal();
        }
      }
    }
    const auto ei = expected_improvement_batch(gp_predict_batch(gp, pool), best);
    std::vector<std::size_t> pick(ei.size());
    std::iota(pick.begin(), pick.end(), 0);
    std::stable_sort(pick.begin(), pick.end(), [&](std::size_t a, std::size_t b) { return ei[a] > ei[b]; });

    std::vector<Proposal> batch(cfg.batch_per_iter);
    for (std::size_t b = 0; b < cfg.batch_per_iter; ++b) {
      batch[b].iteration = iter;
      const auto row = pool.row(static_cast<Eigen::Index>(pick[b]));
      for (Eigen::Index k = 0; k < row.size(); ++k) batch[b].z.push_back(row[k]);
    }
    decode_and_score(model, scorer, backend, batch, numerics::Rng::derive(cfg.seed, 1000 + iter),
                     cfg.decode_temperature);
    std::size_t valid = 0;
    for (auto& p : batch) {
      if (p.valid) ++valid;
      if (p.score) data.push_back({p.z, *p.score});
      result.proposals.push_back(std::move(p));
    }
    result.valid_per_iteration.push_back(valid);
  }
  return result;
}

std::vector<Proposal> random_search(const vae::Model& model, const Scorer& scorer,
                                    const trees::TemplateBackend& backend, std::size_t n, std::uint64_t seed,
                                    double decode_temperature) {
  const std::size_t d = model.config().latent_dim;
  numerics::Rng rng(numerics::Rng::derive(seed, 0x7a));
  std::vector<Proposal> out(n);
  for (auto& p : out) {
    p.z.resize(2 * d);
    for (double& v : p.z) v = rng.normal();
  }
  decode_and_score(model, scorer, backend, out, numerics::Rng::derive(seed, 0x7b), decode_temperature);
  return out;
}

std::string base64_f32(const std::vector<double>& values) {
  std::string bytes;
  bytes.reserve(values.size() * 4);
  for (double v : values) {
    const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
    for (int k = 0; k < 4; ++k) bytes.push_back(static_cast<char>((bits >> (8 * k)) & 0xff));
  }
  std::string out(4 * ((bytes.size() + 2) / 3) + 1, '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(bytes.data()), static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::string proposals_to_jsonl(const std::vector<Proposal>& proposals) {
  std::string out;
  for (const auto& p : proposals) {
    const json j = {{"iter", p.iteration},
                    {"z", base64_f32(p.z)},
                    {"product", p.product ? json(*p.product) : json(nullptr)},
                    {"score", p.score ? json(*p.score) : json(nullptr)},
                    {"valid", p.valid}};
    out += j.dump() + "\n";
  }
  return out;
}

double top_k_mean(const std::vector<Proposal>& proposals, std::size_t k) {
  std::vector<double> s;
  for (const auto& p : proposals)
    if (p.score) s.push_back(*p.score);
  if (s.empty() || k == 0) return -std::numeric_limits<double>::infinity();
  std::sort(s.begin(), s.end(), std::greater<>());
  s.resize(std::min(k, s.size()));
  return std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
}

std::string score_histogram_csv(const std::vector<Proposal>& random, const std::vector<Proposal>& bo,
                                std::size_t bins) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto* set : {&random, &bo})
    for (const auto& p : *set)
      if (p.score) {
        lo = std::min(lo, *p.score);
        hi = std::max(hi, *p.score);
      }
  std::ostringstream os;
  os.precision(10);
  os << "bin_lo,bin_hi,random,bo\n";
  if (!std::isfinite(lo) || bins == 0) return os.str();
  if (hi <= lo) hi = lo + 1.0;
  const double width = (hi - lo) / static_cast<double>(bins);
  auto count = [&](const std::vector<Proposal>& set) {
    std::vector<std::size_t> c(bins, 0);
    for (const auto& p : set)
      if (p.score) c[std::min(bins - 1, static_cast<std::size_t>((*p.score - lo) / width))]++;
    return c;
  };
  const auto r = count(random), b = count(bo);
  for (std::size_t i = 0; i < bins; ++i) {
    os << lo + width * static_cast<double>(i) << ',' << lo + width * static_cast<double>(i + 1) << ',' << r[i] << ','
       << b[i] << '\n';
  }
  return os.str();
}

}  // namespace rxngen::bayesopt
