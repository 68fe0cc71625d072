// Copyright 2026 The rxngen Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <unordered_set>

#include "rxngen/numerics/random.hpp"
#include "rxngen/trees/dataset.hpp"

namespace rxngen::trees {

namespace {

using numerics::Rng;

// Fragment and token alphabet; 'T' is reserved for template term heads.
constexpr std::string_view kLetters = "ABCDEFGHIJKLMNOPQRSUVWXYZ";

struct GenTerm {
  int template_id = -1;  // -1 for a starting-molecule leaf
  int start = -1;
  std::vector<GenTerm> children;
  std::string product;
};

class TreeSampler {
 public:
  TreeSampler(const TemplateRegistry& registry, const std::vector<std::string>& starting, double expand_p, Rng& rng)
      : registry_(registry), starting_(starting), expand_p_(expand_p), rng_(rng) {
    for (const auto& t : registry.entries()) {
      auto& bucket = with_token_[t.token];
      if (!bucket.empty()) continue;
      for (std::size_t i = 0; i < starting.size(); ++i) {
        if (starting[i].find(t.token) != std::string::npos) bucket.push_back(static_cast<int>(i));
      }
    }
  }

  GenTerm sample(int depth_budget) {
    GenTerm term;
    term.template_id = static_cast<int>(rng_.index(registry_.size()));
    const Template& t = registry_.at(term.template_id);
    for (int k = 0; k < t.arity; ++k) {
      std::optional<GenTerm> child;
      if (depth_budget > 1 && rng_.bernoulli(expand_p_)) {
        for (int attempt = 0; attempt < 10 && !child; ++attempt) {
          GenTerm sub = sample(depth_budget - 1);
          if (sub.product.find(t.token) != std::string::npos) child = std::move(sub);
        }
      }
      if (!child) {
        const auto& bucket = with_token_.at(t.token);
        GenTerm leaf;
        leaf.start = bucket[rng_.index(bucket.size())];
        leaf.product = starting_[leaf.start];
        child = std::move(leaf);
      }
      term.children.push_back(std::move(*child));
    }
    std::stable_sort(term.children.begin(), term.children.end(),
                     [](const GenTerm& a, const GenTerm& b) { return a.product < b.product; });
    std::vector<std::string> reactants;
    for (const auto& c : term.children) reactants.push_back(c.product);
    auto outcome = apply_template_toy(registry_, term.template_id, reactants);
    if (!outcome.ok) throw std::logic_error("generator produced an unsatisfied precondition");
    term.product = std::move(outcome.product);
    return term;
  }

 private:
  const TemplateRegistry& registry_;
  const std::vector<std::string>& starting_;
  double expand_p_;
  Rng& rng_;
  std::map<char, std::vector<int>> with_token_;
};

int emit(const GenTerm& term, ReactionTree& tree, int parent) {
  const int id = static_cast<int>(tree.nodes.size());
  if (term.template_id < 0) {
    tree.nodes.push_back({NodeKind::kMolecule, term.start});
    if (parent >= 0) tree.edges.emplace_back(parent, id);
    return id;
  }
  tree.nodes.push_back({NodeKind::kMolecule, kExpandLabel});
  if (parent >= 0) tree.edges.emplace_back(parent, id);
  const int tid = static_cast<int>(tree.nodes.size());
  tree.nodes.push_back({NodeKind::kTemplate, term.template_id});
  tree.edges.emplace_back(id, tid);
  for (const auto& c : term.children) emit(c, tree, tid);
  return id;
}

std::vector<std::string> sample_starting_molecules(const GeneratorConfig& config, const TemplateRegistry& registry,
                                                   Rng& rng) {
  std::vector<std::string> mols;
  std::unordered_set<std::string> seen;
  std::size_t attempts = 0;
  while (mols.size() < config.n_start_molecules) {
    if (++attempts > 1000 * config.n_start_molecules + 1000) {
      throw InfeasibleConfig("could not sample enough distinct starting molecules");
    }
    const std::size_t len = 2 + rng.index(4);
    std::string m;
    for (std::size_t i = 0; i < len; ++i) m.push_back(kLetters[rng.index(kLetters.size())]);
    if (seen.insert(m).second) mols.push_back(std::move(m));
  }

  std::set<char> tokens;
  for (const auto& t : registry.entries()) tokens.insert(t.token);
  const std::size_t need = (config.n_start_molecules + 9) / 10;
  for (char tok : tokens) {
    auto count = [&] {
      return static_cast<std::size_t>(std::count_if(mols.begin(), mols.end(), [tok](const std::string& m) {
        return m.find(tok) != std::string::npos;
      }));
    };
    std::size_t have = count();
    for (int attempt = 0; have < need; ++attempt) {
      if (attempt >= 1000) {
        throw InfeasibleConfig(std::string("token '") + tok + "' appears in too few starting molecules");
      }
      auto& m = mols[rng.index(mols.size())];
      if (m.find(tok) != std::string::npos || m.size() >= 12) continue;
      std::string candidate = m;
      candidate.insert(candidate.begin() + static_cast<std::ptrdiff_t>(rng.index(candidate.size() + 1)), tok);
      if (seen.contains(candidate)) continue;
      seen.erase(m);
      seen.insert(candidate);
      m = std::move(candidate);
      ++have;
    }
  }
  return mols;
}

// Drops pool entries that use a template or starting molecule occurring
// fewer than `floor` times, until the pool is stable.
std::vector<bool> occurrence_filter(const std::vector<GenTerm>& pool, std::size_t floor) {
  std::vector<bool> keep(pool.size(), true);
  if (floor == 0) return keep;
  for (bool changed = true; changed;) {
    changed = false;
    std::map<int, std::size_t> templates, starts;
    std::function<void(const GenTerm&, int)> count = [&](const GenTerm& t, int delta) {
      if (t.template_id < 0) {
        starts[t.start] += delta;
        return;
      }
      templates[t.template_id] += delta;
      for (const auto& c : t.children) count(c, delta);
    };
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (keep[i]) count(pool[i], 1);
    }
    std::function<bool(const GenTerm&)> rare = [&](const GenTerm& t) {
      if (t.template_id < 0) return starts[t.start] < floor;
      if (templates[t.template_id] < floor) return true;
      return std::any_of(t.children.begin(), t.children.end(), rare);
    };
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (keep[i] && rare(pool[i])) {
        keep[i] = false;
        changed = true;
      }
    }
  }
  return keep;
}

}  // namespace

Dataset generate_toy_dataset(const GeneratorConfig& config) {
  if (config.n_trees < 1 || config.n_templates < 1 || config.n_start_molecules < 1) {
    throw std::invalid_argument("generate_toy_dataset: all counts must be >= 1");
  }
  if (config.max_depth < 1 || config.max_depth > 6) {
    throw std::invalid_argument("generate_toy_dataset: max_depth must be in [1, 6]");
  }
  Rng rng(config.seed);

  std::vector<Template> templates;
  for (std::size_t i = 0; i < config.n_templates; ++i) {
    const double u = rng.uniform();
    const int arity = u < 0.3 ? 1 : (u < 0.8 ? 2 : 3);
    templates.push_back({static_cast<int>(i), arity, kLetters[rng.index(kLetters.size())]});
  }
  TemplateRegistry registry(templates);
  auto starting = sample_starting_molecules(config, registry, rng);

  TreeSampler sampler(registry, starting, config.expand_probability, rng);
  const std::size_t pool_size = config.min_occurrence > 0 ? 3 * config.n_trees : config.n_trees;
  std::vector<GenTerm> pool;
  pool.reserve(pool_size);
  for (std::size_t i = 0; i < pool_size; ++i) pool.push_back(sampler.sample(config.max_depth));

  const auto keep = occurrence_filter(pool, config.min_occurrence);
  std::vector<std::size_t> chosen;
  for (std::size_t i = 0; i < pool.size() && chosen.size() < config.n_trees; ++i) {
    if (keep[i]) chosen.push_back(i);
  }
  // Top up from filtered-out entries when the floor cannot be met.
  for (std::size_t i = 0; i < pool.size() && chosen.size() < config.n_trees; ++i) {
    if (!keep[i]) chosen.push_back(i);
  }
  std::sort(chosen.begin(), chosen.end());

  std::vector<std::string> substructures;
  std::unordered_set<std::string> seen;
  for (std::size_t i : chosen) {
    for (const auto& label : decompose_labels(pool[i].product).labels) {
      if (seen.insert(label).second) substructures.push_back(label);
    }
  }

  Dataset ds{Vocabularies(std::move(substructures), std::move(starting), std::move(registry)), {}};
  for (std::size_t i : chosen) {
    TreePair pair;
    emit(pool[i], pair.reaction, -1);
    pair.product = pool[i].product;
    pair.junction = decompose_toy(*pair.product, ds.vocab);
    ds.trees.push_back(std::move(pair));
  }
  return ds;
}

}  // namespace rxngen::trees
