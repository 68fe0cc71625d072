// Copyright 2026 The rxngen Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

#include "rxngen/numerics/adam.hpp"
#include "rxngen/vae/model.hpp"

namespace rxngen::vae {

namespace {

constexpr std::uint64_t kShuffleStream = 101;
constexpr std::uint64_t kNoiseStream = 102;
constexpr std::uint64_t kEvalStream = 103;

}  // namespace

ElboValues& ElboValues::operator+=(const ElboValues& o) {
  total += o.total;
  junction += o.junction;
  reaction += o.reaction;
  kl_x += o.kl_x;
  kl_y += o.kl_y;
  return *this;
}

ElboValues ElboValues::scaled(double k) const { return {total * k, junction * k, reaction * k, kl_x * k, kl_y * k}; }

ElboValues values_of(const ElboTerms& t) {
  return {t.total.item(), t.junction.item(), t.reaction.item(), t.kl_x.item(), t.kl_y.item()};
}

ElboTerms elbo_loss(Tape& tape, const Model& model, const trees::TreePair& pair, double beta, numerics::Rng& rng) {
  const auto enc_x = model.jt_encoder.encode(tape, pair.junction);
  const auto post_y = model.rxn_encoder.encode(tape, pair.reaction, model.vocab().templates());
  const Var z_x = jt::sample_latent(tape, enc_x.posterior, rng);
  const Var z_y = jt::sample_latent(tape, post_y, rng);
  const Var nodes = numerics::stack_rows(enc_x.nodes.h);

  ElboTerms t;
  t.junction = model.jt_decoder.teacher_forced_loss(tape, pair.junction, z_x);
  t.reaction = model.rxn_decoder.teacher_forced_loss(tape, pair.reaction, z_y, nodes);
  t.kl_x = tape.kl_diag_gaussian(enc_x.posterior.mu, enc_x.posterior.logvar);
  t.kl_y = tape.kl_diag_gaussian(post_y.mu, post_y.logvar);
  const std::vector<Var> parts{t.junction, t.reaction, tape.scale(tape.add(t.kl_x, t.kl_y), beta)};
  t.total = tape.sum(parts);
  return t;
}

double beta_for_epoch(const ModelConfig& config, std::size_t epoch) {
  if (config.kl_warmup_epochs == 0) return 1.0;
  return std::min(1.0, static_cast<double>(epoch) / static_cast<double>(config.kl_warmup_epochs));
}

void round_to_float32(numerics::ParameterStore& store) {
  for (std::size_t i = 0; i < store.size(); ++i) {
    for (double& v : store[i].value().storage()) v = static_cast<double>(static_cast<float>(v));
  }
}

std::string TrainReport::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "epoch,beta,junction,reaction,kl_x,kl_y,total,grad_norm\n";
  for (const auto& r : epochs) {
    os << r.epoch << ',' << r.beta << ',' << r.mean.junction << ',' << r.mean.reaction << ',' << r.mean.kl_x << ','
       << r.mean.kl_y << ',' << r.mean.total << ',' << r.grad_norm << '\n';
  }
  return os.str();
}

namespace {

void check_dataset(const Model& model, const trees::Dataset& dataset) {
  if (dataset.trees.empty()) throw std::invalid_argument("training dataset is empty");
  if (!(dataset.vocab == model.vocab())) throw std::invalid_argument("dataset vocabularies differ from the model's");
}

}  // namespace

TrainReport train(Model& model, const trees::Dataset& dataset, const EpochCallback& on_epoch) {
  check_dataset(model, dataset);
  const ModelConfig& cfg = model.config();
  auto& store = model.params();
  numerics::Adam adam(store, {.lr = cfg.lr});
  numerics::Rng shuffle_rng(numerics::Rng::derive(cfg.seed, kShuffleStream));
  numerics::Rng noise(numerics::Rng::derive(cfg.seed, kNoiseStream));

  const std::size_t n = dataset.trees.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  TrainReport report;
  report.kl_warmup = cfg.kl_warmup_epochs > 0;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    EpochRow row;
    row.epoch = epoch;
    row.beta = beta_for_epoch(cfg, epoch);
    shuffle_rng.shuffle(order.begin(), order.end());
    double grad_norm_sum = 0;
    std::size_t batches = 0;
    for (std::size_t b0 = 0; b0 < n; b0 += cfg.batch_size) {
      const std::size_t b1 = std::min(n, b0 + cfg.batch_size);
      Tape tape;
      std::vector<Var> totals;
      for (std::size_t k = b0; k < b1; ++k) {
        const std::size_t idx = order[k];
        try {
          const ElboTerms terms = elbo_loss(tape, model, dataset.trees[idx], row.beta, noise);
          row.mean += values_of(terms);
          totals.push_back(terms.total);
        } catch (const numerics::NumericError& e) {
          throw TrainingError("non-finite loss at epoch " + std::to_string(epoch) + " on training example " +
                              std::to_string(idx) + ": " + e.what());
        }
      }
      const Var loss = tape.scale(tape.sum(totals), 1.0 / static_cast<double>(b1 - b0));
      tape.backward(loss);
      for (std::size_t i = 0; i < store.size(); ++i) (void)store[i].grad();
      grad_norm_sum += store.clip_grad_norm(cfg.clip_norm);
      ++batches;
      adam.step(store);
    }
    row.mean = row.mean.scaled(1.0 / static_cast<double>(n));
    row.grad_norm = grad_norm_sum / static_cast<double>(batches);
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!std::isfinite(row.mean.total)) {
      throw TrainingError("non-finite mean loss at epoch " + std::to_string(epoch));
    }
    report.epochs.push_back(row);
    if (on_epoch) on_epoch(row);
  }
  round_to_float32(store);
  report.final_eval =
      evaluate(model, dataset, report.epochs.back().beta, numerics::Rng::derive(cfg.seed, kEvalStream));
  return report;
}

ElboValues evaluate(const Model& model, const trees::Dataset& dataset, double beta, std::uint64_t seed) {
  check_dataset(model, dataset);
  const std::size_t n = dataset.trees.size();
  std::vector<ElboValues> per(n);
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < n; ++i) {
    try {
      numerics::Rng rng(numerics::Rng::derive(seed, i));
      Tape tape;
      per[i] = values_of(elbo_loss(tape, model, dataset.trees[i], beta, rng));
    } catch (...) {
#pragma omp critical
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  ElboValues total;
  for (const auto& v : per) total += v;
  return total.scaled(1.0 / static_cast<double>(n));
}

}  // namespace rxngen::vae
