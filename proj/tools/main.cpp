// Copyright 2026 The rxngen Authors
// SPDX-License-Identifier: Apache-2.0

// rxngen command-line driver.

#include <omp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <iostream>
#include <memory>
#include <optional>

#include "manifest.hpp"
#include "rxngen/bayesopt/bo.hpp"
#include "rxngen/executor/executor.hpp"
#include "rxngen/numerics/checkpoint.hpp"
#include "rxngen/trees/oracle.hpp"

namespace rxngen::cli {
namespace {

using nlohmann::json;

// Input or flag problems; exit code 1.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Common {
  std::uint64_t seed = 1;
  int threads = 0;
  std::string oracle;
};

// Toy backend unless --oracle names an endpoint.
class Backend {
 public:
  Backend(const std::string& oracle, const trees::TemplateRegistry& registry) {
    if (oracle.empty()) {
      backend_ = std::make_unique<trees::ToyBackend>(registry);
    } else {
      client_ = std::make_unique<trees::OracleClient>(oracle);
      backend_ = std::make_unique<trees::OracleBackend>(*client_, registry);
    }
  }
  const trees::TemplateBackend& get() const { return *backend_; }

 private:
  std::unique_ptr<trees::OracleClient> client_;
  std::unique_ptr<trees::TemplateBackend> backend_;
};

json common_json(const Common& c) {
  return {{"threads", c.threads}, {"oracle", c.oracle.empty() ? json(nullptr) : json(c.oracle)}};
}

json values_json(const vae::ElboValues& v) {
  return {{"total", v.total}, {"junction", v.junction}, {"reaction", v.reaction}, {"kl_x", v.kl_x}, {"kl_y", v.kl_y}};
}

void add_common(CLI::App* sub, Common& c, bool with_oracle) {
  sub->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  sub->add_option("--threads", c.threads, "Worker thread cap (0 = OpenMP default)")->check(CLI::NonNegativeNumber);
  if (with_oracle) sub->add_option("--oracle", c.oracle, "Reaction oracle endpoint host:port");
}

// gen-data ------------------------------------------------------------------

struct GenDataArgs {
  Common common;
  std::string out;
  trees::GeneratorConfig gen;
};

void run_gen_data(const GenDataArgs& a) {
  Manifest m;
  m.command = "gen-data";
  trees::GeneratorConfig g = a.gen;
  g.seed = a.common.seed;
  const auto ds = trees::generate_toy_dataset(g);
  trees::save_dataset(ds, a.out);
  m.seed = g.seed;
  m.config = {{"trees", g.n_trees},
              {"n_templates", g.n_templates},
              {"n_start_molecules", g.n_start_molecules},
              {"max_depth", g.max_depth},
              {"min_occurrence", g.min_occurrence},
              {"expand_probability", g.expand_probability}};
  m.config.update(common_json(a.common));
  m.outputs = {{"dataset", a.out}};
  m.write(a.out);
  std::cout << "wrote " << ds.trees.size() << " trees to " << a.out << "\n";
}

// train ---------------------------------------------------------------------

struct TrainArgs {
  Common common;
  std::string data;
  std::string out;
  std::string report;
  vae::ModelConfig model;
};

void run_train(const TrainArgs& a) {
  Manifest m;
  m.command = "train";
  const auto ds = trees::load_dataset(a.data);
  vae::ModelConfig cfg = a.model;
  cfg.seed = a.common.seed;
  vae::validate(cfg);
  vae::Model model(cfg, ds.vocab);
  json seconds = json::array();
  const auto report = vae::train(model, ds, [&](const vae::EpochRow& r) {
    seconds.push_back(r.seconds);
    std::fprintf(stderr, "epoch %zu beta %.3f total %.4f (%.1fs)\n", r.epoch, r.beta, r.mean.total, r.seconds);
  });
  vae::save_model(model, a.out);
  const std::string report_path = a.report.empty() ? a.out + ".report.csv" : a.report;
  write_text(report_path, report.to_csv());

  m.seed = cfg.seed;
  m.config = json::parse(vae::config_to_json(cfg));
  m.config.update(common_json(a.common));
  m.inputs = {{"data", a.data}};
  m.outputs = {{"checkpoint", a.out}, {"sidecar", vae::sidecar_path(a.out).string()}, {"report", report_path}};
  m.extra = {{"epoch_seconds", seconds},
             {"final_eval", values_json(report.final_eval)},
             {"final_eval_beta", report.epochs.back().beta},
             {"final_eval_seed", numerics::Rng::derive(cfg.seed, 103)},
             {"kl_warmup", report.kl_warmup}};
  m.write(a.out);
  std::cout << "final total " << json(report.final_eval.total).dump() << "\n";
}

// sample --------------------------------------------------------------------

struct SampleArgs {
  Common common;
  std::string checkpoint;
  std::string data;
  std::string out;
  std::size_t n = 1000;
  double temperature = 1.0;
};

void run_sample(const SampleArgs& a) {
  Manifest m;
  m.command = "sample";
  const auto model = vae::load_model(a.checkpoint);
  const auto training = trees::load_dataset(a.data);
  if (!(training.vocab == model.vocab())) throw UsageError("--data vocabularies differ from the checkpoint's");
  const Backend backend(a.common.oracle, model.vocab().templates());
  auto pairs = vae::sample_prior(model, a.n, a.common.seed, {.temperature = a.temperature});
  std::vector<trees::ReactionTree> rt;
  for (const auto& p : pairs) rt.push_back(p.reaction);
  const auto results = executor::execute_all(rt, model.vocab(), backend.get());
  for (std::size_t i = 0; i < pairs.size(); ++i) pairs[i].product = results[i].product;
  const auto metrics = executor::compute_metrics(rt, results, training);

  trees::Dataset out{model.vocab(), std::move(pairs)};
  trees::save_dataset(out, a.out);
  const std::string metrics_path = a.out + ".metrics.json";
  write_text(metrics_path, metrics.to_json() + "\n");

  m.seed = a.common.seed;
  m.config = {{"n", a.n}, {"temperature", a.temperature}};
  m.config.update(common_json(a.common));
  m.inputs = {{"checkpoint", a.checkpoint}, {"data", a.data}};
  m.outputs = {{"trees", a.out}, {"metrics", metrics_path}};
  m.write(a.out);
  std::cout << metrics.to_json() << "\n";
}

// exec ----------------------------------------------------------------------

struct ExecArgs {
  Common common;
  std::string data;
  std::string out;
};

void run_exec(const ExecArgs& a) {
  Manifest m;
  m.command = "exec";
  const auto ds = trees::load_dataset(a.data, /*require_products=*/false);
  const Backend backend(a.common.oracle, ds.vocab.templates());
  std::vector<trees::ReactionTree> rt;
  for (const auto& p : ds.trees) rt.push_back(p.reaction);
  const auto results = executor::execute_all(rt, ds.vocab, backend.get());
  std::string lines;
  std::size_t valid = 0;
  for (const auto& r : results) {
    lines += executor::result_to_json(r) + "\n";
    valid += r.valid;
  }
  write_text(a.out, lines);
  m.seed = a.common.seed;
  m.config = common_json(a.common);
  m.inputs = {{"data", a.data}};
  m.outputs = {{"results", a.out}};
  m.write(a.out);
  std::cout << json{{"count", results.size()}, {"valid", valid}}.dump() << "\n";
}

// optimize ------------------------------------------------------------------

struct OptimizeArgs {
  Common common;
  std::string checkpoint;
  std::string data;
  std::string out;
  bayesopt::BOConfig bo;
};

double percentile75(const std::vector<bayesopt::Proposal>& ps) {
  std::vector<double> s;
  for (const auto& p : ps)
    if (p.score) s.push_back(*p.score);
  if (s.empty()) return 0.0;
  std::sort(s.begin(), s.end());
  return s[static_cast<std::size_t>(0.75 * static_cast<double>(s.size() - 1))];
}

void run_optimize(const OptimizeArgs& a) {
  Manifest m;
  m.command = "optimize";
  const auto model = vae::load_model(a.checkpoint);
  const auto ds = trees::load_dataset(a.data);
  if (!(ds.vocab == model.vocab())) throw UsageError("--data vocabularies differ from the checkpoint's");
  const Backend backend(a.common.oracle, model.vocab().templates());
  bayesopt::BOConfig cfg = a.bo;
  cfg.seed = a.common.seed;
  const auto scorer = bayesopt::toy_scorer();
  const auto result = bayesopt::bo_loop(model, scorer, ds, backend.get(), cfg);
  const auto random = bayesopt::random_search(model, scorer, backend.get(), cfg.iterations * cfg.batch_per_iter,
                                              cfg.seed, cfg.decode_temperature);

  const std::string random_path = a.out + ".random.jsonl";
  const std::string hist_path = a.out + ".histogram.csv";
  const std::string summary_path = a.out + ".summary.json";
  write_text(a.out, bayesopt::proposals_to_jsonl(result.proposals));
  write_text(random_path, bayesopt::proposals_to_jsonl(random));
  write_text(hist_path, bayesopt::score_histogram_csv(random, result.proposals));
  const json summary = {{"bo_top10_mean", bayesopt::top_k_mean(result.proposals, 10)},
                        {"random_top10_mean", bayesopt::top_k_mean(random, 10)},
                        {"bo_p75", percentile75(result.proposals)},
                        {"random_p75", percentile75(random)},
                        {"valid_per_iteration", result.valid_per_iteration}};
  write_text(summary_path, summary.dump(2) + "\n");

  m.seed = cfg.seed;
  m.config = {{"bo_iters", cfg.iterations},
              {"bo_batch", cfg.batch_per_iter},
              {"candidate_pool_size", cfg.candidate_pool_size},
              {"subset_size", cfg.subset_size},
              {"top_codes", cfg.top_codes},
              {"perturb_sigma", cfg.perturb_sigma},
              {"temperature", cfg.decode_temperature},
              {"gp_restarts", cfg.fit.restarts},
              {"gp_iterations", cfg.fit.iterations},
              {"scorer", "toy"}};
  m.config.update(common_json(a.common));
  m.inputs = {{"checkpoint", a.checkpoint}, {"data", a.data}};
  m.outputs = {{"bo_log", a.out}, {"random_log", random_path}, {"histogram", hist_path}, {"summary", summary_path}};
  m.write(a.out);
  std::cout << summary.dump() << "\n";
}

// eval-synth ----------------------------------------------------------------

struct SynthArgs {
  Common common;
  std::string checkpoint;
  std::string out;
  std::size_t n = 1000;
  std::size_t k = 10;
  double temperature = 1.0;
};

void run_eval_synth(const SynthArgs& a) {
  Manifest m;
  m.command = "eval-synth";
  const auto model = vae::load_model(a.checkpoint);
  const Backend backend(a.common.oracle, model.vocab().templates());
  const auto r = executor::synthesizability_eval(model, a.n, a.k, backend.get(), a.common.seed, a.temperature);
  write_text(a.out, r.to_json() + "\n");
  m.seed = a.common.seed;
  m.config = {{"n", a.n}, {"k_decodes", a.k}, {"temperature", a.temperature}};
  m.config.update(common_json(a.common));
  m.inputs = {{"checkpoint", a.checkpoint}};
  m.outputs = {{"report", a.out}};
  m.write(a.out);
  std::cout << json{{"rate", r.rate}, {"single_sample_validity", r.single_sample_validity}}.dump() << "\n";
}

int classify(const std::exception& e) {
  if (dynamic_cast<const UsageError*>(&e) || dynamic_cast<const std::invalid_argument*>(&e) ||
      dynamic_cast<const trees::DatasetError*>(&e) || dynamic_cast<const numerics::CheckpointError*>(&e)) {
    return 1;
  }
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reaction-tree VAE toolkit: data generation, training, sampling, execution and optimization"};
  app.require_subcommand(1);
  std::function<void()> action;

  GenDataArgs gen;
  auto* s_gen = app.add_subcommand("gen-data", "Generate a synthetic toy dataset");
  add_common(s_gen, gen.common, false);
  s_gen->add_option("--out", gen.out, "Dataset JSON path")->required();
  s_gen->add_option("--trees", gen.gen.n_trees, "Number of trees")->capture_default_str()->check(CLI::PositiveNumber);
  s_gen->add_option("--n-templates", gen.gen.n_templates)->capture_default_str();
  s_gen->add_option("--n-start-molecules", gen.gen.n_start_molecules)->capture_default_str();
  s_gen->add_option("--max-depth", gen.gen.max_depth)->capture_default_str();
  s_gen->add_option("--min-occurrence", gen.gen.min_occurrence)->capture_default_str();
  s_gen->callback([&] { action = [&] { run_gen_data(gen); }; });

  TrainArgs tr;
  auto* s_train = app.add_subcommand("train", "Train the VAE and write a checkpoint");
  add_common(s_train, tr.common, false);
  s_train->add_option("--data", tr.data, "Training dataset")->required();
  s_train->add_option("--out,--checkpoint", tr.out, "Checkpoint path")->required();
  s_train->add_option("--report", tr.report, "TrainReport CSV path (default <out>.report.csv)");
  s_train->add_option("--epochs", tr.model.epochs)->capture_default_str();
  s_train->add_option("--batch-size", tr.model.batch_size)->capture_default_str();
  s_train->add_option("--latent-dim", tr.model.latent_dim)->capture_default_str();
  s_train->add_option("--hidden-dim", tr.model.hidden_dim)->capture_default_str();
  s_train->add_option("--lr", tr.model.lr)->capture_default_str();
  s_train->add_option("--kl-warmup-epochs", tr.model.kl_warmup_epochs)->capture_default_str();
  s_train->add_option("--clip-norm", tr.model.clip_norm)->capture_default_str();
  s_train->add_flag("--use-step-context", tr.model.use_step_context, "Attend per reactant step");
  s_train->callback([&] { action = [&] { run_train(tr); }; });

  SampleArgs sa;
  auto* s_sample = app.add_subcommand("sample", "Sample from the prior and report generation metrics");
  add_common(s_sample, sa.common, true);
  s_sample->add_option("--checkpoint", sa.checkpoint)->required();
  s_sample->add_option("--data", sa.data, "Training dataset for novelty and descriptors")->required();
  s_sample->add_option("--out", sa.out, "Sampled trees (dataset JSON)")->required();
  s_sample->add_option("--n", sa.n)->capture_default_str();
  s_sample->add_option("--temperature", sa.temperature, "Sampling temperature (0 = greedy)")->capture_default_str();
  s_sample->callback([&] { action = [&] { run_sample(sa); }; });

  ExecArgs ex;
  auto* s_exec = app.add_subcommand("exec", "Execute every reaction tree in a tree file");
  add_common(s_exec, ex.common, true);
  s_exec->add_option("--data", ex.data, "Tree file (dataset JSON, products optional)")->required();
  s_exec->add_option("--out", ex.out, "ExecutionResult JSON lines")->required();
  s_exec->callback([&] { action = [&] { run_exec(ex); }; });

  OptimizeArgs op;
  auto* s_opt = app.add_subcommand("optimize", "Batched Bayesian optimization against random sampling");
  add_common(s_opt, op.common, true);
  s_opt->add_option("--checkpoint", op.checkpoint)->required();
  s_opt->add_option("--data", op.data, "Training dataset to embed")->required();
  s_opt->add_option("--out", op.out, "BO log (JSON lines)")->required();
  s_opt->add_option("--bo-iters", op.bo.iterations)->capture_default_str();
  s_opt->add_option("--bo-batch", op.bo.batch_per_iter)->capture_default_str();
  s_opt->add_option("--candidate-pool-size", op.bo.candidate_pool_size)->capture_default_str();
  s_opt->add_option("--subset-size", op.bo.subset_size)->capture_default_str();
  s_opt->add_option("--top-codes", op.bo.top_codes)->capture_default_str();
  s_opt->add_option("--perturb-sigma", op.bo.perturb_sigma)->capture_default_str();
  s_opt->add_option("--gp-restarts", op.bo.fit.restarts)->capture_default_str();
  s_opt->add_option("--gp-iterations", op.bo.fit.iterations)->capture_default_str();
  s_opt->add_option("--temperature", op.bo.decode_temperature, "Decode temperature (0 = greedy)")
      ->capture_default_str();
  s_opt->callback([&] { action = [&] { run_optimize(op); }; });

  SynthArgs sy;
  auto* s_synth = app.add_subcommand("eval-synth", "Modal-product synthesizability rate");
  add_common(s_synth, sy.common, true);
  s_synth->add_option("--checkpoint", sy.checkpoint)->required();
  s_synth->add_option("--out", sy.out, "Report JSON")->required();
  s_synth->add_option("--n", sy.n, "Prior codes")->capture_default_str();
  s_synth->add_option("--k-decodes", sy.k)->capture_default_str()->check(CLI::PositiveNumber);
  s_synth->add_option("--temperature", sy.temperature)->capture_default_str();
  s_synth->callback([&] { action = [&] { run_eval_synth(sy); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  for (const Common* c : {&gen.common, &tr.common, &sa.common, &ex.common, &op.common, &sy.common}) {
    if (c->threads > 0) omp_set_num_threads(c->threads);
  }
  try {
    action();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return classify(e);
  }
  return 0;
}

}  // namespace rxngen::cli

int main(int argc, char** argv) { return rxngen::cli::main(argc, argv); }
