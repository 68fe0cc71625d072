// Copyright 2026 The rxngen Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <json.hpp>

#include "rxngen/vae/model.hpp"
#include "support/echo_oracle.hpp"

namespace rxngen {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

// Runs the CLI in `dir`; returns the exit status.
int run(const fs::path& dir, const std::string& args) {
  const std::string cmd =
      "cd '" + dir.string() + "' && '" RXNGEN_CLI_PATH "' " + args + " >stdout.txt 2>stderr.txt";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string shell_output(const std::string& cmd) {
  std::string out;
  if (FILE* f = popen(cmd.c_str(), "r")) {
    char buf[256];
    while (std::fgets(buf, sizeof buf, f)) out += buf;
    pclose(f);
  }
  while (!out.empty() && (out.back() == '\n' || out.back() == ' ')) out.pop_back();
  return out;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("rxngen_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

constexpr const char* kSmallModel = "--hidden-dim 16 --latent-dim 4 --batch-size 5";

TEST_F(CliTest, GenDataIsByteIdentical) {
  ASSERT_EQ(run(dir_, "gen-data --seed 1 --trees 10 --out a.json"), 0);
  ASSERT_EQ(run(dir_, "gen-data --seed 1 --trees 10 --out b.json"), 0);
  EXPECT_EQ(slurp(dir_ / "a.json"), slurp(dir_ / "b.json"));
  ASSERT_EQ(run(dir_, "gen-data --seed 2 --trees 10 --out c.json"), 0);
  EXPECT_NE(slurp(dir_ / "a.json"), slurp(dir_ / "c.json"));
  const auto m = json::parse(slurp(dir_ / "a.json.manifest.json"));
  EXPECT_EQ(m["command"], "gen-data");
  EXPECT_EQ(m["config"]["trees"], 10);
  EXPECT_TRUE(m.contains("started_at") && m.contains("finished_at"));
}

TEST_F(CliTest, TrainedCheckpointReproducesReportedLoss) {
  ASSERT_EQ(run(dir_, "gen-data --seed 3 --trees 10 --out d.json"), 0);
  ASSERT_EQ(run(dir_, std::string("train --data d.json --out m.ckpt --epochs 1 ") + kSmallModel), 0);
  const auto manifest = json::parse(slurp(dir_ / "m.ckpt.manifest.json"));
  const auto model = vae::load_model(dir_ / "m.ckpt");
  const auto ds = trees::load_dataset(dir_ / "d.json");
  const auto e = vae::evaluate(model, ds, manifest["final_eval_beta"].get<double>(),
                               manifest["final_eval_seed"].get<std::uint64_t>());
  EXPECT_EQ(e.total, manifest["final_eval"]["total"].get<double>());
  EXPECT_EQ(e.junction, manifest["final_eval"]["junction"].get<double>());
  EXPECT_EQ(manifest["epoch_seconds"].size(), 1u);
  EXPECT_EQ(manifest["config"]["hidden_dim"], 16);

  const std::string git = shell_output("git hash-object '" + (dir_ / "m.ckpt").string() + "' 2>/dev/null");
  if (!git.empty()) EXPECT_EQ(manifest["checkpoint_sha1"], git);

  const std::string csv = slurp(dir_ / "m.ckpt.report.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);
}

TEST_F(CliTest, TrainIsByteIdentical) {
  ASSERT_EQ(run(dir_, "gen-data --seed 3 --trees 10 --out d.json"), 0);
  const std::string flags = std::string(" --epochs 2 --seed 4 ") + kSmallModel;
  ASSERT_EQ(run(dir_, "train --data d.json --out a.ckpt" + flags), 0);
  ASSERT_EQ(run(dir_, "train --data d.json --out b.ckpt" + flags), 0);
  EXPECT_EQ(slurp(dir_ / "a.ckpt"), slurp(dir_ / "b.ckpt"));
  EXPECT_EQ(slurp(dir_ / "a.ckpt.json"), slurp(dir_ / "b.ckpt.json"));
  EXPECT_EQ(slurp(dir_ / "a.ckpt.report.csv"), slurp(dir_ / "b.ckpt.report.csv"));
}

TEST_F(CliTest, SampleOnUntrainedModel) {
  ASSERT_EQ(run(dir_, "gen-data --seed 5 --trees 20 --out d.json"), 0);
  const auto ds = trees::load_dataset(dir_ / "d.json");
  vae::ModelConfig c;
  c.hidden_dim = 16;
  c.latent_dim = 4;
  vae::save_model(vae::Model(c, ds.vocab), dir_ / "u.ckpt");
  ASSERT_EQ(run(dir_, "sample --checkpoint u.ckpt --data d.json --n 100 --seed 2 --out s1.json"), 0);
  ASSERT_EQ(run(dir_, "sample --checkpoint u.ckpt --data d.json --n 100 --seed 2 --threads 1 --out s2.json"), 0);
  EXPECT_EQ(slurp(dir_ / "s1.json"), slurp(dir_ / "s2.json"));
  EXPECT_EQ(slurp(dir_ / "s1.json.metrics.json"), slurp(dir_ / "s2.json.metrics.json"));
  const auto metrics = json::parse(slurp(dir_ / "s1.json.metrics.json"));
  EXPECT_EQ(metrics["count"], 100);
  for (const char* key : {"validity", "uniqueness", "novelty", "quality"}) {
    EXPECT_GE(metrics[key].get<double>(), 0.0) << key;
    EXPECT_LE(metrics[key].get<double>(), 100.0) << key;
  }
  EXPECT_GE(metrics["descriptor_distance"].get<double>(), 0.0);
  const auto samples = trees::load_dataset(dir_ / "s1.json", false);
  EXPECT_EQ(samples.trees.size(), 100u);
}

TEST_F(CliTest, ExecWithToyBackendAndOracle) {
  ASSERT_EQ(run(dir_, "gen-data --seed 6 --trees 8 --out d.json"), 0);
  ASSERT_EQ(run(dir_, "exec --data d.json --out toy.jsonl"), 0);
  const auto ds = trees::load_dataset(dir_ / "d.json");
  std::ifstream toy(dir_ / "toy.jsonl");
  std::string line;
  std::size_t i = 0;
  for (; std::getline(toy, line); ++i) {
    const auto r = json::parse(line);
    EXPECT_EQ(r["status"], "valid");
    EXPECT_EQ(r["product"], *ds.trees[i].product);
  }
  EXPECT_EQ(i, ds.trees.size());

  testing::EchoOracle oracle;
  ASSERT_EQ(run(dir_, "exec --data d.json --out echo.jsonl --oracle " + oracle.endpoint()), 0);
  std::ifstream echo(dir_ / "echo.jsonl");
  while (std::getline(echo, line)) {
    const auto r = json::parse(line);
    EXPECT_EQ(r["status"], "valid");
    EXPECT_EQ(r["product"].get<std::string>().rfind('T', 0), 0u);
  }
  EXPECT_GT(oracle.requests(), 0);
}

TEST_F(CliTest, OptimizeAndEvalSynthAreByteIdentical) {
  ASSERT_EQ(run(dir_, "gen-data --seed 7 --trees 20 --out d.json"), 0);
  ASSERT_EQ(run(dir_, std::string("train --data d.json --out m.ckpt --epochs 2 ") + kSmallModel), 0);
  const std::string bo =
      " --checkpoint m.ckpt --data d.json --bo-iters 2 --bo-batch 4 --candidate-pool-size 40 --subset-size 20"
      " --gp-restarts 2 --gp-iterations 10 --seed 3";
  ASSERT_EQ(run(dir_, "optimize --out a.jsonl" + bo), 0);
  ASSERT_EQ(run(dir_, "optimize --out b.jsonl" + bo), 0);
  for (const char* suffix : {"", ".random.jsonl", ".histogram.csv", ".summary.json"}) {
    EXPECT_EQ(slurp(dir_ / ("a.jsonl" + std::string(suffix))), slurp(dir_ / ("b.jsonl" + std::string(suffix))))
        << suffix;
  }
  const std::string log = slurp(dir_ / "a.jsonl");
  EXPECT_EQ(std::count(log.begin(), log.end(), '\n'), 8);

  ASSERT_EQ(run(dir_, "eval-synth --checkpoint m.ckpt --n 10 --k-decodes 3 --out s.json"), 0);
  const auto s = json::parse(slurp(dir_ / "s.json"));
  EXPECT_EQ(s["n_codes"], 10);
  EXPECT_GE(s["rate"].get<double>(), s["single_sample_validity"].get<double>());
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(run(dir_, ""), 1);
  EXPECT_EQ(run(dir_, "train --epochs 1"), 1);
  EXPECT_EQ(run(dir_, "train --data missing.json --out m.ckpt"), 1);
  EXPECT_NE(slurp(dir_ / "stderr.txt").find("missing.json"), std::string::npos);
  {
    std::ofstream bad(dir_ / "bad.json");
    bad << "{\"format_version\": 1, \"trees\": [";
  }
  EXPECT_EQ(run(dir_, "exec --data bad.json --out e.jsonl"), 1);
  ASSERT_EQ(run(dir_, "gen-data --trees 5 --out d.json"), 0);
  EXPECT_EQ(run(dir_, "train --data d.json --out m.ckpt --latent-dim 0"), 1);
  EXPECT_EQ(run(dir_, "eval-synth --checkpoint nothing.ckpt --out s.json"), 1);
  testing::EchoOracle garbage(testing::EchoOracle::Mode::kGarbage);
  EXPECT_EQ(run(dir_, "exec --data d.json --out e.jsonl --oracle " + garbage.endpoint()), 2);
  EXPECT_EQ(run(dir_, "--help"), 0);
}

}  // namespace
}  // namespace rxngen
