// Copyright 2026 The CLEIT Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "cleit/config.hpp"
#include "cleit/error.hpp"
#include "cli.hpp"
#include "helpers.hpp"

namespace cleit {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string config_error(const json& doc) {
  try {
    validate_config(doc);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// A run small enough for unit tests: narrow models, few epochs.
json tiny_config() {
  json phase = {{"max_epochs", 3}, {"batch_size", 32}};
  json ft = {{"max_epochs", 4}, {"batch_size", 32}, {"lr", 1e-3}, {"n_frozen", 1}, {"n_unfreeze", 1}};
  return {{"repeats", 2},
          {"synth",
           {{"unlabeled", 120}, {"labeled", 60}, {"test", 20}, {"high_width", 16}, {"low_width", 16},
            {"tasks", 4}, {"latent_rank", 4}, {"low_active_fraction", 0.2}}},
          {"model",
           {{"latent_dim", 8},
            {"encoder_widths", {16, 8}},
            {"decoder_widths", {8, 16}},
            {"transmitter_widths", {8, 8}},
            {"shared_widths", {8}},
            {"head_widths", {4}}}},
          {"phases", {{"pretrain_high", phase}, {"finetune_high", ft}, {"pretrain_low", phase}, {"finetune_low", ft}}}};
}

struct CliResult {
  int code;
  std::string out, err;
};

CliResult cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run_command(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path write_config(const fs::path& dir, const json& doc) {
  const fs::path p = dir / "config.in.json";
  std::ofstream(p) << doc.dump(2);
  return p;
}

TEST(Config, EmptyDocumentGivesPaperDefaults) {
  const RunConfig c = validate_config(json::object());
  EXPECT_EQ(c.pretrain_high.batch_size, 64);
  EXPECT_EQ(c.finetune_low.batch_size, 64);
  EXPECT_EQ(c.pretrain_high.lr, 5e-3);
  EXPECT_EQ(c.pretrain_low.lr, 5e-3);
  EXPECT_EQ(c.finetune_high.lr, 1e-4);
  EXPECT_EQ(c.finetune_low.lr, 1e-4);
  EXPECT_EQ(c.lambda, 0.8);
  EXPECT_EQ(c.finetune_low.decay, 0.8);
  EXPECT_EQ(c.model.latent_dim, 128);
  EXPECT_EQ(c.model.encoder_widths, (std::vector<Index>{512, 256, 128}));
  EXPECT_EQ(c.model.decoder_widths, (std::vector<Index>{128, 256, 512}));
  EXPECT_EQ(c.loss, ClrKind::contrastive);
  EXPECT_TRUE(c.transmitter);
  EXPECT_TRUE(c.synth.has_value());
  EXPECT_FALSE(c.data.has_value());
}

TEST(Config, OutOfRangeLambdaNamesTheField) {
  const std::string msg = config_error({{"lambda", 1.5}});
  EXPECT_NE(msg.find("lambda"), std::string::npos) << msg;
  EXPECT_EQ(msg.find('\n'), std::string::npos);
}

TEST(Config, RejectsMalformedDocuments) {
  EXPECT_NE(config_error({{"loss", "kl"}}).find("loss"), std::string::npos);
  EXPECT_NE(config_error({{"lamda", 0.5}}).find("lamda"), std::string::npos);
  EXPECT_NE(config_error({{"phases", {{"finetune_low", {{"decay", 0.0}}}}}}).find("decay"), std::string::npos);
  EXPECT_NE(config_error({{"repeats", "three"}}).find("repeats"), std::string::npos);
  EXPECT_FALSE(config_error({{"synth", json::object()},
                             {"data", {{"high", "h.tsv"}, {"low", "l.tsv"}, {"labels", "y.tsv"}}}})
                   .empty());
  EXPECT_FALSE(config_error({{"data", {{"high", "/nonexistent/h.tsv"}, {"low", "/nonexistent/l.tsv"},
                                       {"labels", "/nonexistent/y.tsv"}}}})
                   .empty());
}

TEST(Config, RoundTripIsAFixpoint) {
  const RunConfig c = validate_config(tiny_config());
  const json once = to_json(c);
  EXPECT_EQ(to_json(validate_config(once)), once);
  const json defaults = to_json(validate_config(json::object()));
  EXPECT_EQ(to_json(validate_config(defaults)), defaults);
}

TEST(Config, SynthSeedFollowsRunSeed) {
  EXPECT_EQ(validate_config(json{{"seed", 7}}).synth->seed, 7u);
}

TEST(Cli, UnknownFlagAndBadValuesExitOne) {
  EXPECT_EQ(cli({"run-all", "--no-such-flag"}).code, 1);
  EXPECT_EQ(cli({"frobnicate"}).code, 1);
  const auto dir = testing_util::scratch_dir("cli_lambda");
  const CliResult r = cli({"run-all", "--synth", "--lambda", "1.5", "--out-dir", dir.string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("lambda"), std::string::npos) << r.err;
  EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1) << r.err;
  const CliResult bad = cli({"ablate", "--synth", "--losses", "contrastive,kl", "--out-dir", dir.string()});
  EXPECT_EQ(bad.code, 1);
}

TEST(Cli, MissingDependencyNamesThePhase) {
  const auto dir = testing_util::scratch_dir("cli_missing");
  const auto cfg = write_config(dir, tiny_config());
  const CliResult r = cli({"finetune-low", "--config", cfg.string(), "--out-dir", (dir / "run").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("pretrain-low"), std::string::npos) << r.err;
  // The config snapshot is written before anything else.
  EXPECT_TRUE(fs::exists(dir / "run" / "config.json"));
}

TEST(Cli, RuntimeFailureExitsTwoAndNamesThePhase) {
  const auto dir = testing_util::scratch_dir("cli_failure");
  json doc = tiny_config();
  doc["phases"]["pretrain_high"]["lr"] = 1e200;
  const auto cfg = write_config(dir, doc);
  const CliResult r = cli({"pretrain-high", "--config", cfg.string(), "--out-dir", (dir / "run").string()});
  EXPECT_EQ(r.code, 2) << r.err;
  EXPECT_NE(r.err.find("pretrain-high"), std::string::npos) << r.err;
}

TEST(Cli, PhaseByPhaseMatchesRunAll) {
  const auto dir = testing_util::scratch_dir("cli_phases");
  json doc = tiny_config();
  doc["baselines"] = false;
  const auto cfg = write_config(dir, doc);
  const std::string a = (dir / "a").string(), b = (dir / "b").string();
  ASSERT_EQ(cli({"run-all", "--config", cfg.string(), "--out-dir", a}).code, 0);
  for (const char* cmd : {"pretrain-high", "finetune-high", "pretrain-low", "finetune-low", "evaluate"}) {
    ASSERT_EQ(cli({cmd, "--config", cfg.string(), "--out-dir", b}).code, 0) << cmd;
  }
  EXPECT_EQ(slurp(dir / "a" / "eval_report.json"), slurp(dir / "b" / "eval_report.json"));
}

TEST(Cli, RunAllIsByteIdenticalAndResumes) {
  const auto dir = testing_util::scratch_dir("cli_determinism");
  const auto cfg = write_config(dir, tiny_config());
  const fs::path a = dir / "a", b = dir / "b";
  ASSERT_EQ(cli({"run-all", "--config", cfg.string(), "--seed", "7", "--out-dir", a.string()}).code, 0);
  ASSERT_EQ(cli({"run-all", "--config", cfg.string(), "--seed", "7", "--out-dir", b.string()}).code, 0);
  const std::string report = slurp(a / "eval_report.json");
  ASSERT_FALSE(report.empty());
  EXPECT_EQ(report, slurp(b / "eval_report.json"));
  EXPECT_EQ(slurp(a / "comparison.tsv"), slurp(b / "comparison.tsv"));

  // Simulate a kill after pre-training: later phases and reports vanish.
  fs::remove_all(b / "cleit" / "finetune_low");
  fs::remove(b / "vae_mlp" / "pretrain_low" / "result.json");
  fs::remove(b / "eval_report.json");
  ASSERT_EQ(cli({"run-all", "--config", cfg.string(), "--seed", "7", "--out-dir", b.string()}).code, 0);
  EXPECT_EQ(report, slurp(b / "eval_report.json"));

  // A different seed changes the result.
  const fs::path c = dir / "c";
  ASSERT_EQ(cli({"run-all", "--config", cfg.string(), "--seed", "8", "--out-dir", c.string()}).code, 0);
  EXPECT_NE(report, slurp(c / "eval_report.json"));
}

TEST(Cli, AblateWritesEightRows) {
  const auto dir = testing_util::scratch_dir("cli_ablate");
  json doc = tiny_config();
  doc["repeats"] = 1;
  const auto cfg = write_config(dir, doc);
  const CliResult r = cli({"ablate", "--config", cfg.string(), "--out-dir", (dir / "run").string(), "--losses",
                           "contrastive,mmd,wgan,none", "--transmitter", "on,off"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in(dir / "run" / "comparison.tsv");
  std::string header, line;
  std::getline(in, header);
  EXPECT_EQ(header, "method\tdrugwise_pearson\tdrugwise_rmse\tsamplewise_pearson\tsamplewise_rmse");
  std::set<std::string> methods;
  while (std::getline(in, line)) methods.insert(line.substr(0, line.find('\t')));
  EXPECT_EQ(methods, (std::set<std::string>{"contrastive", "contrastive-identity", "mmd", "mmd-identity", "wgan",
                                            "wgan-identity", "none", "none-identity"}));
}

TEST(Cli, SynthExportLoadsBack) {
  const auto dir = testing_util::scratch_dir("cli_synth");
  const auto cfg = write_config(dir, tiny_config());
  ASSERT_EQ(cli({"synth", "--config", cfg.string(), "--out-dir", (dir / "data").string()}).code, 0);
  json doc = tiny_config();
  doc.erase("synth");
  doc["data"] = {{"high", (dir / "data" / "high.tsv").string()},
                 {"low", (dir / "data" / "low.tsv").string()},
                 {"labels", (dir / "data" / "labels.tsv").string()}};
  doc["repeats"] = 1;
  doc["baselines"] = false;
  const auto cfg2 = write_config(dir, doc);
  const CliResult r = cli({"run-all", "--config", cfg2.string(), "--out-dir", (dir / "run").string()});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "run" / "topk.tsv"));
}

}  // namespace
}  // namespace cleit
