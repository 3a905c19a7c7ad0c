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

#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cleit/config.hpp"
#include "cleit/error.hpp"
#include "cleit/run.hpp"

namespace cleit::cli {
namespace {
using nlohmann::json;

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string loss;
  std::optional<double> lambda;
  bool no_transmitter = false;
  std::optional<int> repeats;
  bool synth = false;
};

json load_document(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("malformed config " + path + ": " + e.what());
  }
}

RunConfig build_config(const Overrides& o) {
  json doc = load_document(o.config);
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  if (o.seed) doc["seed"] = *o.seed;
  if (!o.out_dir.empty()) doc["out_dir"] = o.out_dir;
  if (!o.loss.empty()) doc["loss"] = o.loss;
  if (o.lambda) doc["lambda"] = *o.lambda;
  if (o.no_transmitter) doc["transmitter"] = false;
  if (o.repeats) doc["repeats"] = *o.repeats;
  if (o.synth) {
    doc.erase("data");
    if (!doc.contains("synth")) doc["synth"] = json::object();
  }
  return validate_config(doc);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<bool> parse_transmitter_list(const std::string& text) {
  std::vector<bool> out;
  for (const auto& s : split_list(text)) {
    if (s == "on") {
      out.push_back(true);
    } else if (s == "off") {
      out.push_back(false);
    } else {
      throw ConfigError("--transmitter: expected on/off, got '" + s + "'");
    }
  }
  if (out.empty()) throw ConfigError("--transmitter: empty list");
  return out;
}

void print_summary(std::ostream& out, const std::vector<VariantOutcome>& outcomes) {
  char buf[200];
  for (const auto& o : outcomes) {
    std::snprintf(buf, sizeof buf, "%-24s sample-wise pearson %.4f  drug-wise pearson %.4f",
                  o.variant.name.c_str(), o.mean.samplewise_pearson_mean(),
                  o.mean.drugwise_pearson_mean());
    out << buf << '\n';
  }
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cross-level information transmission for low-domain prediction", "cleit"};
  app.require_subcommand(1);
  app.fallthrough();

  Overrides o;
  app.add_option("--config", o.config, "JSON run config")->check(CLI::ExistingFile);
  app.add_option("--seed", o.seed, "Run seed");
  app.add_option("--out-dir", o.out_dir, "Run directory");
  app.add_option("--loss", o.loss, "Cross-level loss: contrastive, mmd, wgan or none");
  app.add_option("--lambda", o.lambda, "Weight of the cross-level loss, in [0, 1]");
  app.add_flag("--no-transmitter", o.no_transmitter, "Use the identity instead of a transmitter");
  app.add_option("--repeats", o.repeats, "Low-domain fine-tuning repeats");
  app.add_flag("--synth", o.synth, "Use the synthetic generator as the data source");

  auto* synth = app.add_subcommand("synth", "Write a synthetic corpus as TSV files");
  auto* pretrain_high = app.add_subcommand("pretrain-high", "Step 1: high-domain VAE");
  auto* finetune_high = app.add_subcommand("finetune-high", "Step 2: high-domain regressor");
  auto* pretrain_low = app.add_subcommand("pretrain-low", "Step 3: low-domain VAE with transmission");
  auto* finetune_low = app.add_subcommand("finetune-low", "Step 4: low-domain fine-tuning");
  auto* evaluate = app.add_subcommand("evaluate", "Evaluate the fine-tuned low-domain models");
  auto* run_all_cmd = app.add_subcommand("run-all", "Steps 1-4, baselines and evaluation");
  auto* ablate = app.add_subcommand("ablate", "Loss x transmitter ablation sweep");
  std::string losses = "contrastive,mmd,wgan,none";
  std::string transmitters = "on,off";
  ablate->add_option("--losses", losses, "Comma-separated loss kinds");
  ablate->add_option("--transmitter", transmitters, "Comma-separated on/off");

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kInvalid;
  }

  try {
    const RunConfig config = build_config(o);
    std::ostream* log = &err;

    if (synth->parsed()) {
      Runner runner(config, false, log);
      runner.write_config_snapshot();
      const SynthSpec spec = config.synth ? *config.synth : SynthSpec{};
      export_synth(spec, config.out_dir);
      out << "wrote synthetic corpus to " << config.out_dir << '\n';
      return kOk;
    }
    if (run_all_cmd->parsed()) {
      const auto outcomes = run_all(config, log);
      print_summary(out, outcomes);
      return kOk;
    }
    if (ablate->parsed()) {
      std::vector<ClrKind> kinds;
      for (const auto& s : split_list(losses)) {
        try {
          kinds.push_back(parse_clr_kind(s));
        } catch (const ConfigError& e) {
          throw ConfigError(std::string("--losses: ") + e.what());
        }
      }
      if (kinds.empty()) throw ConfigError("--losses: empty list");
      auto variants = ablation_variants(kinds, parse_transmitter_list(transmitters));
      for (auto& v : variants) v.lambda = config.lambda;
      Runner runner(config, true, log);
      runner.write_config_snapshot();
      const auto outcomes = runner.run_variants(variants);
      runner.write_reports(outcomes);
      print_summary(out, outcomes);
      return kOk;
    }

    Runner runner(config, false, log);
    runner.write_config_snapshot();
    const Variant variant = main_variant(config);
    if (pretrain_high->parsed()) {
      runner.pretrain_high();
    } else if (finetune_high->parsed()) {
      runner.finetune_high();
    } else if (pretrain_low->parsed()) {
      runner.pretrain_low(variant);
    } else if (finetune_low->parsed()) {
      runner.finetune_low(variant);
    } else if (evaluate->parsed()) {
      const std::vector<VariantOutcome> outcomes{runner.evaluate(variant)};
      runner.write_reports(outcomes);
      print_summary(out, outcomes);
    }
    return kOk;
  } catch (const PhaseError& e) {
    err << "error: phase " << e.what() << '\n';
    return kFailure;
  } catch (const MissingPhaseError& e) {
    err << "error: " << e.what() << '\n';
    return kInvalid;
  } catch (const ConfigError& e) {
    err << "error: invalid config: " << e.what() << '\n';
    return kInvalid;
  } catch (const DataError& e) {
    err << "error: invalid data: " << e.what() << '\n';
    return kInvalid;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
}

}  // namespace cleit::cli
