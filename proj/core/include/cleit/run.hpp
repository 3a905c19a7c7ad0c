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

#ifndef CLEIT_RUN_HPP
#define CLEIT_RUN_HPP

#include <filesystem>
#include <map>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cleit/config.hpp"
#include "cleit/eval.hpp"
#include "cleit/pipeline.hpp"

namespace cleit {

/// The data roles of the four phases, standardized.
struct Corpus {
  DomainDataset high_unlabeled;  // step 1 training
  DomainDataset high_labeled;    // step 1 validation, step 2 data
  LowPretrainData low_pretrain;  // step 3
  DomainDataset low_labeled;     // step 4 data (low features of labeled pairs)
  DomainDataset test;            // labeled samples observed in the low domain only
};

/// Splits loaded domains into phase roles. Low-domain samples absent from
/// `high` go to the test set when labeled and to the unlabeled pool
/// otherwise; `extra_test` (may be empty) is appended to the test set.
Corpus assemble_corpus(const DomainDataset& high, const DomainDataset& low,
                       const DomainDataset& extra_test, bool standardize);
Corpus prepare_corpus(const RunConfig& config);

/// One row of a comparison table.
struct Variant {
  std::string name;
  ClrKind loss = ClrKind::contrastive;
  Real lambda = 0.8;
  bool transmitter = true;
  // false: plain MLP trained from scratch on the low domain.
  bool pretrained = true;
};

nlohmann::json to_json(const Variant& v);

Variant main_variant(const RunConfig& config);
Variant vae_mlp_variant();
Variant mlp_variant();
/// Product of losses and transmitter settings, named "<loss>" or
/// "<loss>-identity".
std::vector<Variant> ablation_variants(const std::vector<ClrKind>& losses,
                                       const std::vector<bool>& transmitter);

struct VariantOutcome {
  Variant variant;
  std::vector<EvalReport> repeats;
  EvalReport mean;
};

/// Executes phases inside a run directory. A phase whose result.json
/// records the current config digest is loaded from its checkpoint instead
/// of being retrained, so interrupted runs resume at phase boundaries.
///
///   <out>/config.json
///   <out>/high/{pretrain_high,finetune_high}/
///   <out>/<variant>/pretrain_low/
///   <out>/<variant>/finetune_low/repeat_<r>/
///
/// Each phase directory holds checkpoint/, metrics.jsonl and result.json.
class Runner {
 public:
  // With `run_dependencies` false, a phase whose inputs are missing raises
  // MissingPhaseError instead of running them first.
  explicit Runner(RunConfig config, bool run_dependencies = true, std::ostream* log = nullptr);
  ~Runner();
  Runner(const Runner&) = delete;
  Runner& operator=(const Runner&) = delete;

  const RunConfig& config() const { return config_; }
  std::filesystem::path out_dir() const { return config_.out_dir; }

  void write_config_snapshot() const;
  const Corpus& corpus();

  // Each returns the phase's result.json record (freshly trained or resumed).
  nlohmann::json pretrain_high();
  nlohmann::json finetune_high();
  nlohmann::json pretrain_low(const Variant& variant);
  std::vector<nlohmann::json> finetune_low(const Variant& variant);
  VariantOutcome evaluate(const Variant& variant);

  std::vector<VariantOutcome> run_variants(const std::vector<Variant>& variants);

  /// eval_report.json, comparison.tsv, topk.tsv, per_drug.tsv, per_sample.tsv.
  void write_reports(const std::vector<VariantOutcome>& outcomes) const;

 private:
  struct State;
  RunConfig config_;
  bool run_dependencies_;
  std::ostream* log_;
  std::unique_ptr<State> state_;
};

/// run-all: the configured variant plus (optionally) both baselines.
std::vector<VariantOutcome> run_all(const RunConfig& config, std::ostream* log = nullptr);

/// Writes the synthetic corpus in the TSV interchange format:
/// high.tsv, low.tsv (including test samples), labels.tsv, synth_spec.json.
/// The files load back through a `data` config section.
void export_synth(const SynthSpec& spec, const std::filesystem::path& dir);

}  // namespace cleit

#endif  // CLEIT_RUN_HPP
