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

#ifndef CLEIT_CONFIG_HPP
#define CLEIT_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "cleit/data.hpp"
#include "cleit/models.hpp"
#include "cleit/pipeline.hpp"

namespace cleit {

/// Real-data inputs. `low` may contain samples absent from `high`; those
/// with labels form the test set.
struct DataPaths {
  std::filesystem::path high;
  std::filesystem::path low;
  std::filesystem::path labels;
};

struct RunConfig {
  std::uint64_t seed = 0;
  std::string out_dir = "cleit_run";
  int repeats = 3;
  Real train_fraction = 0.9;
  bool standardize = true;
  // Also evaluate the VAE+MLP (lambda = 0) and plain MLP baselines in run-all.
  bool baselines = true;

  ClrKind loss = ClrKind::contrastive;
  Real lambda = 0.8;
  bool transmitter = true;

  // Exactly one source; an empty document means synthetic data.
  std::optional<SynthSpec> synth;
  std::optional<DataPaths> data;

  ModelConfig model;
  TrainPlan pretrain_high = TrainPlan::defaults(Phase::pretrain_high);
  TrainPlan finetune_high = TrainPlan::defaults(Phase::finetune_high);
  TrainPlan pretrain_low = TrainPlan::defaults(Phase::pretrain_low);
  TrainPlan finetune_low = TrainPlan::defaults(Phase::finetune_low);

  const TrainPlan& plan(Phase phase) const;
  TrainPlan& plan(Phase phase);

  // Re-checks invariants after programmatic edits (e.g. CLI overrides).
  void validate() const;
};

/// Fully defaulted, validated config. Unknown keys and out-of-range values
/// raise ConfigError naming the field.
RunConfig validate_config(const nlohmann::json& doc);
RunConfig validate_config(const std::filesystem::path& path);

/// Effective config; validate_config(to_json(c)) reproduces c.
nlohmann::json to_json(const RunConfig& config);
nlohmann::json to_json(const TrainPlan& plan);

}  // namespace cleit

#endif  // CLEIT_CONFIG_HPP
