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

#ifndef CLEIT_DATA_HPP
#define CLEIT_DATA_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "cleit/tensor.hpp"

namespace cleit {

/// Feature matrix of one domain plus optional masked labels.
struct DomainDataset {
  std::vector<std::string> sample_ids;
  std::vector<std::string> feature_names;
  Matrix features;
  // Present together or not at all. NA cells hold 0 with mask 0.
  std::optional<Matrix> labels;
  std::optional<Matrix> label_mask;
  std::vector<std::string> task_names;

  Index size() const { return features.rows(); }
  Index width() const { return features.cols(); }
  bool has_labels() const { return labels.has_value(); }

  DomainDataset subset(const std::vector<Index>& rows) const;
  // Rows with at least one observed label.
  DomainDataset labeled_rows() const;
  void validate() const;
};

/// Row-aligned samples observed in both domains.
struct PairedDataset {
  std::vector<std::string> sample_ids;
  Matrix high;
  Matrix low;
  std::optional<Matrix> labels;
  std::optional<Matrix> label_mask;

  Index size() const { return high.rows(); }
  PairedDataset subset(const std::vector<Index>& rows) const;
};

/// Reads a tab-separated matrix: header `sample_id<TAB>name...`, one sample
/// per line. When `label_path` is given, labels are joined by sample id;
/// "NA" cells (and samples absent from the label file) are masked out.
DomainDataset load_matrix(const std::filesystem::path& path,
                          const std::optional<std::filesystem::path>& label_path = std::nullopt);

void write_matrix(const std::filesystem::path& path, const std::vector<std::string>& ids,
                  const std::vector<std::string>& columns, const Matrix& values,
                  const Matrix* mask = nullptr);
void write_features(const std::filesystem::path& path, const DomainDataset& ds);
void write_labels(const std::filesystem::path& path, const DomainDataset& ds);

/// Inner join on sample id in `high` order; labels come from `high` when
/// present, else from `low`. Throws DataError on an empty intersection.
PairedDataset pair_domains(const DomainDataset& high, const DomainDataset& low);

/// Seeded, disjoint, exhaustive split by sample; the first part gets
/// round(n * train_frac) samples, clamped to [1, n - 1].
std::pair<DomainDataset, DomainDataset> split(const DomainDataset& ds, double train_frac,
                                              std::uint64_t seed);
std::pair<std::vector<Index>, std::vector<Index>> split_indices(Index n, double train_frac,
                                                                std::uint64_t seed);

/// Per-column z-scoring with statistics from a training matrix. Constant
/// columns get unit scale.
struct Standardizer {
  RowVector mean;
  RowVector scale;

  static Standardizer fit(const Matrix& train);
  Matrix apply(const Matrix& x) const;
};

struct SynthSpec {
  Index latent_rank = 8;
  Index high_width = 100;
  Index low_width = 100;
  Index tasks = 20;
  Index label_hidden = 16;
  Real label_scale = 2.0;
  Real high_noise = 0.3;
  Real low_noise = 1.0;
  Real na_rate = 0.1;
  bool binarize_low = true;
  Real low_active_fraction = 0.05;
  Index unlabeled = 2000;
  Index labeled = 500;
  Index test = 200;
  std::uint64_t seed = 0;

  void validate() const;
};

nlohmann::json to_json(const SynthSpec& spec);
SynthSpec synth_spec_from_json(const nlohmann::json& j);

/// Generator state exposed for tests.
struct SynthTruth {
  Matrix latent;        // all samples, unlabeled then labeled then test
  Matrix high_loading;  // high_width x latent_rank
  Matrix low_loading;
  Matrix labels;        // noise-free scores for every sample
};

struct SynthData {
  DomainDataset high;     // unlabeled + labeled samples
  DomainDataset low;      // same samples as `high`
  PairedDataset paired;
  DomainDataset test;     // labeled, low domain only
  SynthTruth truth;
};

/// Two hierarchically related domains driven by a shared latent factor:
/// high = A t + noise, low = binarized(B t + larger noise), labels =
/// sigmoid(C tanh(D t)) with NA masking.
SynthData synthesize(const SynthSpec& spec);

}  // namespace cleit

#endif  // CLEIT_DATA_HPP
