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

#ifndef CLEIT_EVAL_HPP
#define CLEIT_EVAL_HPP

#include <map>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "cleit/tensor.hpp"

namespace cleit {

// std::nullopt marks an undefined metric (too few observed entries or zero
// variance); such rows/columns are left out of the means.
std::optional<Real> masked_pearson(const Eigen::Ref<const ColVector>& a,
                                   const Eigen::Ref<const ColVector>& b,
                                   const Eigen::Ref<const ColVector>& mask);
std::optional<Real> masked_rmse(const Eigen::Ref<const ColVector>& a,
                                const Eigen::Ref<const ColVector>& b,
                                const Eigen::Ref<const ColVector>& mask);

/// Fraction of the k most sensitive (smallest) observed ground-truth scores
/// that are also among the k smallest predictions. Ties go to the lower
/// index. nullopt when fewer than k entries are observed.
std::optional<Real> topk_precision(const Eigen::Ref<const ColVector>& truth,
                                   const Eigen::Ref<const ColVector>& predicted,
                                   const Eigen::Ref<const ColVector>& mask, Index k);

struct MetricVector {
  std::vector<std::optional<Real>> values;
  Real mean = 0.0;     // over defined entries; NaN when none are defined
  Index excluded = 0;  // undefined entries
};

/// Drug-wise (per column) and sample-wise (per row) metrics of a prediction
/// matrix, plus mean top-k precision over rows.
struct EvalReport {
  MetricVector drug_pearson;
  MetricVector drug_rmse;
  MetricVector sample_pearson;
  MetricVector sample_rmse;
  std::map<Index, Real> topk_precision;
  std::map<Index, Index> topk_excluded;

  Real drugwise_pearson_mean() const { return drug_pearson.mean; }
  Real drugwise_rmse_mean() const { return drug_rmse.mean; }
  Real samplewise_pearson_mean() const { return sample_pearson.mean; }
  Real samplewise_rmse_mean() const { return sample_rmse.mean; }
};

inline const std::vector<Index> kDefaultTopK{1, 3, 5, 10};

EvalReport matrix_report(const Matrix& truth, const Matrix& predicted, const Matrix& mask,
                         const std::vector<Index>& topk = kDefaultTopK);

/// Element-wise mean of the scalar summaries over several reports
/// (per-vector entries are not averaged).
EvalReport average_reports(const std::vector<EvalReport>& reports);

nlohmann::json to_json(const EvalReport& report);

}  // namespace cleit

#endif  // CLEIT_EVAL_HPP
