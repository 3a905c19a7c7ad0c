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

#include "cleit/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cleit/error.hpp"

namespace cleit {
using nlohmann::json;

namespace {

void require_same_length(const ColVector& a, const ColVector& b, const ColVector& m) {
  if (a.size() != b.size() || a.size() != m.size()) {
    throw DimensionError("metric: vector and mask lengths differ");
  }
}

MetricVector summarize(std::vector<std::optional<Real>> values) {
  MetricVector out;
  Real sum = 0.0;
  Index defined = 0;
  for (const auto& v : values) {
    if (v) {
      sum += *v;
      ++defined;
    } else {
      ++out.excluded;
    }
  }
  out.mean = defined > 0 ? sum / static_cast<Real>(defined) : std::numeric_limits<Real>::quiet_NaN();
  out.values = std::move(values);
  return out;
}

// Indices of the k smallest observed entries; ties to the lower index.
std::vector<Index> smallest_k(const ColVector& v, const ColVector& mask, Index k) {
  std::vector<Index> idx;
  for (Index i = 0; i < v.size(); ++i) {
    if (mask(i) != 0.0) idx.push_back(i);
  }
  std::stable_sort(idx.begin(), idx.end(), [&v](Index a, Index b) { return v(a) < v(b); });
  idx.resize(static_cast<std::size_t>(k));
  std::sort(idx.begin(), idx.end());
  return idx;
}

json metric_json(const MetricVector& m) {
  json values = json::array();
  for (const auto& v : m.values) values.push_back(v ? json(*v) : json(nullptr));
  return {{"mean", std::isnan(m.mean) ? json(nullptr) : json(m.mean)},
          {"excluded", m.excluded},
          {"values", values}};
}

}  // namespace

std::optional<Real> masked_pearson(const Eigen::Ref<const ColVector>& a,
                                   const Eigen::Ref<const ColVector>& b,
                                   const Eigen::Ref<const ColVector>& mask) {
  require_same_length(a, b, mask);
  Real n = 0, sa = 0, sb = 0;
  for (Index i = 0; i < a.size(); ++i) {
    if (mask(i) == 0.0) continue;
    n += 1;
    sa += a(i);
    sb += b(i);
  }
  if (n < 2) return std::nullopt;
  const Real ma = sa / n, mb = sb / n;
  Real cov = 0, va = 0, vb = 0;
  for (Index i = 0; i < a.size(); ++i) {
    if (mask(i) == 0.0) continue;
    const Real da = a(i) - ma, db = b(i) - mb;
    cov += da * db;
    va += da * da;
    vb += db * db;
  }
  if (!(va > 0) || !(vb > 0)) return std::nullopt;
  return std::clamp(cov / std::sqrt(va * vb), -1.0, 1.0);
}

std::optional<Real> masked_rmse(const Eigen::Ref<const ColVector>& a,
                                const Eigen::Ref<const ColVector>& b,
                                const Eigen::Ref<const ColVector>& mask) {
  require_same_length(a, b, mask);
  Real n = 0, acc = 0;
  for (Index i = 0; i < a.size(); ++i) {
    if (mask(i) == 0.0) continue;
    n += 1;
    acc += (a(i) - b(i)) * (a(i) - b(i));
  }
  if (n < 1) return std::nullopt;
  return std::sqrt(acc / n);
}

std::optional<Real> topk_precision(const Eigen::Ref<const ColVector>& truth,
                                   const Eigen::Ref<const ColVector>& predicted,
                                   const Eigen::Ref<const ColVector>& mask, Index k) {
  require_same_length(truth, predicted, mask);
  if (k < 1) throw PreconditionError("topk_precision: k must be positive");
  if ((mask.array() != 0.0).count() < k) return std::nullopt;
  const auto by_truth = smallest_k(truth, mask, k);
  const auto by_pred = smallest_k(predicted, mask, k);
  std::vector<Index> common;
  std::set_intersection(by_truth.begin(), by_truth.end(), by_pred.begin(), by_pred.end(),
                        std::back_inserter(common));
  return static_cast<Real>(common.size()) / static_cast<Real>(k);
}

EvalReport matrix_report(const Matrix& truth, const Matrix& predicted, const Matrix& mask,
                         const std::vector<Index>& topk) {
  if (truth.rows() != predicted.rows() || truth.cols() != predicted.cols() ||
      truth.rows() != mask.rows() || truth.cols() != mask.cols()) {
    throw DimensionError("matrix_report: truth, prediction and mask shapes differ");
  }
  std::vector<std::optional<Real>> cp, cr, rp, rr;
  for (Index c = 0; c < truth.cols(); ++c) {
    const ColVector y = truth.col(c), p = predicted.col(c), m = mask.col(c);
    cp.push_back(masked_pearson(y, p, m));
    cr.push_back(masked_rmse(y, p, m));
  }
  for (Index r = 0; r < truth.rows(); ++r) {
    const ColVector y = truth.row(r).transpose(), p = predicted.row(r).transpose(),
                    m = mask.row(r).transpose();
    rp.push_back(masked_pearson(y, p, m));
    rr.push_back(masked_rmse(y, p, m));
  }
  EvalReport report;
  report.drug_pearson = summarize(std::move(cp));
  report.drug_rmse = summarize(std::move(cr));
  report.sample_pearson = summarize(std::move(rp));
  report.sample_rmse = summarize(std::move(rr));
  for (Index k : topk) {
    std::vector<std::optional<Real>> per_row;
    for (Index r = 0; r < truth.rows(); ++r) {
      per_row.push_back(topk_precision(truth.row(r).transpose(), predicted.row(r).transpose(),
                                       mask.row(r).transpose(), k));
    }
    const MetricVector s = summarize(std::move(per_row));
    report.topk_precision[k] = s.mean;
    report.topk_excluded[k] = s.excluded;
  }
  return report;
}

EvalReport average_reports(const std::vector<EvalReport>& reports) {
  if (reports.empty()) throw PreconditionError("average_reports: no reports");
  EvalReport out = reports.front();
  auto avg = [&reports](auto getter) {
    Real s = 0;
    for (const auto& r : reports) s += getter(r);
    return s / static_cast<Real>(reports.size());
  };
  out.drug_pearson.mean = avg([](const EvalReport& r) { return r.drug_pearson.mean; });
  out.drug_rmse.mean = avg([](const EvalReport& r) { return r.drug_rmse.mean; });
  out.sample_pearson.mean = avg([](const EvalReport& r) { return r.sample_pearson.mean; });
  out.sample_rmse.mean = avg([](const EvalReport& r) { return r.sample_rmse.mean; });
  for (auto& [k, v] : out.topk_precision) {
    v = avg([k](const EvalReport& r) { return r.topk_precision.at(k); });
  }
  return out;
}

json to_json(const EvalReport& r) {
  json topk = json::object();
  json topk_ex = json::object();
  for (const auto& [k, v] : r.topk_precision) {
    topk[std::to_string(k)] = std::isnan(v) ? json(nullptr) : json(v);
  }
  for (const auto& [k, v] : r.topk_excluded) topk_ex[std::to_string(k)] = v;
  auto num = [](Real v) { return std::isnan(v) ? json(nullptr) : json(v); };
  return {{"drugwise_pearson_mean", num(r.drug_pearson.mean)},
          {"drugwise_rmse_mean", num(r.drug_rmse.mean)},
          {"samplewise_pearson_mean", num(r.sample_pearson.mean)},
          {"samplewise_rmse_mean", num(r.sample_rmse.mean)},
          {"drugwise_pearson", metric_json(r.drug_pearson)},
          {"drugwise_rmse", metric_json(r.drug_rmse)},
          {"samplewise_pearson", metric_json(r.sample_pearson)},
          {"samplewise_rmse", metric_json(r.sample_rmse)},
          {"topk_precision", topk},
          {"topk_excluded", topk_ex}};
}

}  // namespace cleit
