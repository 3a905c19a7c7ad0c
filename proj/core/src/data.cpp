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

#include "cleit/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "cleit/error.hpp"
#include "cleit/rng.hpp"

namespace cleit {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

struct RawTable {
  std::vector<std::string> columns;
  std::vector<std::string> ids;
  Matrix values;
  Matrix mask;  // 0 where the cell was NA
};

RawTable read_table(const fs::path& path, bool allow_na) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path.string() + ": empty file");
  auto header = split_tabs(strip_cr(line));
  if (header.empty() || header.front() != "sample_id") {
    throw ParseError(path.string() + ": row 1 column 1: expected header 'sample_id'");
  }
  RawTable t;
  t.columns.assign(header.begin() + 1, header.end());
  const std::size_t width = t.columns.size();

  std::vector<std::vector<Real>> rows;
  std::vector<std::vector<Real>> masks;
  std::unordered_set<std::string> seen;
  std::size_t row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    auto cells = split_tabs(line);
    if (cells.size() != width + 1) {
      throw ParseError(path.string() + ": row " + std::to_string(row_no) + ": expected " +
                       std::to_string(width + 1) + " cells, found " + std::to_string(cells.size()));
    }
    if (!seen.insert(cells[0]).second) {
      throw ParseError(path.string() + ": row " + std::to_string(row_no) + ": duplicate sample id '" +
                       cells[0] + "'");
    }
    std::vector<Real> vals(width, 0.0);
    std::vector<Real> mk(width, 1.0);
    for (std::size_t c = 0; c < width; ++c) {
      const std::string& cell = cells[c + 1];
      if (allow_na && cell == "NA") {
        mk[c] = 0.0;
        continue;
      }
      double v = 0.0;
      const char* first = cell.data();
      const char* last = cell.data() + cell.size();
      auto [ptr, ec] = std::from_chars(first, last, v);
      if (ec != std::errc() || ptr != last || cell.empty() || !std::isfinite(v)) {
        throw ParseError(path.string() + ": row " + std::to_string(row_no) + " column " +
                         std::to_string(c + 2) + ": non-numeric cell '" + cell + "'");
      }
      vals[c] = v;
    }
    t.ids.push_back(cells[0]);
    rows.push_back(std::move(vals));
    masks.push_back(std::move(mk));
  }
  t.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(width));
  t.mask.resize(static_cast<Index>(rows.size()), static_cast<Index>(width));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      t.values(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
      t.mask(static_cast<Index>(r), static_cast<Index>(c)) = masks[r][c];
    }
  }
  return t;
}

Matrix take_rows(const Matrix& m, const std::vector<Index>& rows) {
  Matrix out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = m.row(rows[i]);
  return out;
}

// Cells are stored at float32 precision; %.9g round-trips a float exactly.
std::string format_cell(Real v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(static_cast<float>(v)));
  return buf;
}

}  // namespace

DomainDataset DomainDataset::subset(const std::vector<Index>& rows) const {
  DomainDataset out;
  out.feature_names = feature_names;
  out.task_names = task_names;
  out.features = take_rows(features, rows);
  for (Index r : rows) out.sample_ids.push_back(sample_ids[static_cast<std::size_t>(r)]);
  if (labels) {
    out.labels = take_rows(*labels, rows);
    out.label_mask = take_rows(*label_mask, rows);
  }
  return out;
}

DomainDataset DomainDataset::labeled_rows() const {
  if (!labels) return subset({});
  std::vector<Index> keep;
  for (Index i = 0; i < size(); ++i) {
    if (label_mask->row(i).sum() >= 1.0) keep.push_back(i);
  }
  return subset(keep);
}

void DomainDataset::validate() const {
  if (static_cast<Index>(sample_ids.size()) != features.rows()) {
    throw DataError("dataset: sample id count differs from feature rows");
  }
  if (!feature_names.empty() && static_cast<Index>(feature_names.size()) != features.cols()) {
    throw DataError("dataset: feature name count differs from feature columns");
  }
  std::unordered_set<std::string> seen;
  for (const auto& id : sample_ids) {
    if (!seen.insert(id).second) throw DataError("dataset: duplicate sample id '" + id + "'");
  }
  if (labels.has_value() != label_mask.has_value()) {
    throw DataError("dataset: labels and label mask must be present together");
  }
  if (labels && (labels->rows() != features.rows() || label_mask->rows() != features.rows() ||
                 labels->cols() != label_mask->cols())) {
    throw DataError("dataset: label shape inconsistent with features");
  }
}

PairedDataset PairedDataset::subset(const std::vector<Index>& rows) const {
  PairedDataset out;
  out.high = take_rows(high, rows);
  out.low = take_rows(low, rows);
  for (Index r : rows) out.sample_ids.push_back(sample_ids[static_cast<std::size_t>(r)]);
  if (labels) {
    out.labels = take_rows(*labels, rows);
    out.label_mask = take_rows(*label_mask, rows);
  }
  return out;
}

DomainDataset load_matrix(const fs::path& path, const std::optional<fs::path>& label_path) {
  RawTable feats = read_table(path, false);
  DomainDataset ds;
  ds.sample_ids = std::move(feats.ids);
  ds.feature_names = std::move(feats.columns);
  ds.features = std::move(feats.values);
  if (label_path) {
    RawTable lab = read_table(*label_path, true);
    std::unordered_map<std::string, Index> index;
    for (std::size_t i = 0; i < lab.ids.size(); ++i) index[lab.ids[i]] = static_cast<Index>(i);
    const Index k = static_cast<Index>(lab.columns.size());
    Matrix y = Matrix::Zero(ds.size(), k);
    Matrix mask = Matrix::Zero(ds.size(), k);
    for (Index r = 0; r < ds.size(); ++r) {
      auto it = index.find(ds.sample_ids[static_cast<std::size_t>(r)]);
      if (it == index.end()) continue;
      mask.row(r) = lab.mask.row(it->second);
      y.row(r) = lab.values.row(it->second).cwiseProduct(mask.row(r));
    }
    ds.labels = std::move(y);
    ds.label_mask = std::move(mask);
    ds.task_names = std::move(lab.columns);
  }
  ds.validate();
  return ds;
}

void write_matrix(const fs::path& path, const std::vector<std::string>& ids,
                  const std::vector<std::string>& columns, const Matrix& values, const Matrix* mask) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << "sample_id";
  for (const auto& c : columns) out << '\t' << c;
  out << '\n';
  for (Index r = 0; r < values.rows(); ++r) {
    out << ids[static_cast<std::size_t>(r)];
    for (Index c = 0; c < values.cols(); ++c) {
      out << '\t';
      if (mask != nullptr && (*mask)(r, c) == 0.0) {
        out << "NA";
      } else {
        out << format_cell(values(r, c));
      }
    }
    out << '\n';
  }
}

void write_features(const fs::path& path, const DomainDataset& ds) {
  write_matrix(path, ds.sample_ids, ds.feature_names, ds.features);
}

void write_labels(const fs::path& path, const DomainDataset& ds) {
  if (!ds.labels) throw DataError("write_labels: dataset has no labels");
  write_matrix(path, ds.sample_ids, ds.task_names, *ds.labels, &*ds.label_mask);
}

PairedDataset pair_domains(const DomainDataset& high, const DomainDataset& low) {
  std::unordered_map<std::string, Index> low_index;
  for (std::size_t i = 0; i < low.sample_ids.size(); ++i) {
    low_index[low.sample_ids[i]] = static_cast<Index>(i);
  }
  std::vector<Index> hi_rows, lo_rows;
  PairedDataset out;
  for (std::size_t i = 0; i < high.sample_ids.size(); ++i) {
    auto it = low_index.find(high.sample_ids[i]);
    if (it == low_index.end()) continue;
    hi_rows.push_back(static_cast<Index>(i));
    lo_rows.push_back(it->second);
    out.sample_ids.push_back(high.sample_ids[i]);
  }
  if (out.sample_ids.empty()) throw DataError("pair_domains: no sample ids in common");
  out.high = take_rows(high.features, hi_rows);
  out.low = take_rows(low.features, lo_rows);
  if (high.labels) {
    out.labels = take_rows(*high.labels, hi_rows);
    out.label_mask = take_rows(*high.label_mask, hi_rows);
  } else if (low.labels) {
    out.labels = take_rows(*low.labels, lo_rows);
    out.label_mask = take_rows(*low.label_mask, lo_rows);
  }
  return out;
}

std::pair<std::vector<Index>, std::vector<Index>> split_indices(Index n, double train_frac,
                                                                std::uint64_t seed) {
  if (!(train_frac > 0.0 && train_frac < 1.0)) {
    throw ConfigError("split: train fraction must lie in (0, 1)");
  }
  if (n < 2) throw DataError("split: need at least 2 samples");
  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  Rng rng(seed);
  rng.shuffle(order);
  Index n_train = static_cast<Index>(std::llround(static_cast<double>(n) * train_frac));
  n_train = std::clamp<Index>(n_train, 1, n - 1);
  std::vector<Index> train(order.begin(), order.begin() + n_train);
  std::vector<Index> val(order.begin() + n_train, order.end());
  std::sort(train.begin(), train.end());
  std::sort(val.begin(), val.end());
  return {train, val};
}

std::pair<DomainDataset, DomainDataset> split(const DomainDataset& ds, double train_frac,
                                              std::uint64_t seed) {
  auto [train, val] = split_indices(ds.size(), train_frac, seed);
  return {ds.subset(train), ds.subset(val)};
}

Standardizer Standardizer::fit(const Matrix& train) {
  if (train.rows() == 0) throw DataError("standardizer: empty training matrix");
  Standardizer s;
  s.mean = train.colwise().mean();
  const Matrix centered = train.rowwise() - s.mean;
  s.scale = (centered.array().square().colwise().mean()).sqrt().matrix();
  for (Index c = 0; c < s.scale.size(); ++c) {
    if (!(s.scale(c) > 1e-12)) s.scale(c) = 1.0;
  }
  return s;
}

Matrix Standardizer::apply(const Matrix& x) const {
  if (x.cols() != mean.cols()) throw DimensionError("standardizer: width mismatch");
  Matrix out = x.rowwise() - mean;
  return out.array().rowwise() / scale.array();
}

// --------------------------------------------------------------- synthetic

void SynthSpec::validate() const {
  if (latent_rank < 1 || high_width < 1 || low_width < 1 || tasks < 1 || label_hidden < 1) {
    throw ConfigError("synth: ranks, widths and task count must be positive");
  }
  if (!(high_noise >= 0 && low_noise >= 0)) throw ConfigError("synth: noise scales must be non-negative");
  if (!(high_noise < low_noise)) {
    throw ConfigError("synth: high_noise must be smaller than low_noise");
  }
  if (!(na_rate >= 0.0 && na_rate < 1.0)) throw ConfigError("synth: na_rate must lie in [0, 1)");
  if (!(low_active_fraction > 0.0 && low_active_fraction < 1.0)) {
    throw ConfigError("synth: low_active_fraction must lie in (0, 1)");
  }
  if (unlabeled < 0 || labeled < 2 || test < 1) {
    throw ConfigError("synth: need unlabeled >= 0, labeled >= 2 and test >= 1 samples");
  }
}

json to_json(const SynthSpec& s) {
  return {{"latent_rank", s.latent_rank},   {"high_width", s.high_width},
          {"low_width", s.low_width},       {"tasks", s.tasks},
          {"label_hidden", s.label_hidden}, {"label_scale", s.label_scale},
          {"high_noise", s.high_noise},     {"low_noise", s.low_noise},
          {"na_rate", s.na_rate},           {"binarize_low", s.binarize_low},
          {"low_active_fraction", s.low_active_fraction},
          {"unlabeled", s.unlabeled},       {"labeled", s.labeled},
          {"test", s.test},                 {"seed", s.seed}};
}

SynthSpec synth_spec_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("synth spec must be a JSON object");
  static const std::unordered_set<std::string> known{
      "latent_rank", "high_width", "low_width", "tasks",     "label_hidden", "label_scale",
      "high_noise",  "low_noise",  "na_rate",   "binarize_low", "low_active_fraction",
      "unlabeled",   "labeled",    "test",      "seed"};
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) throw ConfigError("synth: unknown field '" + key + "'");
  }
  SynthSpec s;
  try {
    s.latent_rank = j.value("latent_rank", s.latent_rank);
    s.high_width = j.value("high_width", s.high_width);
    s.low_width = j.value("low_width", s.low_width);
    s.tasks = j.value("tasks", s.tasks);
    s.label_hidden = j.value("label_hidden", s.label_hidden);
    s.label_scale = j.value("label_scale", s.label_scale);
    s.high_noise = j.value("high_noise", s.high_noise);
    s.low_noise = j.value("low_noise", s.low_noise);
    s.na_rate = j.value("na_rate", s.na_rate);
    s.binarize_low = j.value("binarize_low", s.binarize_low);
    s.low_active_fraction = j.value("low_active_fraction", s.low_active_fraction);
    s.unlabeled = j.value("unlabeled", s.unlabeled);
    s.labeled = j.value("labeled", s.labeled);
    s.test = j.value("test", s.test);
    s.seed = j.value("seed", s.seed);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("synth: ") + e.what());
  }
  s.validate();
  return s;
}

namespace {

// Upper-tail standard normal quantile via bisection on erfc.
Real normal_upper_quantile(Real tail) {
  Real lo = -10.0, hi = 10.0;
  for (int i = 0; i < 200; ++i) {
    const Real mid = 0.5 * (lo + hi);
    const Real upper = 0.5 * std::erfc(mid / std::sqrt(2.0));
    if (upper > tail) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

std::vector<std::string> numbered(const std::string& prefix, Index n) {
  std::vector<std::string> out;
  char buf[32];
  for (Index i = 0; i < n; ++i) {
    std::snprintf(buf, sizeof buf, "%s%05lld", prefix.c_str(), static_cast<long long>(i));
    out.emplace_back(buf);
  }
  return out;
}

}  // namespace

SynthData synthesize(const SynthSpec& spec) {
  spec.validate();
  Rng root(spec.seed);
  Rng weights = root.fork("synth.weights");
  Rng samples = root.fork("synth.samples");
  Rng noise = root.fork("synth.noise");
  Rng missing = root.fork("synth.missing");

  const Real rank_scale = 1.0 / std::sqrt(static_cast<Real>(spec.latent_rank));
  const Matrix a = weights.normal_matrix(spec.high_width, spec.latent_rank, rank_scale);
  const Matrix b = weights.normal_matrix(spec.low_width, spec.latent_rank, rank_scale);
  const Matrix d = weights.normal_matrix(spec.label_hidden, spec.latent_rank, rank_scale);
  const Matrix c = weights.normal_matrix(
      spec.tasks, spec.label_hidden, spec.label_scale / std::sqrt(static_cast<Real>(spec.label_hidden)));

  const Index total = spec.unlabeled + spec.labeled + spec.test;
  const Matrix t = samples.normal_matrix(total, spec.latent_rank);

  Matrix high = t * a.transpose();
  if (spec.high_noise > 0) high += noise.normal_matrix(total, spec.high_width, spec.high_noise);
  Matrix low = t * b.transpose();
  if (spec.low_noise > 0) low += noise.normal_matrix(total, spec.low_width, spec.low_noise);
  if (spec.binarize_low) {
    // Threshold each column at its upper quantile so ~low_active_fraction are 1.
    const Real q = normal_upper_quantile(spec.low_active_fraction);
    for (Index col = 0; col < spec.low_width; ++col) {
      const Real sd = std::sqrt(b.row(col).squaredNorm() + spec.low_noise * spec.low_noise);
      for (Index r = 0; r < total; ++r) low(r, col) = low(r, col) > q * sd ? 1.0 : 0.0;
    }
  }

  Matrix logits = (t * d.transpose()).array().tanh().matrix() * c.transpose();
  Matrix scores = (1.0 / (1.0 + (-logits.array()).exp())).matrix();

  Matrix mask = Matrix::Ones(total, spec.tasks);
  for (Index r = 0; r < total; ++r) {
    for (Index k = 0; k < spec.tasks; ++k) {
      if (missing.bernoulli(spec.na_rate)) mask(r, k) = 0.0;
    }
    if (mask.row(r).sum() < 1.0) mask(r, static_cast<Index>(missing.uniform_index(spec.tasks))) = 1.0;
  }

  SynthData out;
  out.truth = {t, a, b, scores};

  auto ids_u = numbered("u", spec.unlabeled);
  auto ids_l = numbered("l", spec.labeled);
  auto ids_t = numbered("t", spec.test);
  auto fh = numbered("h", spec.high_width);
  auto fl = numbered("m", spec.low_width);
  auto tasks = numbered("drug", spec.tasks);

  const Index both = spec.unlabeled + spec.labeled;
  std::vector<std::string> ids(ids_u);
  ids.insert(ids.end(), ids_l.begin(), ids_l.end());

  Matrix lab = Matrix::Zero(both, spec.tasks);
  Matrix lab_mask = Matrix::Zero(both, spec.tasks);
  lab.bottomRows(spec.labeled) =
      scores.middleRows(spec.unlabeled, spec.labeled).cwiseProduct(mask.middleRows(spec.unlabeled, spec.labeled));
  lab_mask.bottomRows(spec.labeled) = mask.middleRows(spec.unlabeled, spec.labeled);

  out.high.sample_ids = ids;
  out.high.feature_names = fh;
  out.high.features = high.topRows(both);
  out.high.labels = lab;
  out.high.label_mask = lab_mask;
  out.high.task_names = tasks;

  out.low.sample_ids = ids;
  out.low.feature_names = fl;
  out.low.features = low.topRows(both);
  out.low.labels = lab;
  out.low.label_mask = lab_mask;
  out.low.task_names = tasks;

  out.paired = pair_domains(out.high, out.low);

  out.test.sample_ids = ids_t;
  out.test.feature_names = fl;
  out.test.features = low.bottomRows(spec.test);
  out.test.labels = scores.bottomRows(spec.test).cwiseProduct(mask.bottomRows(spec.test));
  out.test.label_mask = mask.bottomRows(spec.test);
  out.test.task_names = tasks;
  return out;
}

}  // namespace cleit
