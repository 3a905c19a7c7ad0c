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

#include "cleit/run.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <functional>
#include <optional>
#include <unordered_map>

#include "cleit/checkpoint.hpp"
#include "cleit/error.hpp"

namespace cleit {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ------------------------------------------------------------- corpus

bool has_observed_label(const DomainDataset& ds, Index row) {
  return ds.has_labels() && ds.label_mask->row(row).sum() > 0;
}

DomainDataset append_rows(const DomainDataset& a, const DomainDataset& b) {
  if (b.size() == 0) return a;
  if (a.size() == 0) return b;
  if (a.width() != b.width()) throw DataError("test sets have different feature widths");
  DomainDataset out = a;
  out.sample_ids.insert(out.sample_ids.end(), b.sample_ids.begin(), b.sample_ids.end());
  out.features.resize(a.size() + b.size(), a.width());
  out.features << a.features, b.features;
  if (a.has_labels() && b.has_labels()) {
    out.labels = Matrix(out.size(), a.labels->cols());
    out.label_mask = Matrix(out.size(), a.labels->cols());
    *out.labels << *a.labels, *b.labels;
    *out.label_mask << *a.label_mask, *b.label_mask;
  }
  return out;
}

Standardizer fit_rows(const Matrix& x, const std::vector<Index>& preferred,
                      const std::vector<Index>& fallback) {
  const auto& rows = preferred.empty() ? fallback : preferred;
  Matrix m(static_cast<Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) m.row(static_cast<Index>(i)) = x.row(rows[i]);
  return Standardizer::fit(m);
}

// --------------------------------------------------------------- files

std::string digest(const json& j) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : j.dump()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out << text;
  }
  fs::rename(tmp, path);
}

std::optional<json> read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  try {
    return json::parse(in);
  } catch (const json::exception&) {
    return std::nullopt;
  }
}

std::string format_real(std::optional<Real> v) {
  if (!v || !std::isfinite(*v)) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", *v);
  return buf;
}

template <typename T>
std::vector<const Parameter*> as_const(const std::vector<T*>& params) {
  return {params.begin(), params.end()};
}

}  // namespace

Corpus assemble_corpus(const DomainDataset& high_in, const DomainDataset& low_in,
                       const DomainDataset& extra_test, bool standardize) {
  high_in.validate();
  low_in.validate();
  std::unordered_map<std::string, Index> in_high;
  for (Index i = 0; i < high_in.size(); ++i) in_high.emplace(high_in.sample_ids[static_cast<std::size_t>(i)], i);

  std::vector<Index> low_shared, test_rows, low_only;
  for (Index i = 0; i < low_in.size(); ++i) {
    if (in_high.count(low_in.sample_ids[static_cast<std::size_t>(i)])) {
      low_shared.push_back(i);
    } else if (has_observed_label(low_in, i)) {
      test_rows.push_back(i);
    } else {
      low_only.push_back(i);
    }
  }

  DomainDataset high = high_in;
  DomainDataset low = low_in.subset(low_shared);
  DomainDataset low_unpaired = low_in.subset(low_only);
  DomainDataset test = append_rows(low_in.subset(test_rows), extra_test);

  if (standardize) {
    std::vector<Index> all_high, high_unlabeled;
    for (Index i = 0; i < high.size(); ++i) {
      all_high.push_back(i);
      if (!has_observed_label(high, i)) high_unlabeled.push_back(i);
    }
    const Standardizer sh = fit_rows(high.features, high_unlabeled, all_high);
    high.features = sh.apply(high.features);

    // Low statistics: unlabeled non-test rows, else every non-test row.
    DomainDataset pool = append_rows(low, low_unpaired);
    std::vector<Index> all_low, low_unlabeled;
    for (Index i = 0; i < pool.size(); ++i) {
      all_low.push_back(i);
      if (!has_observed_label(pool, i)) low_unlabeled.push_back(i);
    }
    const Standardizer sl = fit_rows(pool.features, low_unlabeled, all_low);
    low.features = sl.apply(low.features);
    if (low_unpaired.size() > 0) low_unpaired.features = sl.apply(low_unpaired.features);
    if (test.size() > 0) test.features = sl.apply(test.features);
  }

  Corpus c;
  std::vector<Index> hl, hu;
  for (Index i = 0; i < high.size(); ++i) (has_observed_label(high, i) ? hl : hu).push_back(i);
  c.high_unlabeled = high.subset(hu);
  c.high_labeled = high.subset(hl);

  const PairedDataset pairs = pair_domains(high, low);
  std::vector<Index> pl, pu;
  for (Index i = 0; i < pairs.size(); ++i) {
    const bool labeled = pairs.label_mask && pairs.label_mask->row(i).sum() > 0;
    (labeled ? pl : pu).push_back(i);
  }
  c.low_pretrain.pairs = pairs.subset(pu);
  c.low_pretrain.validation = pairs.subset(pl);
  c.low_pretrain.low_only = low_unpaired.features;
  if (low_unpaired.size() == 0) c.low_pretrain.low_only = Matrix(0, low.width());

  const PairedDataset& lab = c.low_pretrain.validation;
  c.low_labeled.sample_ids = lab.sample_ids;
  c.low_labeled.feature_names = low.feature_names;
  c.low_labeled.features = lab.low;
  c.low_labeled.labels = lab.labels;
  c.low_labeled.label_mask = lab.label_mask;
  c.low_labeled.task_names = high.has_labels() ? high.task_names : low.task_names;
  c.test = test;
  if (c.test.task_names.empty()) c.test.task_names = c.low_labeled.task_names;
  return c;
}

Corpus prepare_corpus(const RunConfig& config) {
  if (config.synth) {
    const SynthData s = synthesize(*config.synth);
    return assemble_corpus(s.high, s.low, s.test, config.standardize);
  }
  const DomainDataset high = load_matrix(config.data->high, config.data->labels);
  const DomainDataset low = load_matrix(config.data->low, config.data->labels);
  return assemble_corpus(high, low, DomainDataset{}, config.standardize);
}

json to_json(const Variant& v) {
  return {{"name", v.name},
          {"loss", std::string(to_string(v.loss))},
          {"lambda", v.lambda},
          {"transmitter", v.transmitter},
          {"pretrained", v.pretrained}};
}

Variant main_variant(const RunConfig& config) {
  return {"cleit", config.loss, config.lambda, config.transmitter, true};
}

Variant vae_mlp_variant() { return {"vae_mlp", ClrKind::none, 0.0, true, true}; }

Variant mlp_variant() { return {"mlp", ClrKind::none, 0.0, false, false}; }

std::vector<Variant> ablation_variants(const std::vector<ClrKind>& losses,
                                       const std::vector<bool>& transmitter) {
  std::vector<Variant> out;
  for (ClrKind loss : losses) {
    for (bool tx : transmitter) {
      std::string name(to_string(loss));
      if (!tx) name += "-identity";
      out.push_back({name, loss, 0.8, tx, true});
    }
  }
  return out;
}

// ---------------------------------------------------------------- runner

struct Runner::State {
  const RunConfig& cfg;
  bool deps;
  std::ostream* log;
  std::optional<Corpus> corpus_;

  State(const RunConfig& c, bool d, std::ostream* l) : cfg(c), deps(d), log(l) {}

  const Corpus& corpus() {
    if (!corpus_) corpus_ = prepare_corpus(cfg);
    return *corpus_;
  }

  fs::path root() const { return cfg.out_dir; }
  fs::path high_pre_dir() const { return root() / "high" / "pretrain_high"; }
  fs::path high_ft_dir() const { return root() / "high" / "finetune_high"; }
  fs::path low_pre_dir(const Variant& v) const { return root() / v.name / "pretrain_low"; }
  fs::path low_ft_dir(const Variant& v, int r) const {
    return root() / v.name / "finetune_low" / ("repeat_" + std::to_string(r));
  }

  // ---- digests: each covers every input that shapes the phase output

  std::string data_digest() const {
    json src = cfg.synth ? json{{"synth", to_json(*cfg.synth)}} : to_json(cfg).at("data");
    return digest({{"data", src},
                   {"standardize", cfg.standardize},
                   {"model", to_json(cfg.model)},
                   {"seed", cfg.seed}});
  }
  std::string high_pre_digest() const {
    return digest({{"up", data_digest()}, {"plan", to_json(cfg.pretrain_high)}});
  }
  std::string high_ft_digest() const {
    return digest({{"up", high_pre_digest()},
                   {"plan", to_json(cfg.finetune_high)},
                   {"train_fraction", cfg.train_fraction}});
  }
  std::string low_pre_digest(const Variant& v) const {
    json var = to_json(v);
    var.erase("name");
    return digest({{"up", high_ft_digest()}, {"variant", var}, {"plan", to_json(cfg.pretrain_low)}});
  }
  std::string low_ft_digest(const Variant& v, int r) const {
    json var = to_json(v);
    var.erase("name");
    const std::string up = v.pretrained ? low_pre_digest(v) : data_digest();
    return digest({{"up", up},
                   {"variant", var},
                   {"plan", to_json(cfg.finetune_low)},
                   {"repeat", r},
                   {"train_fraction", cfg.train_fraction}});
  }

  // ---- models (initialization depends only on the run seed)

  Rng init(std::string_view stream) const { return Rng(cfg.seed).fork(stream); }
  std::uint64_t phase_seed(std::string_view stream) const { return Rng(cfg.seed).fork(stream).seed(); }

  Index tasks() {
    const Corpus& c = corpus();
    if (!c.high_labeled.has_labels()) throw DataError("no labels found for the high domain");
    return c.high_labeled.labels->cols();
  }
  Encoder high_encoder() {
    Rng r = init("init.high.encoder");
    return Encoder("high.encoder", high_encoder_width(), cfg.model, r);
  }
  Decoder high_decoder() {
    Rng r = init("init.high.decoder");
    return Decoder("high.decoder", high_encoder_width(), cfg.model, r);
  }
  Index high_encoder_width() {
    return corpus().high_unlabeled.width() > 0 ? corpus().high_unlabeled.width()
                                               : corpus().high_labeled.width();
  }
  MultiTaskRegressor regressor(std::string_view stream) {
    Rng r = init(stream);
    return MultiTaskRegressor("regressor", tasks(), cfg.model, r);
  }
  Encoder low_encoder(std::string_view stream) {
    Rng r = init(stream);
    return Encoder("low.encoder", corpus().low_labeled.width(), cfg.model, r);
  }
  Decoder low_decoder() {
    Rng r = init("init.low.decoder");
    return Decoder("low.decoder", corpus().low_labeled.width(), cfg.model, r);
  }
  Transmitter transmitter(bool on) {
    Rng r = init("init.transmitter");
    return Transmitter("transmitter", cfg.model, r, !on);
  }

  // ---- phase bookkeeping

  static bool complete(const fs::path& dir, const std::string& dig) {
    auto rec = read_json(dir / "result.json");
    return rec && rec->value("digest", std::string()) == dig && checkpoint_exists(dir / "checkpoint");
  }

  void note(const std::string& line) const {
    if (log) *log << line << '\n' << std::flush;
  }

  // Trains (or resumes) one phase and persists checkpoint, metrics and result.
  json run_phase(const std::string& label, const fs::path& dir, const std::string& dig,
                 const std::vector<Parameter*>& params,
                 const std::function<PhaseResult(const EpochSink&)>& train) {
    if (complete(dir, dig)) {
      load_checkpoint(dir / "checkpoint", params);
      note(label + ": up to date, loaded " + dir.string());
      return *read_json(dir / "result.json");
    }
    fs::remove(dir / "result.json");
    fs::create_directories(dir);
    PhaseResult result;
    try {
      std::ofstream metrics(dir / "metrics.jsonl", std::ios::trunc);
      const EpochSink sink = [&metrics](const EpochRecord& rec) {
        metrics << to_json(rec).dump() << '\n';
        metrics.flush();
      };
      result = train(sink);
      for (Parameter* p : params) round_to_storage_precision(p->tensor.data());
      save_checkpoint(dir / "checkpoint", as_const(params), {{"phase", label}});
    } catch (const MissingPhaseError&) {
      throw;
    } catch (const PhaseError&) {
      throw;
    } catch (const std::exception& e) {
      throw PhaseError(label, e.what());
    }
    json rec = {{"digest", dig}, {"phase", label}, {"result", to_json(result)}};
    write_text(dir / "result.json", rec.dump(2) + "\n");
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s: %zu epochs (%s), best validation %.6g", label.c_str(),
                  result.trace.size(), std::string(to_string(result.reason)).c_str(),
                  result.best_validation);
    note(buf);
    return rec;
  }

  // Ensures a dependency is on disk, running it when allowed.
  void require(const std::string& label, const fs::path& dir, const std::string& dig,
               const std::function<void()>& run) {
    if (complete(dir, dig)) return;
    if (!deps) {
      throw MissingPhaseError(label, "missing " + label + " results in " + dir.string() +
                                         " (run " + label + " first, with the same config)");
    }
    run();
  }

  // ---- phases

  json pretrain_high() {
    const Corpus& c = corpus();
    Encoder enc = high_encoder();
    Decoder dec = high_decoder();
    TrainPlan plan = cfg.pretrain_high;
    plan.seed = phase_seed("pretrain-high");
    return run_phase("pretrain-high", high_pre_dir(), high_pre_digest(),
                     concat_params(enc.parameters(), dec.parameters()), [&](const EpochSink& sink) {
                       return cleit::pretrain_high(enc, dec, c.high_unlabeled, c.high_labeled, plan,
                                                   sink);
                     });
  }

  json finetune_high() {
    require("pretrain-high", high_pre_dir(), high_pre_digest(), [this] { pretrain_high(); });
    const Corpus& c = corpus();
    Encoder enc = high_encoder();
    load_checkpoint(high_pre_dir() / "checkpoint", enc.parameters());
    MultiTaskRegressor reg = regressor("init.regressor");
    TrainPlan plan = cfg.finetune_high;
    plan.seed = phase_seed("finetune-high");
    const auto [train, val] = split(c.high_labeled, cfg.train_fraction, phase_seed("finetune-high.split"));
    return run_phase("finetune-high", high_ft_dir(), high_ft_digest(),
                     concat_params(enc.parameters(), reg.parameters()), [&](const EpochSink& sink) {
                       return cleit::finetune_high(enc, reg, train, val, plan, sink);
                     });
  }

  json pretrain_low(const Variant& v) {
    if (!v.pretrained) throw PreconditionError("variant '" + v.name + "' has no pre-training phase");
    require("finetune-high", high_ft_dir(), high_ft_digest(), [this] { finetune_high(); });
    const Corpus& c = corpus();
    Encoder high = high_encoder();
    load_checkpoint(high_ft_dir() / "checkpoint", high.parameters());
    Encoder enc = low_encoder("init.low.encoder");
    Decoder dec = low_decoder();
    Transmitter tr = transmitter(v.transmitter);
    TrainPlan plan = cfg.pretrain_low;
    plan.clr = v.loss;
    plan.lambda = v.lambda;
    plan.seed = phase_seed("pretrain-low");
    return run_phase("pretrain-low", low_pre_dir(v), low_pre_digest(v),
                     concat_params(enc.parameters(), dec.parameters(), tr.parameters()),
                     [&](const EpochSink& sink) {
                       return cleit::pretrain_low(c.low_pretrain, high, enc, dec, tr, plan, sink);
                     });
  }

  json finetune_low(const Variant& v, int r) {
    if (v.pretrained) {
      require("pretrain-low", low_pre_dir(v), low_pre_digest(v), [&] { pretrain_low(v); });
    }
    const Corpus& c = corpus();
    TrainPlan plan = cfg.finetune_low;
    plan.seed = cfg.seed + static_cast<std::uint64_t>(r);
    const auto [train, val] = split(c.low_labeled, cfg.train_fraction, plan.seed);
    if (!v.pretrained) {
      Encoder enc = low_encoder("init.mlp.encoder");
      MultiTaskRegressor reg = regressor("init.mlp.regressor");
      return run_phase("finetune-low", low_ft_dir(v, r), low_ft_digest(v, r),
                       concat_params(enc.parameters(), reg.parameters()), [&](const EpochSink& sink) {
                         return train_mlp(enc, reg, train, val, plan, sink);
                       });
    }
    Encoder enc = low_encoder("init.low.encoder");
    Transmitter tr = transmitter(v.transmitter);
    MultiTaskRegressor reg = regressor("init.regressor");
    load_checkpoint(low_pre_dir(v) / "checkpoint", concat_params(enc.parameters(), tr.parameters()));
    load_checkpoint(high_ft_dir() / "checkpoint", reg.parameters());
    return run_phase("finetune-low", low_ft_dir(v, r), low_ft_digest(v, r),
                     concat_params(enc.parameters(), tr.parameters(), reg.parameters()),
                     [&](const EpochSink& sink) {
                       return cleit::finetune_low(enc, tr, reg, train, val, plan, sink);
                     });
  }

  Matrix test_predictions(const Variant& v, int r) {
    require("finetune-low", low_ft_dir(v, r), low_ft_digest(v, r), [&] { finetune_low(v, r); });
    const fs::path ckpt = low_ft_dir(v, r) / "checkpoint";
    const Matrix& x = corpus().test.features;
    if (!v.pretrained) {
      Encoder enc = low_encoder("init.mlp.encoder");
      MultiTaskRegressor reg = regressor("init.mlp.regressor");
      load_checkpoint(ckpt, concat_params(enc.parameters(), reg.parameters()));
      return predict(enc, nullptr, reg, x);
    }
    Encoder enc = low_encoder("init.low.encoder");
    Transmitter tr = transmitter(v.transmitter);
    MultiTaskRegressor reg = regressor("init.regressor");
    load_checkpoint(ckpt, concat_params(enc.parameters(), tr.parameters(), reg.parameters()));
    return predict(enc, &tr, reg, x);
  }

  VariantOutcome evaluate(const Variant& v) {
    const DomainDataset& test = corpus().test;
    if (test.size() == 0 || !test.has_labels()) {
      throw DataError("no labeled low-domain-only samples to evaluate on");
    }
    VariantOutcome out;
    out.variant = v;
    for (int r = 0; r < cfg.repeats; ++r) {
      const Matrix pred = test_predictions(v, r);
      out.repeats.push_back(matrix_report(*test.labels, pred, *test.label_mask));
    }
    out.mean = average_reports(out.repeats);
    return out;
  }
};

Runner::Runner(RunConfig config, bool run_dependencies, std::ostream* log)
    : config_(std::move(config)), run_dependencies_(run_dependencies), log_(log) {
  config_.validate();
  state_ = std::make_unique<State>(config_, run_dependencies_, log_);
}

Runner::~Runner() = default;

void Runner::write_config_snapshot() const {
  write_text(fs::path(config_.out_dir) / "config.json", to_json(config_).dump(2) + "\n");
}

const Corpus& Runner::corpus() { return state_->corpus(); }

json Runner::pretrain_high() { return state_->pretrain_high(); }

json Runner::finetune_high() { return state_->finetune_high(); }

json Runner::pretrain_low(const Variant& variant) { return state_->pretrain_low(variant); }

std::vector<json> Runner::finetune_low(const Variant& variant) {
  std::vector<json> out;
  for (int r = 0; r < config_.repeats; ++r) out.push_back(state_->finetune_low(variant, r));
  return out;
}

VariantOutcome Runner::evaluate(const Variant& variant) { return state_->evaluate(variant); }

std::vector<VariantOutcome> Runner::run_variants(const std::vector<Variant>& variants) {
  std::vector<VariantOutcome> out;
  for (const Variant& v : variants) out.push_back(evaluate(v));
  return out;
}

void Runner::write_reports(const std::vector<VariantOutcome>& outcomes) const {
  const fs::path root = config_.out_dir;
  const DomainDataset& test = state_->corpus().test;
  json variants = json::array();
  std::string comparison = "method\tdrugwise_pearson\tdrugwise_rmse\tsamplewise_pearson\tsamplewise_rmse\n";
  std::string topk = "method\tk\tprecision\texcluded_rows\n";
  std::string per_drug = "method\trepeat\tdrug\tpearson\trmse\n";
  std::string per_sample = "method\trepeat\tsample_id\tpearson\trmse\n";
  for (const auto& o : outcomes) {
    json reps = json::array();
    for (const auto& r : o.repeats) reps.push_back(to_json(r));
    variants.push_back({{"variant", to_json(o.variant)}, {"mean", to_json(o.mean)}, {"repeats", reps}});
    const std::string& m = o.variant.name;
    comparison += m + "\t" + format_real(o.mean.drugwise_pearson_mean()) + "\t" +
                  format_real(o.mean.drugwise_rmse_mean()) + "\t" +
                  format_real(o.mean.samplewise_pearson_mean()) + "\t" +
                  format_real(o.mean.samplewise_rmse_mean()) + "\n";
    for (const auto& [k, p] : o.mean.topk_precision) {
      topk += m + "\t" + std::to_string(k) + "\t" + format_real(p) + "\t" +
              std::to_string(o.mean.topk_excluded.at(k)) + "\n";
    }
    for (std::size_t r = 0; r < o.repeats.size(); ++r) {
      const EvalReport& rep = o.repeats[r];
      for (std::size_t d = 0; d < rep.drug_pearson.values.size(); ++d) {
        const std::string name = d < test.task_names.size() ? test.task_names[d] : std::to_string(d);
        per_drug += m + "\t" + std::to_string(r) + "\t" + name + "\t" +
                    format_real(rep.drug_pearson.values[d]) + "\t" +
                    format_real(rep.drug_rmse.values[d]) + "\n";
      }
      for (std::size_t s = 0; s < rep.sample_pearson.values.size(); ++s) {
        per_sample += m + "\t" + std::to_string(r) + "\t" + test.sample_ids[s] + "\t" +
                      format_real(rep.sample_pearson.values[s]) + "\t" +
                      format_real(rep.sample_rmse.values[s]) + "\n";
      }
    }
  }
  write_text(root / "eval_report.json", json{{"variants", variants}}.dump(2) + "\n");
  write_text(root / "comparison.tsv", comparison);
  write_text(root / "topk.tsv", topk);
  write_text(root / "per_drug.tsv", per_drug);
  write_text(root / "per_sample.tsv", per_sample);
}

std::vector<VariantOutcome> run_all(const RunConfig& config, std::ostream* log) {
  Runner runner(config, true, log);
  runner.write_config_snapshot();
  std::vector<Variant> variants{main_variant(config)};
  if (config.baselines) {
    variants.push_back(vae_mlp_variant());
    variants.push_back(mlp_variant());
  }
  auto outcomes = runner.run_variants(variants);
  runner.write_reports(outcomes);
  return outcomes;
}

void export_synth(const SynthSpec& spec, const fs::path& dir) {
  const SynthData s = synthesize(spec);
  fs::create_directories(dir);
  write_features(dir / "high.tsv", s.high);
  write_features(dir / "low.tsv", append_rows(s.low, s.test));
  DomainDataset labeled = append_rows(s.high.labeled_rows(), s.test);
  write_labels(dir / "labels.tsv", labeled);
  write_text(dir / "synth_spec.json", to_json(spec).dump(2) + "\n");
}

}  // namespace cleit
