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


// Acceptance suite: one PASS/FAIL line per criterion. Criteria can be
// selected by number on the command line (default: all).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cleit/adamax.hpp"
#include "cleit/config.hpp"
#include "cleit/eval.hpp"
#include "cleit/grad_check.hpp"
#include "cleit/losses.hpp"
#include "cleit/ops.hpp"
#include "cleit/run.hpp"
#include "cli.hpp"
#include "helpers.hpp"
#include "pipeline_fixture.hpp"

namespace {

using namespace cleit;
namespace fs = std::filesystem;
using nlohmann::json;
using testing_util::col;
using testing_util::row;
using testing_util::to_mat;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  // Records a failed expectation without stopping the criterion.
  void expect(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[failed: " << what << "] ";
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Matrix random_mask(Rng& rng, Index n, Index k, double rate) {
  Matrix m(n, k);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < k; ++j) m(i, j) = rng.uniform() < rate ? 0.0 : 1.0;
    m(i, static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(k)))) = 1.0;
  }
  return m;
}

// ------------------------------------------------------------ 1. gradients

void gradients(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(101);
  double worst = 0;
  auto check = [&](const std::string& name, const ScalarFn& f, const Matrix& x) {
    const double e = grad_check(f, x, 1e-5);
    worst = std::max(worst, e);
    o.expect(e < 1e-4, name + " error " + std::to_string(e));
  };

  const Matrix y = rng.normal_matrix(6, 8), mask = random_mask(rng, 6, 8, 0.3);
  check("si_mse", [&](const Var& p) { return si_mse({y, mask}, p); }, rng.normal_matrix(6, 8));

  const Matrix x = rng.normal_matrix(5, 7), mu = rng.normal_matrix(5, 3), lv = 0.5 * rng.normal_matrix(5, 3);
  check("vae x_hat", [&](const Var& xh) {
    Tape& t = xh.tape();
    return vae_loss(t.constant(x), xh, t.constant(mu), t.constant(lv)).total;
  }, rng.normal_matrix(5, 7));
  check("vae mu", [&](const Var& m) {
    Tape& t = m.tape();
    return vae_loss(t.constant(x), t.constant(x), m, t.constant(lv)).total;
  }, mu);
  check("vae logvar", [&](const Var& l) {
    Tape& t = l.tape();
    return vae_loss(t.constant(x), t.constant(x), t.constant(mu), l).total;
  }, lv);

  const Matrix zh = rng.normal_matrix(6, 4), zl = rng.normal_matrix(6, 4);
  check("contrastive low", [&](const Var& v) { return contrastive_clr(v.tape().constant(zh), v); }, zl);
  check("contrastive high", [&](const Var& v) { return contrastive_clr(v, v.tape().constant(zl)); }, zh);

  const Matrix b = rng.normal_matrix(7, 4);
  const KernelSpec kernel = median_heuristic_kernel(zh, b);
  check("mmd", [&](const Var& a) { return mmd(a, a.tape().constant(b), kernel); }, zh);

  // Encoder -> transmitter -> contrastive, with dropout masks and latent
  // noise frozen by reseeding the stream on every evaluation.
  ModelConfig model = testing_util::tiny_model();
  Rng init(5);
  Encoder encoder("low.encoder", 10, model, init);
  Transmitter transmitter("transmitter", model, init);
  const Matrix xl = rng.normal_matrix(6, 10);
  const Matrix target = rng.normal_matrix(6, model.latent_dim);
  check("encoder-transmitter-contrastive", [&](const Var& in) {
    Tape& t = in.tape();
    Rng frozen(77);
    const ForwardContext ctx = ForwardContext::train(frozen);
    const Encoded e = encoder.encode(t, in, ctx);
    return contrastive_clr(t.constant(target), transmitter.transmit(t, e.z, ctx));
  }, xl);

  const double elapsed = seconds_since(t0);
  o.expect(elapsed < 30.0, "runtime " + std::to_string(elapsed) + " s");
  o.detail << "max relative error " << worst << ", " << elapsed << " s";
}

// ------------------------------------------------------- 2. loss invariants

void loss_invariants(Outcome& o) {
  Rng rng(202);
  Tape t;
  const Matrix y = rng.normal_matrix(5, 6), mask = random_mask(rng, 5, 6, 0.3);
  Matrix shifted = y;
  for (Index i = 0; i < 5; ++i) shifted.row(i).array() += rng.normal() * 3.0;
  const double shift = si_mse({y, mask}, t.constant(shifted)).scalar();
  o.expect(std::abs(shift) < 1e-9, "si_mse shift invariance " + std::to_string(shift));

  // Values under masked entries must not matter at all.
  const Matrix pred = rng.normal_matrix(5, 6);
  Matrix y2 = y, pred2 = pred;
  for (Index i = 0; i < y.size(); ++i) {
    if (mask.data()[i] == 0) {
      y2.data()[i] = 1e6 * rng.normal();
      pred2.data()[i] = -1e6 * rng.normal();
    }
  }
  o.expect(si_mse({y, mask}, t.constant(pred)).scalar() == si_mse({y2, mask}, t.constant(pred2)).scalar(),
           "si_mse NA-mask bit-insensitivity");

  const Matrix zh = rng.normal_matrix(6, 4), zl = rng.normal_matrix(6, 4);
  const double base = contrastive_clr(t.constant(zh), t.constant(zl)).scalar();
  const double scaled = contrastive_clr(t.constant(zh * 4.2), t.constant(zl * 0.03)).scalar();
  o.expect(std::abs(base - scaled) < 1e-9, "contrastive scale invariance");

  Matrix orth(2, 2), same(2, 2);
  orth << 1, 0, 0, 1;
  same << 0.3, -1.2, 0.3, -1.2;
  const double v_orth = contrastive_clr(t.constant(orth), t.constant(orth)).scalar();
  const double v_same = contrastive_clr(t.constant(same), t.constant(same)).scalar();
  o.expect(std::abs(v_orth - (std::log(2.0) - 1.0)) < 1e-9 && std::abs(v_orth + 0.30685) < 1e-5,
           "orthogonal pair value " + std::to_string(v_orth));
  o.expect(std::abs(v_same - std::log(2.0)) < 1e-9 && std::abs(v_same - 0.69315) < 1e-5,
           "identical pair value " + std::to_string(v_same));

  const Matrix a = rng.normal_matrix(8, 3);
  const double self = mmd(t.constant(a), t.constant(a), median_heuristic_kernel(a, a)).scalar();
  o.expect(std::abs(self) < 1e-12, "mmd(A, A) = " + std::to_string(self));
  double min_mmd = 1e300;
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix p = rng.normal_matrix(6, 3), q = 1.5 * rng.normal_matrix(9, 3);
    min_mmd = std::min(min_mmd, mmd(t.constant(p), t.constant(q), median_heuristic_kernel(p, q)).scalar());
  }
  o.expect(min_mmd >= 0.0, "mmd negative " + std::to_string(min_mmd));
  o.detail << "ln2-1 -> " << v_orth << ", ln2 -> " << v_same << ", min mmd " << min_mmd;
}

// ----------------------------------------------------------- 3. Procedure 1

void procedure_one(Outcome& o) {
  testing_util::TinySetup s;
  TrainPlan plan = s.plan(Phase::finetune_low, 24);
  plan.patience = 1000;
  plan.lr = 1e-3;
  plan.n_frozen = 5;
  plan.n_unfreeze = 5;
  plan.decay = 0.8;

  auto groups = s.low_encoder.groups();
  std::vector<std::vector<Matrix>> initial;
  for (auto& g : groups) initial.push_back(snapshot(g.params));
  const auto transmitter0 = snapshot(s.transmitter.parameters());
  std::vector<int> first_change(groups.size(), 0);
  int transmitter_change = 0;
  std::vector<Real> epoch_lr;
  const EpochSink sink = [&](const EpochRecord& rec) {
    epoch_lr.push_back(rec.lr);
    for (std::size_t g = 0; g < groups.size(); ++g) {
      if (!first_change[g] && !identical(groups[g].params, initial[g])) first_change[g] = rec.epoch;
    }
    if (!transmitter_change && !identical(s.transmitter.parameters(), transmitter0)) transmitter_change = rec.epoch;
  };
  const PhaseResult r = finetune_low(s.low_encoder, s.transmitter, s.regressor, s.low_train, s.low_val, plan, sink);

  // Everything upstream of the regressor is bit-identical for epochs 1-5.
  const int earliest = std::min({transmitter_change, first_change[0], first_change[1], first_change[2]});
  o.expect(earliest == 6, "first encoder/transmitter change at epoch " + std::to_string(earliest));
  o.expect(transmitter_change == 6 && first_change[2] == 11 && first_change[1] == 16 && first_change[0] == 21,
           "release order");
  o.expect(r.unfreeze_events == std::vector<int>{0, 5, 10, 15}, "unfreeze events");
  bool lr_ok = epoch_lr.size() == 24;
  for (std::size_t e = 1; lr_ok && e <= 24; ++e) {
    const int events = e <= 5 ? 0 : std::min<int>(4, static_cast<int>(e - 6) / 5 + 1);
    lr_ok = epoch_lr[e - 1] == 1e-3 * std::pow(0.8, events);
  }
  o.expect(lr_ok, "working lr equals lr0 * 0.8^j exactly");
  o.detail << "releases at epochs " << transmitter_change << "/" << first_change[2] << "/" << first_change[1]
           << "/" << first_change[0] << ", events {0,5,10,15}";
}

// --------------------------------------------------------- 4. lambda = 0

void lambda_zero(Outcome& o) {
  testing_util::TinySetup a, b;
  TrainPlan plan = a.plan(Phase::pretrain_low, 6);
  plan.lambda = 0.0;
  plan.clr = ClrKind::contrastive;
  const PhaseResult ra = pretrain_low(a.low_pretrain, a.high_encoder, a.low_encoder, a.low_decoder, a.transmitter, plan);
  plan.clr = ClrKind::none;
  const PhaseResult rb = pretrain_low(b.low_pretrain, b.high_encoder, b.low_encoder, b.low_decoder, b.transmitter, plan);
  o.expect(identical(b.low_encoder.parameters(), snapshot(a.low_encoder.parameters())), "encoder trajectory");
  o.expect(identical(b.low_decoder.parameters(), snapshot(a.low_decoder.parameters())), "decoder trajectory");
  bool trace = ra.trace.size() == rb.trace.size();
  for (std::size_t i = 0; trace && i < ra.trace.size(); ++i) {
    trace = ra.trace[i].losses.at("train_vae") == rb.trace[i].losses.at("train_vae");
  }
  o.expect(trace, "per-epoch VAE loss trace");
  o.detail << ra.trace.size() << " epochs bit-identical";
}

// ----------------------------------------------------- 5. ridge separation

void ridge_gap(Outcome& o) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    SynthSpec spec;
    spec.seed = seed;
    const SynthData d = synthesize(spec);
    const DomainDataset hl = d.high.labeled_rows(), ll = d.low.labeled_rows();
    const double high = testing_util::ridge_holdout_samplewise(hl.features, *hl.labels, *hl.label_mask, 400, 1.0);
    const double low = testing_util::ridge_holdout_samplewise(ll.features, *ll.labels, *ll.label_mask, 400, 1.0);
    o.expect(high - low >= 0.05, "seed " + std::to_string(seed));
    o.detail << "seed " << seed << ": " << high << " vs " << low << "; ";
  }
}

// ---------------------------------------------------- 6. method ordering

// Shared by every method; only the transmission settings differ.
json ordering_config() {
  return json::parse(R"({
    "repeats": 3,
    "phases": {
      "pretrain_high": {"max_epochs": 60},
      "finetune_high": {"max_epochs": 60},
      "pretrain_low": {"max_epochs": 60},
      "finetune_low": {"max_epochs": 150, "patience": 20, "lr": 0.001}
    }
  })");
}

void ordering(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path dir = testing_util::scratch_dir("acceptance_ordering");
  json doc = ordering_config();
  doc["out_dir"] = dir.string();
  Runner runner(validate_config(doc));
  runner.write_config_snapshot();
  const auto identity = ablation_variants({ClrKind::contrastive}, {false}).front();
  const auto outcomes = runner.run_variants({main_variant(runner.config()), vae_mlp_variant(), mlp_variant(), identity});
  runner.write_reports(outcomes);
  const double cleit = outcomes[0].mean.samplewise_pearson_mean();
  const double vae = outcomes[1].mean.samplewise_pearson_mean();
  const double mlp = outcomes[2].mean.samplewise_pearson_mean();
  const double ident = outcomes[3].mean.samplewise_pearson_mean();
  o.expect(cleit > vae, "CLEIT > VAE+MLP");
  o.expect(vae > mlp, "VAE+MLP > MLP");
  o.expect(cleit - vae >= 0.02, "CLEIT - VAE+MLP >= 0.02");
  o.expect(cleit >= ident, "CLEIT >= CLEIT w/o transmitter");
  const double elapsed = seconds_since(t0);
  o.expect(elapsed <= 900.0, "runtime " + std::to_string(elapsed) + " s");
  o.detail << "sample-wise Pearson CLEIT " << cleit << ", VAE+MLP " << vae << ", MLP " << mlp
           << ", w/o transmitter " << ident << "; " << elapsed << " s";
}

// ------------------------------------------------------- 7. metric oracles

void metric_oracles(Outcome& o) {
  Rng rng(707);
  double worst = 0;
  bool sets = true, monotone = true, defined = true;
  auto near = [&](const std::optional<Real>& got, const std::optional<double>& want) {
    if (got.has_value() != want.has_value()) {
      defined = false;
      return;
    }
    if (got) worst = std::max(worst, std::abs(*got - *want));
  };
  for (int trial = 0; trial < 10; ++trial) {
    Matrix y(20, 15), yhat(20, 15), mask(20, 15);
    for (Index i = 0; i < y.size(); ++i) {
      y.data()[i] = rng.uniform();
      yhat.data()[i] = rng.uniform();
      mask.data()[i] = rng.uniform() < 0.3 ? 0.0 : 1.0;
    }
    const EvalReport r = matrix_report(y, yhat, mask);
    for (Index i = 0; i < 20; ++i) {
      near(r.sample_pearson.values[static_cast<std::size_t>(i)], oracle::pearson(row(y, i), row(yhat, i), row(mask, i)));
      near(r.sample_rmse.values[static_cast<std::size_t>(i)], oracle::rmse(row(y, i), row(yhat, i), row(mask, i)));
      for (Index k : {1, 3, 5, 10}) {
        const auto want = oracle::topk(row(y, i), row(yhat, i), row(mask, i), static_cast<std::size_t>(k));
        const auto got = topk_precision(y.row(i).transpose(), yhat.row(i).transpose(), mask.row(i).transpose(), k);
        sets = sets && got.has_value() == want.has_value() && (!got || *got == *want);
        const Matrix warped = (3.0 * yhat.array() - 1.0).exp().matrix();
        monotone = monotone &&
                   topk_precision(y.row(i).transpose(), warped.row(i).transpose(), mask.row(i).transpose(), k) == got;
      }
    }
    for (Index j = 0; j < 15; ++j) {
      near(r.drug_pearson.values[static_cast<std::size_t>(j)], oracle::pearson(col(y, j), col(yhat, j), col(mask, j)));
      near(r.drug_rmse.values[static_cast<std::size_t>(j)], oracle::rmse(col(y, j), col(yhat, j), col(mask, j)));
    }
  }
  o.expect(defined, "defined/undefined entries agree");
  o.expect(worst <= 1e-9, "Pearson/RMSE deviation " + std::to_string(worst));
  o.expect(sets, "top-k set intersection exact");
  o.expect(monotone, "top-k monotone invariance");
  o.detail << "max |metric - oracle| " << worst;
}

// ------------------------------------------------ 8. determinism & resume

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  return cli::run_command(args, out, err);
}

void determinism(Outcome& o) {
  const fs::path dir = testing_util::scratch_dir("acceptance_determinism");
  json phase = {{"max_epochs", 3}, {"batch_size", 32}};
  json ft = {{"max_epochs", 4}, {"batch_size", 32}, {"lr", 1e-3}, {"n_frozen", 1}, {"n_unfreeze", 1}};
  const json doc = {
      {"repeats", 2},
      {"synth",
       {{"unlabeled", 120}, {"labeled", 60}, {"test", 20}, {"high_width", 16}, {"low_width", 16}, {"tasks", 4},
        {"latent_rank", 4}, {"low_active_fraction", 0.2}}},
      {"model",
       {{"latent_dim", 8}, {"encoder_widths", {16, 8}}, {"decoder_widths", {8, 16}}, {"transmitter_widths", {8, 8}},
        {"shared_widths", {8}}, {"head_widths", {4}}}},
      {"phases", {{"pretrain_high", phase}, {"finetune_high", ft}, {"pretrain_low", phase}, {"finetune_low", ft}}}};
  const fs::path cfg = dir / "config.in.json";
  std::ofstream(cfg) << doc.dump(2);

  const std::vector<std::string> outputs{"eval_report.json", "comparison.tsv", "topk.tsv", "per_drug.tsv",
                                         "per_sample.tsv"};
  auto run = [&](const fs::path& out) {
    return cli({"run-all", "--config", cfg.string(), "--seed", "11", "--out-dir", out.string()});
  };
  auto outputs_of = [&](const fs::path& out) {
    std::string all;
    for (const auto& f : outputs) all += slurp(out / f) + '\x1f';
    return all;
  };
  o.expect(run(dir / "a") == 0 && run(dir / "b") == 0, "run-all exit codes");
  const std::string reference = outputs_of(dir / "a");
  o.expect(slurp(dir / "a" / "eval_report.json").size() > 0, "report written");
  o.expect(reference == outputs_of(dir / "b"), "two invocations byte-identical");

  // Kill at each phase boundary: everything after it disappears.
  const std::vector<std::pair<std::string, std::vector<fs::path>>> boundaries{
      {"after pretrain-high", {"high/finetune_high", "cleit", "vae_mlp", "mlp"}},
      {"after finetune-high", {"cleit", "vae_mlp", "mlp"}},
      {"after pretrain-low", {"cleit/finetune_low", "vae_mlp", "mlp"}},
      {"after finetune-low", {"vae_mlp", "mlp"}},
      {"mid finetune-low", {"cleit/finetune_low/repeat_1", "vae_mlp", "mlp"}},
  };
  int resumed = 0;
  for (const auto& [name, removed] : boundaries) {
    const fs::path b = dir / "b";
    for (const auto& rel : removed) fs::remove_all(b / rel);
    for (const auto& f : outputs) fs::remove(b / f);
    const bool ok = run(b) == 0 && outputs_of(b) == reference;
    o.expect(ok, "resume " + name);
    resumed += ok ? 1 : 0;
  }
  o.detail << "byte-identical reruns; " << resumed << "/" << boundaries.size() << " resume points identical";
}

// ------------------------------------------------------- 9. Adamax step

void adamax_first_step(Outcome& o) {
  Rng rng(909);
  const double lr = 0.01, eps = 1e-8;
  double worst_excess = 0;
  for (int trial = 0; trial < 20; ++trial) {
    Matrix p = rng.normal_matrix(7, 9);
    const Matrix before = p;
    const Matrix g = rng.normal_matrix(7, 9) * std::pow(10.0, rng.uniform() * 6 - 3);
    AdamaxState s = AdamaxState::zeros(7, 9);
    adamax_step(p, g, s, lr);
    for (Index i = 0; i < p.size(); ++i) {
      const double gi = g.data()[i];
      const double expected = -lr * (gi > 0 ? 1.0 : -1.0);
      // |g| / (|g| + eps) differs from 1 by at most eps / |g|.
      const double tol = lr * eps / std::abs(gi) + 1e-15;
      worst_excess = std::max(worst_excess, std::abs(p.data()[i] - before.data()[i] - expected) - tol);
    }
  }
  o.expect(worst_excess <= 0, "step outside tolerance");
  o.detail << "20 random gradients within lr*eps/|g|";
}

struct Criterion {
  int id;
  std::string name;
  std::function<void(Outcome&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "gradient correctness", gradients},
      {2, "loss invariants", loss_invariants},
      {3, "gradual unfreezing schedule", procedure_one},
      {4, "lambda = 0 degeneracy", lambda_zero},
      {5, "synthetic discriminative gap", ridge_gap},
      {6, "method ordering on synthetic data", ordering},
      {7, "metric oracle equivalence", metric_oracles},
      {8, "determinism and resume", determinism},
      {9, "Adamax first step", adamax_first_step},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::stoi(argv[i]));

  int failures = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    Outcome o;
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "[exception: " << e.what() << "]";
    }
    failures += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << c.id << " " << c.name << ": " << o.detail.str() << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
