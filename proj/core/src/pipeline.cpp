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

#include "cleit/pipeline.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "cleit/adamax.hpp"
#include "cleit/error.hpp"
#include "cleit/losses.hpp"
#include "cleit/ops.hpp"

namespace cleit {
using nlohmann::json;

std::string_view phase_name(Phase phase) {
  switch (phase) {
    case Phase::pretrain_high:
      return "pretrain-high";
    case Phase::finetune_high:
      return "finetune-high";
    case Phase::pretrain_low:
      return "pretrain-low";
    case Phase::finetune_low:
      return "finetune-low";
  }
  return "unknown";
}

std::string_view to_string(ClrKind kind) {
  switch (kind) {
    case ClrKind::contrastive:
      return "contrastive";
    case ClrKind::mmd:
      return "mmd";
    case ClrKind::wgan:
      return "wgan";
    case ClrKind::none:
      return "none";
  }
  return "unknown";
}

ClrKind parse_clr_kind(std::string_view text) {
  if (text == "contrastive") return ClrKind::contrastive;
  if (text == "mmd") return ClrKind::mmd;
  if (text == "wgan") return ClrKind::wgan;
  if (text == "none") return ClrKind::none;
  throw ConfigError("unknown loss kind '" + std::string(text) +
                    "' (expected contrastive, mmd, wgan or none)");
}

std::string_view to_string(StopReason reason) {
  return reason == StopReason::early_stop ? "early_stop" : "max_epochs";
}

TrainPlan TrainPlan::defaults(Phase phase) {
  TrainPlan p;
  p.phase = phase;
  const bool pretraining = phase == Phase::pretrain_high || phase == Phase::pretrain_low;
  p.lr = pretraining ? 5e-3 : 1e-4;
  p.max_epochs = pretraining ? 500 : 100;
  return p;
}

void TrainPlan::validate() const {
  const std::string where(phase_name(phase));
  if (batch_size < 1) throw ConfigError(where + ": batch_size must be at least 1");
  if (phase == Phase::pretrain_low && clr == ClrKind::contrastive && batch_size < 2) {
    throw ConfigError(where + ": batch_size must be at least 2 for the contrastive loss");
  }
  if (!(lr > 0)) throw ConfigError(where + ": lr must be positive");
  if (max_epochs < 1) throw ConfigError(where + ": max_epochs must be at least 1");
  if (patience < 1) throw ConfigError(where + ": patience must be at least 1");
  if (!(min_delta >= 0)) throw ConfigError(where + ": min_delta must be non-negative");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError(where + ": lambda must lie in [0, 1]");
  if (!(temperature > 0)) throw ConfigError(where + ": temperature must be positive");
  if (!(decay > 0.0 && decay <= 1.0)) throw ConfigError(where + ": decay must lie in (0, 1]");
  if (n_frozen <= 0 || n_unfreeze <= 0) {
    throw ConfigError(where + ": n_frozen and n_unfreeze must be positive");
  }
  if (mmd_multipliers.empty()) throw ConfigError(where + ": mmd bandwidth multipliers are empty");
  for (Real m : mmd_multipliers) {
    if (!(m > 0)) throw ConfigError(where + ": mmd bandwidth multipliers must be positive");
  }
  if (wgan.critic_hidden < 1) throw ConfigError(where + ": wgan critic_hidden must be positive");
  if (wgan.critic_steps < 1) throw ConfigError(where + ": wgan critic_steps must be at least 1");
  if (!(wgan.gradient_penalty >= 0)) throw ConfigError(where + ": gradient penalty must be >= 0");
}

EarlyStopper::EarlyStopper(int patience, Real min_delta)
    : patience_(patience), min_delta_(min_delta), best_(std::numeric_limits<Real>::infinity()) {}

bool EarlyStopper::update(Real value) {
  if (value < best_ - min_delta_) {
    best_ = value;
    bad_ = 0;
    return true;
  }
  ++bad_;
  return false;
}

json to_json(const EpochRecord& r) {
  json losses = json::object();
  for (const auto& [k, v] : r.losses) losses[k] = v;
  return {{"phase", std::string(phase_name(r.phase))},
          {"epoch", r.epoch},
          {"losses", losses},
          {"lr", r.lr},
          {"unfrozen_blocks", r.unfrozen_blocks}};
}

json to_json(const PhaseResult& r) {
  json trace = json::array();
  for (const auto& e : r.trace) trace.push_back(to_json(e));
  return {{"phase", std::string(phase_name(r.phase))},
          {"stop_reason", std::string(to_string(r.reason))},
          {"epochs", r.trace.size()},
          {"initial_validation", r.initial_validation},
          {"best_validation", r.best_validation},
          {"best_epoch", r.best_epoch},
          {"unfreeze_events", r.unfreeze_events},
          {"group_lrs", r.group_lrs},
          {"final_lr", r.final_lr},
          {"initial_alignment", r.initial_alignment},
          {"final_alignment", r.final_alignment},
          {"critic_updates", r.critic_updates},
          {"generator_updates", r.generator_updates},
          {"trace", trace}};
}

Real decayed_lr(Real lr0, Real decay, int events) {
  return lr0 * std::pow(decay, static_cast<Real>(events));
}

Real mean_cosine(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() == 0) {
    throw DimensionError("mean_cosine: shapes differ or empty");
  }
  Real acc = 0;
  for (Index i = 0; i < a.rows(); ++i) {
    const Real na = a.row(i).norm(), nb = b.row(i).norm();
    acc += (na > 0 && nb > 0) ? a.row(i).dot(b.row(i)) / (na * nb) : 0.0;
  }
  return acc / static_cast<Real>(a.rows());
}

namespace {

Matrix take(const Matrix& m, const std::vector<Index>& rows) {
  Matrix out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = m.row(rows[i]);
  return out;
}

std::vector<Index> iota(Index n) {
  std::vector<Index> v(static_cast<std::size_t>(n));
  std::iota(v.begin(), v.end(), Index{0});
  return v;
}

std::vector<std::vector<Index>> batches(const std::vector<Index>& order, Index batch_size) {
  std::vector<std::vector<Index>> out;
  for (std::size_t at = 0; at < order.size(); at += static_cast<std::size_t>(batch_size)) {
    const std::size_t end = std::min(order.size(), at + static_cast<std::size_t>(batch_size));
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(at),
                     order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return out;
}

std::vector<Parameter*> trainable_only(const std::vector<Parameter*>& params) {
  std::vector<Parameter*> out;
  for (Parameter* p : params) {
    if (p->trainable) out.push_back(p);
  }
  return out;
}

// ------------------------------------------------------------ VAE phases

struct CrossLevelTerm {
  Var loss;
  Real alignment = 0.0;
};

class VaePhase {
 public:
  VaePhase(Phase phase, Encoder& encoder, Decoder& decoder, Transmitter* transmitter,
           const TrainPlan& plan)
      : phase_(phase),
        encoder_(encoder),
        decoder_(decoder),
        transmitter_(transmitter),
        plan_(plan),
        kind_(transmitter ? plan.clr : ClrKind::none),
        rng_(plan.seed),
        critic_rng_(Rng(plan.seed).fork("critic")) {
    if (kind_ == ClrKind::wgan) {
      Rng init = Rng(plan.seed).fork("critic.init");
      critic_ = Critic("critic", encoder.latent_dim(), plan.wgan.critic_hidden, init);
    }
  }

  PhaseResult run(const Matrix& train_x, const std::vector<Index>& partner,
                  const Matrix& target_mu, const Matrix& target_logvar, const Matrix& val_x,
                  const Matrix& val_target) {
    PhaseResult result;
    result.phase = phase_;
    params_ = concat_params(encoder_.parameters(), decoder_.parameters());
    if (transmitter_) {
      auto tp = transmitter_->parameters();
      params_.insert(params_.end(), tp.begin(), tp.end());
    }
    const std::vector<Parameter*> trainable = trainable_only(params_);

    auto initial = validate(val_x, val_target);
    EarlyStopper stopper(plan_.patience, plan_.min_delta);
    stopper.update(initial.at("val_loss"));
    result.initial_validation = initial.at("val_loss");
    result.initial_alignment = initial.count("val_alignment") ? initial.at("val_alignment") : 0.0;
    result.best_validation = result.initial_validation;
    std::vector<Matrix> best = snapshot(params_);
    Real last_alignment = result.initial_alignment;

    for (int epoch = 1; epoch <= plan_.max_epochs; ++epoch) {
      std::vector<Index> order = iota(train_x.rows());
      rng_.shuffle(order);
      Real loss_sum = 0, vae_sum = 0, clr_sum = 0;
      Index steps = 0;
      for (const auto& batch : batches(order, plan_.batch_size)) {
        if (kind_ == ClrKind::wgan) train_critic(train_x, partner, target_mu, target_logvar);

        zero_grads(trainable);
        Tape tape;
        const ForwardContext ctx = ForwardContext::train(rng_);
        Var x = tape.constant(take(train_x, batch));
        Encoded e = encoder_.encode(tape, x, ctx);
        Var x_hat = decoder_.decode(tape, e.z, ctx);
        VaeTerms vae = vae_loss(x, x_hat, e.mu, e.logvar);
        Var loss = vae.total;

        std::vector<Index> local, targets;
        for (std::size_t i = 0; i < batch.size(); ++i) {
          const Index p = partner[static_cast<std::size_t>(batch[i])];
          if (p >= 0) {
            local.push_back(static_cast<Index>(i));
            targets.push_back(p);
          }
        }
        if (kind_ != ClrKind::none && local.size() >= 2) {
          Var z_low = transmitter_->transmit(tape, ops::take_rows(e.z, local), ctx);
          Var z_high = tape.constant(high_targets(target_mu, target_logvar, targets));
          Var clr = cross_level(tape, z_high, z_low);
          loss = combined_pretrain_loss(plan_.lambda, clr, vae.total);
          clr_sum += clr.scalar();
          if (kind_ == ClrKind::wgan) ++generator_updates_;
        }
        tape.backward(loss);
        for (Parameter* p : trainable) optimizer_.step(*p, plan_.lr);
        loss_sum += loss.scalar();
        vae_sum += vae.total.scalar();
        ++steps;
      }

      auto val = validate(val_x, val_target);
      EpochRecord rec;
      rec.phase = phase_;
      rec.epoch = epoch;
      rec.lr = plan_.lr;
      rec.unfrozen_blocks = 0;
      rec.losses = val;
      rec.losses["train_loss"] = loss_sum / static_cast<Real>(steps);
      rec.losses["train_vae"] = vae_sum / static_cast<Real>(steps);
      if (kind_ != ClrKind::none) rec.losses["train_clr"] = clr_sum / static_cast<Real>(steps);
      result.trace.push_back(rec);
      if (sink_) sink_(rec);
      if (val.count("val_alignment")) last_alignment = val.at("val_alignment");

      if (stopper.update(val.at("val_loss"))) {
        best = snapshot(params_);
        result.best_epoch = epoch;
        result.best_validation = stopper.best();
        result.final_alignment = last_alignment;
      }
      if (stopper.stop()) {
        result.reason = StopReason::early_stop;
        break;
      }
    }
    if (result.best_epoch == 0) result.final_alignment = result.initial_alignment;
    restore(params_, best);
    result.final_lr = plan_.lr;
    result.critic_updates = critic_updates_;
    result.generator_updates = generator_updates_;
    return result;
  }

  void set_sink(const EpochSink& sink) { sink_ = sink; }

 private:
  Matrix high_targets(const Matrix& mu, const Matrix& logvar, const std::vector<Index>& rows) {
    Matrix m = take(mu, rows);
    if (plan_.latent_mean_target) return m;
    const Matrix sd = (0.5 * take(logvar, rows).array()).exp().matrix();
    return m + sd.cwiseProduct(rng_.normal_matrix(m.rows(), m.cols()));
  }

  Var cross_level(Tape& tape, const Var& z_high, const Var& z_low) {
    switch (kind_) {
      case ClrKind::contrastive:
        return contrastive_clr(z_high, z_low, plan_.temperature);
      case ClrKind::mmd:
        return mmd(z_high, z_low,
                   median_heuristic_kernel(z_high.value(), z_low.value(), plan_.mmd_multipliers));
      case ClrKind::wgan: {
        critic_.set_trainable(false);
        CriticWeights w = critic_.bind(tape);
        critic_.set_trainable(true);
        return wgan_losses(critic_forward(z_high, w), critic_forward(z_low, w)).generator;
      }
      case ClrKind::none:
        break;
    }
    throw PreconditionError("cross_level: no regularizer configured");
  }

  void train_critic(const Matrix& train_x, const std::vector<Index>& partner, const Matrix& target_mu,
                    const Matrix& target_logvar) {
    std::vector<Index> paired_rows;
    for (std::size_t i = 0; i < partner.size(); ++i) {
      if (partner[i] >= 0) paired_rows.push_back(static_cast<Index>(i));
    }
    if (paired_rows.size() < 2) return;
    const auto critic_params = critic_.parameters();
    const Index n = std::min<Index>(plan_.batch_size, static_cast<Index>(paired_rows.size()));
    for (int s = 0; s < plan_.wgan.critic_steps; ++s) {
      std::vector<Index> rows, targets;
      for (Index i = 0; i < n; ++i) {
        const Index r = paired_rows[critic_rng_.uniform_index(paired_rows.size())];
        rows.push_back(r);
        targets.push_back(partner[static_cast<std::size_t>(r)]);
      }
      Matrix z_low;
      {
        Tape fwd;
        const ForwardContext ctx = ForwardContext::train(critic_rng_);
        Encoded e = encoder_.encode(fwd, fwd.constant(take(train_x, rows)), ctx);
        z_low = transmitter_->transmit(fwd, e.z, ctx).value();
      }
      const Matrix z_high = high_targets(target_mu, target_logvar, targets);
      Matrix mix(n, z_low.cols());
      for (Index i = 0; i < n; ++i) {
        const Real eps = critic_rng_.uniform();
        mix.row(i) = eps * z_high.row(i) + (1.0 - eps) * z_low.row(i);
      }
      zero_grads(critic_params);
      Tape tape;
      CriticWeights w = critic_.bind(tape);
      WganLosses l = wgan_losses(critic_forward(tape.constant(z_high), w),
                                 critic_forward(tape.constant(z_low), w));
      Var loss = ops::add(l.critic, gradient_penalty(mix, w, plan_.wgan.gradient_penalty));
      tape.backward(loss);
      for (Parameter* p : critic_params) critic_optimizer_.step(*p, plan_.lr);
      ++critic_updates_;
    }
  }

  std::map<std::string, Real> validate(const Matrix& val_x, const Matrix& val_target) {
    Tape tape;
    const ForwardContext ctx = ForwardContext::eval();
    Var x = tape.constant(val_x);
    Encoded e = encoder_.encode(tape, x, ctx);
    Var x_hat = decoder_.decode(tape, e.z, ctx);
    VaeTerms vae = vae_loss(x, x_hat, e.mu, e.logvar);
    std::map<std::string, Real> out{{"val_vae", vae.total.scalar()},
                                    {"val_reconstruction", vae.reconstruction.scalar()},
                                    {"val_kl", vae.kl.scalar()},
                                    {"val_loss", vae.total.scalar()}};
    if (kind_ != ClrKind::none && val_target.rows() >= 2) {
      Var z_low = transmitter_->transmit(tape, e.mu, ctx);
      Var z_high = tape.constant(val_target);
      Var clr = cross_level(tape, z_high, z_low);
      out["val_clr"] = clr.scalar();
      out["val_loss"] = combined_pretrain_loss(plan_.lambda, clr, vae.total).scalar();
      out["val_alignment"] = mean_cosine(z_low.value(), val_target);
    }
    return out;
  }

  Phase phase_;
  Encoder& encoder_;
  Decoder& decoder_;
  Transmitter* transmitter_;
  TrainPlan plan_;
  ClrKind kind_;
  Rng rng_;
  Rng critic_rng_;
  Critic critic_;
  Adamax optimizer_;
  Adamax critic_optimizer_;
  std::vector<Parameter*> params_;
  Index critic_updates_ = 0;
  Index generator_updates_ = 0;
  EpochSink sink_;
};

// -------------------------------------------------------- fine-tuning

struct LowModel {
  Encoder* encoder;
  Transmitter* transmitter;  // null or identity: skipped
  MultiTaskRegressor* regressor;
};

Var forward(Tape& tape, const LowModel& m, const Var& x, const ForwardContext& ctx) {
  Encoded e = m.encoder->encode(tape, x, ctx);
  Var z = e.z;
  if (m.transmitter) z = m.transmitter->transmit(tape, z, ctx);
  return m.regressor->predict(tape, z, ctx);
}

Real validation_si_mse(const LowModel& m, const DomainDataset& val) {
  Tape tape;
  Var pred = forward(tape, m, tape.constant(val.features), ForwardContext::eval());
  return si_mse({*val.labels, *val.label_mask}, pred).scalar();
}

PhaseResult finetune_impl(Phase phase, const LowModel& model, const DomainDataset& train_in,
                          const DomainDataset& val_in, const TrainPlan& plan, bool gradual,
                          const EpochSink& sink) {
  plan.validate();
  if (!train_in.has_labels() || !val_in.has_labels()) {
    throw DataError(std::string(phase_name(phase)) + ": labels are required");
  }
  const DomainDataset train = train_in.labeled_rows();
  const DomainDataset val = val_in.labeled_rows();
  if (train.size() == 0 || val.size() == 0) {
    throw DataError(std::string(phase_name(phase)) + ": no labeled rows to train or validate on");
  }

  std::vector<ParameterGroup> groups = model.encoder->groups();
  if (model.transmitter && !model.transmitter->identity()) {
    groups.push_back({"transmitter", model.transmitter->parameters()});
  }
  std::vector<std::string> names;
  for (const auto& g : groups) names.push_back(g.name);

  FreezeState state = FreezeState::all_frozen(names);
  if (!gradual) state.trainable.assign(groups.size(), true);
  for (std::size_t i = 0; i < groups.size(); ++i) groups[i].set_trainable(state.trainable[i]);
  model.regressor->set_trainable(true);

  std::vector<Real> group_lr(groups.size(), plan.lr);
  std::vector<Parameter*> all = model.regressor->parameters();
  for (auto& g : groups) all.insert(all.end(), g.params.begin(), g.params.end());

  PhaseResult result;
  result.phase = phase;
  Adamax optimizer;
  Rng rng(plan.seed);
  EarlyStopper stopper(plan.patience, plan.min_delta);
  result.initial_validation = validation_si_mse(model, val);
  result.best_validation = result.initial_validation;
  stopper.update(result.initial_validation);
  std::vector<Matrix> best = snapshot(all);

  int events = 0;
  Real alpha = plan.lr;
  const LabelBatch full{*train.labels, *train.label_mask};
  for (int epoch = 1; epoch <= plan.max_epochs; ++epoch) {
    if (gradual && epoch > plan.n_frozen) {
      const int post = epoch - 1 - plan.n_frozen;
      if (post % plan.n_unfreeze == 0 && state.any_frozen()) {
        const FreezeState next = unfreeze_top(state);
        for (std::size_t i = 0; i < groups.size(); ++i) {
          if (next.trainable[i] && !state.trainable[i]) {
            ++events;
            alpha = decayed_lr(plan.lr, plan.decay, events);
            group_lr[i] = alpha;
            groups[i].set_trainable(true);
            result.unfreeze_events.push_back(post);
            result.group_lrs.push_back(alpha);
          }
        }
        state = next;
      }
    }

    std::vector<Index> order = iota(train.size());
    rng.shuffle(order);
    Real loss_sum = 0;
    Index steps = 0;
    for (const auto& batch : batches(order, plan.batch_size)) {
      const std::vector<Parameter*> reg_params = model.regressor->parameters();
      zero_grads(trainable_only(all));
      Tape tape;
      ForwardContext ctx = ForwardContext::train(rng);
      ctx.zero_latent_noise = !plan.sample_latent;
      Var pred = forward(tape, model, tape.constant(take(train.features, batch)), ctx);
      Var loss = si_mse({take(full.y, batch), take(full.mask, batch)}, pred);
      tape.backward(loss);
      for (Parameter* p : reg_params) optimizer.step(*p, plan.lr);
      for (std::size_t g = 0; g < groups.size(); ++g) {
        if (!state.trainable[g]) continue;
        for (Parameter* p : groups[g].params) optimizer.step(*p, group_lr[g]);
      }
      loss_sum += loss.scalar();
      ++steps;
    }

    const Real v = validation_si_mse(model, val);
    EpochRecord rec;
    rec.phase = phase;
    rec.epoch = epoch;
    rec.lr = alpha;
    rec.unfrozen_blocks = state.unfrozen_count();
    rec.losses = {{"train_si_mse", loss_sum / static_cast<Real>(steps)}, {"val_si_mse", v}};
    result.trace.push_back(rec);
    if (sink) sink(rec);

    if (stopper.update(v)) {
      best = snapshot(all);
      result.best_epoch = epoch;
      result.best_validation = v;
    }
    if (stopper.stop()) {
      result.reason = StopReason::early_stop;
      break;
    }
  }
  restore(all, best);
  result.final_lr = alpha;
  return result;
}

}  // namespace

PhaseResult pretrain_high(Encoder& encoder, Decoder& decoder, const DomainDataset& unlabeled,
                          const DomainDataset& validation, const TrainPlan& plan,
                          const EpochSink& sink) {
  plan.validate();
  if (unlabeled.size() == 0) throw DataError("pretrain-high: no unlabeled samples");
  if (validation.size() == 0) throw DataError("pretrain-high: empty validation set");
  encoder.set_trainable(true);
  decoder.set_trainable(true);
  VaePhase phase(Phase::pretrain_high, encoder, decoder, nullptr, plan);
  phase.set_sink(sink);
  const std::vector<Index> partner(static_cast<std::size_t>(unlabeled.size()), -1);
  return phase.run(unlabeled.features, partner, Matrix(), Matrix(), validation.features, Matrix());
}

PhaseResult finetune_high(Encoder& encoder, MultiTaskRegressor& regressor, const DomainDataset& train,
                          const DomainDataset& validation, const TrainPlan& plan,
                          const EpochSink& sink) {
  PhaseResult r = finetune_impl(Phase::finetune_high, {&encoder, nullptr, &regressor}, train,
                                validation, plan, true, sink);
  encoder.set_trainable(false);
  return r;
}

PhaseResult pretrain_low(const LowPretrainData& data, Encoder& high_encoder, Encoder& encoder,
                         Decoder& decoder, Transmitter& transmitter, const TrainPlan& plan,
                         const EpochSink& sink) {
  plan.validate();
  const Index paired = data.pairs.size();
  const Index extra = data.low_only.rows();
  if (paired + extra == 0) throw DataError("pretrain-low: no training samples");
  if (paired == 0 && plan.lambda > 0 && plan.clr != ClrKind::none) {
    throw ConfigError("pretrain-low: lambda > 0 needs samples observed in both domains");
  }
  if (data.validation.size() == 0) throw DataError("pretrain-low: empty validation set");
  high_encoder.set_trainable(false);
  encoder.set_trainable(true);
  decoder.set_trainable(true);
  transmitter.set_trainable(true);

  const Index width = encoder.input_width();
  Matrix train_x(paired + extra, width);
  if (paired > 0) train_x.topRows(paired) = data.pairs.low;
  if (extra > 0) train_x.bottomRows(extra) = data.low_only;
  std::vector<Index> partner(static_cast<std::size_t>(paired + extra), -1);
  for (Index i = 0; i < paired; ++i) partner[static_cast<std::size_t>(i)] = i;

  Matrix target_mu, target_logvar;
  if (paired > 0) {
    Tape tape;
    Encoded e = high_encoder.encode(tape, tape.constant(data.pairs.high), ForwardContext::eval());
    target_mu = e.mu.value();
    target_logvar = e.logvar.value();
  }
  const Matrix val_target = high_encoder.encode_mean(data.validation.high);

  VaePhase phase(Phase::pretrain_low, encoder, decoder, &transmitter, plan);
  phase.set_sink(sink);
  return phase.run(train_x, partner, target_mu, target_logvar, data.validation.low, val_target);
}

PhaseResult finetune_low(Encoder& encoder, Transmitter& transmitter, MultiTaskRegressor& regressor,
                         const DomainDataset& train, const DomainDataset& validation,
                         const TrainPlan& plan, const EpochSink& sink) {
  return finetune_impl(Phase::finetune_low, {&encoder, &transmitter, &regressor}, train, validation,
                       plan, true, sink);
}

PhaseResult train_mlp(Encoder& encoder, MultiTaskRegressor& regressor, const DomainDataset& train,
                      const DomainDataset& validation, const TrainPlan& plan,
                      const EpochSink& sink) {
  return finetune_impl(Phase::finetune_low, {&encoder, nullptr, &regressor}, train, validation, plan,
                       false, sink);
}

Matrix predict(Encoder& encoder, Transmitter* transmitter, MultiTaskRegressor& regressor,
               const Matrix& x) {
  Tape tape;
  return forward(tape, {&encoder, transmitter, &regressor}, tape.constant(x), ForwardContext::eval())
      .value();
}

}  // namespace cleit
