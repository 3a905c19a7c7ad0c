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

#include "cleit/models.hpp"

#include <cmath>
#include <cstring>
#include <iostream>

#include "cleit/error.hpp"
#include "cleit/ops.hpp"

namespace cleit {
using nlohmann::json;

void ModelConfig::validate() const {
  auto check = [](const std::vector<Index>& widths, const char* what, bool allow_empty) {
    if (!allow_empty && widths.empty()) throw ConfigError(std::string(what) + " must not be empty");
    for (Index w : widths) {
      if (w <= 0) throw ConfigError(std::string(what) + " widths must be positive");
    }
  };
  if (latent_dim <= 0) throw ConfigError("latent_dim must be positive");
  check(encoder_widths, "encoder_widths", false);
  check(decoder_widths, "decoder_widths", true);
  check(transmitter_widths, "transmitter_widths", false);
  check(shared_widths, "shared_widths", true);
  check(head_widths, "head_widths", true);
  if (transmitter_widths.back() != latent_dim) {
    throw ConfigError("transmitter output width must equal latent_dim");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
  if (!(layer_norm_eps > 0)) throw ConfigError("layer_norm_eps must be positive");
}

json to_json(const ModelConfig& c) {
  return {{"latent_dim", c.latent_dim},
          {"encoder_widths", c.encoder_widths},
          {"decoder_widths", c.decoder_widths},
          {"transmitter_widths", c.transmitter_widths},
          {"shared_widths", c.shared_widths},
          {"head_widths", c.head_widths},
          {"dropout", c.dropout},
          {"layer_norm_eps", c.layer_norm_eps}};
}

ModelConfig model_config_from_json(const json& j) {
  ModelConfig c;
  c.latent_dim = j.value("latent_dim", c.latent_dim);
  c.encoder_widths = j.value("encoder_widths", c.encoder_widths);
  c.decoder_widths = j.value("decoder_widths", c.decoder_widths);
  c.transmitter_widths = j.value("transmitter_widths", c.transmitter_widths);
  c.shared_widths = j.value("shared_widths", c.shared_widths);
  c.head_widths = j.value("head_widths", c.head_widths);
  c.dropout = j.value("dropout", c.dropout);
  c.layer_norm_eps = j.value("layer_norm_eps", c.layer_norm_eps);
  return c;
}

void ParameterGroup::set_trainable(bool trainable) {
  for (Parameter* p : params) p->trainable = trainable;
}

bool ParameterGroup::trainable() const {
  return !params.empty() && params.front()->trainable;
}

bool FreezeState::any_frozen() const {
  for (bool t : trainable) {
    if (!t) return true;
  }
  return false;
}

Index FreezeState::unfrozen_count() const {
  Index n = 0;
  for (bool t : trainable) n += t ? 1 : 0;
  return n;
}

FreezeState FreezeState::all_frozen(std::vector<std::string> blocks) {
  FreezeState s;
  s.trainable.assign(blocks.size(), false);
  s.blocks = std::move(blocks);
  return s;
}

FreezeState unfreeze_top(const FreezeState& state) {
  FreezeState next = state;
  for (std::size_t i = next.trainable.size(); i-- > 0;) {
    if (!next.trainable[i]) {
      next.trainable[i] = true;
      return next;
    }
  }
  std::clog << "warning: unfreeze_top called with every block already trainable\n";
  return next;
}

// ---------------------------------------------------------------- Encoder

Encoder::Encoder(std::string name, Index input_width, const ModelConfig& config, Rng& init)
    : name_(std::move(name)), input_width_(input_width) {
  if (input_width <= 0) throw ConfigError(name_ + ": input width must be positive");
  config.validate();
  Index in = input_width;
  const std::size_t n = config.encoder_widths.size();
  for (std::size_t i = 0; i < n; ++i) {
    const bool last = i + 1 == n;
    DenseBlockSpec spec{in,
                        config.encoder_widths[i],
                        last ? Activation::linear : Activation::selu,
                        true,
                        last ? 0.0 : config.dropout,
                        config.layer_norm_eps};
    blocks_.emplace_back(name_ + ".block" + std::to_string(i), spec, init);
    in = config.encoder_widths[i];
  }
  head_ = GaussianHead(name_ + ".head", in, config.latent_dim, init);
}

Encoded Encoder::encode(Tape& tape, const Var& x, const ForwardContext& ctx) {
  if (x.cols() != input_width_) {
    throw DimensionError(name_ + ": input width " + std::to_string(x.cols()) + ", expected " +
                         std::to_string(input_width_));
  }
  Var h = x;
  for (DenseBlock& b : blocks_) h = b.forward(tape, h, ctx);
  GaussianOutput g = head_.forward(tape, h);
  if (ctx.mode == Mode::eval) return {g.mu, g.mu, g.logvar};
  if (ctx.zero_latent_noise) {
    return {reparameterize_with_noise(g.mu, g.logvar, Matrix::Zero(g.mu.rows(), g.mu.cols())), g.mu,
            g.logvar};
  }
  if (ctx.rng == nullptr) throw PreconditionError(name_ + ": train mode requires an rng");
  return {reparameterize(g.mu, g.logvar, *ctx.rng), g.mu, g.logvar};
}

Matrix Encoder::encode_mean(const Matrix& x) {
  Tape tape;
  return encode(tape, tape.constant(x), ForwardContext::eval()).mu.value();
}

std::vector<Parameter*> Encoder::parameters() {
  std::vector<Parameter*> out;
  for (DenseBlock& b : blocks_) {
    auto ps = b.parameters();
    out.insert(out.end(), ps.begin(), ps.end());
  }
  auto hs = head_.parameters();
  out.insert(out.end(), hs.begin(), hs.end());
  return out;
}

std::vector<const Parameter*> Encoder::parameters() const {
  std::vector<const Parameter*> out;
  for (const DenseBlock& b : blocks_) {
    auto ps = b.parameters();
    out.insert(out.end(), ps.begin(), ps.end());
  }
  auto hs = head_.parameters();
  out.insert(out.end(), hs.begin(), hs.end());
  return out;
}

std::vector<ParameterGroup> Encoder::groups() {
  std::vector<ParameterGroup> out;
  for (DenseBlock& b : blocks_) out.push_back({b.name(), b.parameters()});
  auto hs = head_.parameters();
  out.back().params.insert(out.back().params.end(), hs.begin(), hs.end());
  return out;
}

void Encoder::set_trainable(bool trainable) {
  for (Parameter* p : parameters()) p->trainable = trainable;
}

// ---------------------------------------------------------------- Decoder

Decoder::Decoder(std::string name, Index output_width, const ModelConfig& config, Rng& init)
    : output_width_(output_width) {
  if (output_width <= 0) throw ConfigError(name + ": output width must be positive");
  config.validate();
  Index in = config.latent_dim;
  for (std::size_t i = 0; i < config.decoder_widths.size(); ++i) {
    DenseBlockSpec spec{in, config.decoder_widths[i], Activation::selu, true, config.dropout,
                        config.layer_norm_eps};
    blocks_.emplace_back(name + ".block" + std::to_string(i), spec, init);
    in = config.decoder_widths[i];
  }
  blocks_.emplace_back(name + ".output",
                       DenseBlockSpec{in, output_width, Activation::linear, false, 0.0,
                                      config.layer_norm_eps},
                       init);
}

Var Decoder::decode(Tape& tape, const Var& z, const ForwardContext& ctx) {
  Var h = z;
  for (DenseBlock& b : blocks_) h = b.forward(tape, h, ctx);
  return h;
}

std::vector<Parameter*> Decoder::parameters() {
  std::vector<Parameter*> out;
  for (DenseBlock& b : blocks_) {
    auto ps = b.parameters();
    out.insert(out.end(), ps.begin(), ps.end());
  }
  return out;
}

std::vector<const Parameter*> Decoder::parameters() const {
  std::vector<const Parameter*> out;
  for (const DenseBlock& b : blocks_) {
    auto ps = b.parameters();
    out.insert(out.end(), ps.begin(), ps.end());
  }
  return out;
}

void Decoder::set_trainable(bool trainable) {
  for (Parameter* p : parameters()) p->trainable = trainable;
}

// ------------------------------------------------------------ Transmitter

Transmitter::Transmitter(std::string name, const ModelConfig& config, Rng& init, bool identity)
    : identity_(identity), width_(config.latent_dim) {
  config.validate();
  if (identity) return;
  Index in = config.latent_dim;
  const std::size_t n = config.transmitter_widths.size();
  for (std::size_t i = 0; i < n; ++i) {
    const bool last = i + 1 == n;
    DenseBlockSpec spec{in, config.transmitter_widths[i],
                        last ? Activation::linear : Activation::selu, last, 0.0,
                        config.layer_norm_eps};
    blocks_.emplace_back(name + ".block" + std::to_string(i), spec, init);
    in = config.transmitter_widths[i];
  }
}

Var Transmitter::transmit(Tape& tape, const Var& z, const ForwardContext& ctx) {
  if (z.cols() != width_) {
    throw DimensionError("transmitter: expected width " + std::to_string(width_));
  }
  if (identity_) return z;
  Var h = z;
  for (DenseBlock& b : blocks_) h = b.forward(tape, h, ctx);
  return h;
}

Matrix Transmitter::transmit(const Matrix& z) {
  if (identity_) return z;
  Tape tape;
  return transmit(tape, tape.constant(z), ForwardContext::eval()).value();
}

std::vector<Parameter*> Transmitter::parameters() {
  std::vector<Parameter*> out;
  for (DenseBlock& b : blocks_) {
    auto ps = b.parameters();
    out.insert(out.end(), ps.begin(), ps.end());
  }
  return out;
}

std::vector<const Parameter*> Transmitter::parameters() const {
  std::vector<const Parameter*> out;
  for (const DenseBlock& b : blocks_) {
    auto ps = b.parameters();
    out.insert(out.end(), ps.begin(), ps.end());
  }
  return out;
}

void Transmitter::set_trainable(bool trainable) {
  for (Parameter* p : parameters()) p->trainable = trainable;
}

// -------------------------------------------------------------- Regressor

MultiTaskRegressor::MultiTaskRegressor(std::string name, Index tasks, const ModelConfig& config,
                                       Rng& init)
    : input_width_(config.latent_dim) {
  if (tasks < 1) throw ConfigError(name + ": task count must be at least 1");
  config.validate();
  Index in = config.latent_dim;
  for (std::size_t i = 0; i < config.shared_widths.size(); ++i) {
    DenseBlockSpec spec{in, config.shared_widths[i], Activation::selu, false, config.dropout,
                        config.layer_norm_eps};
    shared_.emplace_back(name + ".shared" + std::to_string(i), spec, init);
    in = config.shared_widths[i];
  }
  const Index trunk = in;
  for (Index k = 0; k < tasks; ++k) {
    std::vector<DenseBlock> head;
    Index hin = trunk;
    const std::string prefix = name + ".task" + std::to_string(k);
    for (std::size_t i = 0; i < config.head_widths.size(); ++i) {
      DenseBlockSpec spec{hin, config.head_widths[i], Activation::selu, false, 0.0,
                          config.layer_norm_eps};
      head.emplace_back(prefix + ".layer" + std::to_string(i), spec, init);
      hin = config.head_widths[i];
    }
    head.emplace_back(prefix + ".output",
                      DenseBlockSpec{hin, 1, Activation::sigmoid, false, 0.0, config.layer_norm_eps},
                      init);
    heads_.push_back(std::move(head));
  }
}

Var MultiTaskRegressor::predict(Tape& tape, const Var& z, const ForwardContext& ctx) {
  if (z.cols() != input_width_) {
    throw DimensionError("regressor: expected latent width " + std::to_string(input_width_));
  }
  Var h = z;
  for (DenseBlock& b : shared_) h = b.forward(tape, h, ctx);
  std::vector<Var> outputs;
  outputs.reserve(heads_.size());
  for (auto& head : heads_) {
    Var o = h;
    for (DenseBlock& b : head) o = b.forward(tape, o, ctx);
    outputs.push_back(o);
  }
  return outputs.size() == 1 ? outputs.front() : ops::concat_cols(outputs);
}

Matrix MultiTaskRegressor::predict(const Matrix& z) {
  Tape tape;
  return predict(tape, tape.constant(z), ForwardContext::eval()).value();
}

std::vector<Parameter*> MultiTaskRegressor::parameters() {
  std::vector<Parameter*> out;
  auto add = [&out](DenseBlock& b) {
    auto ps = b.parameters();
    out.insert(out.end(), ps.begin(), ps.end());
  };
  for (DenseBlock& b : shared_) add(b);
  for (auto& head : heads_) {
    for (DenseBlock& b : head) add(b);
  }
  return out;
}

std::vector<const Parameter*> MultiTaskRegressor::parameters() const {
  std::vector<const Parameter*> out;
  auto add = [&out](const DenseBlock& b) {
    auto ps = b.parameters();
    out.insert(out.end(), ps.begin(), ps.end());
  };
  for (const DenseBlock& b : shared_) add(b);
  for (const auto& head : heads_) {
    for (const DenseBlock& b : head) add(b);
  }
  return out;
}

void MultiTaskRegressor::set_trainable(bool trainable) {
  for (Parameter* p : parameters()) p->trainable = trainable;
}

// ----------------------------------------------------------------- Critic

Critic::Critic(std::string name, Index input_width, Index hidden, Rng& init) {
  w1_ = {name + ".w1", Tensor(init.normal_matrix(input_width, hidden,
                                                 1.0 / std::sqrt(static_cast<Real>(input_width)))),
         true};
  b1_ = {name + ".b1", Tensor(1, hidden), true};
  w2_ = {name + ".w2", Tensor(init.normal_matrix(hidden, 1, 1.0 / std::sqrt(static_cast<Real>(hidden)))),
         true};
  b2_ = {name + ".b2", Tensor(1, 1), true};
}

CriticWeights Critic::bind(Tape& tape) {
  return {tape.parameter(w1_), tape.parameter(b1_), tape.parameter(w2_), tape.parameter(b2_), 0.2};
}

std::vector<Parameter*> Critic::parameters() { return {&w1_, &b1_, &w2_, &b2_}; }

void Critic::set_trainable(bool trainable) {
  for (Parameter* p : parameters()) p->trainable = trainable;
}

// ---------------------------------------------------------------- helpers

Index parameter_count(const std::vector<const Parameter*>& params) {
  Index n = 0;
  for (const Parameter* p : params) n += p->value().size();
  return n;
}

std::vector<Matrix> snapshot(const std::vector<Parameter*>& params) {
  std::vector<Matrix> out;
  out.reserve(params.size());
  for (const Parameter* p : params) out.push_back(p->value());
  return out;
}

void restore(const std::vector<Parameter*>& params, const std::vector<Matrix>& values) {
  if (params.size() != values.size()) throw PreconditionError("restore: snapshot size mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->value() = values[i];
}

bool identical(const std::vector<Parameter*>& params, const std::vector<Matrix>& values) {
  if (params.size() != values.size()) return false;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Matrix& a = params[i]->value();
    const Matrix& b = values[i];
    if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
    if (std::memcmp(a.data(), b.data(), sizeof(Real) * static_cast<std::size_t>(a.size())) != 0) {
      return false;
    }
  }
  return true;
}

void zero_grads(const std::vector<Parameter*>& params) {
  for (Parameter* p : params) p->tensor.zero_grad();
}

}  // namespace cleit
