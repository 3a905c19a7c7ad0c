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

#include "cleit/layers.hpp"

#include <cmath>

#include "cleit/error.hpp"
#include "cleit/ops.hpp"

namespace cleit {

Var selu(const Var& x) {
  Tape& t = x.tape();
  const Matrix& xv = x.value();
  Matrix y(xv.rows(), xv.cols());
  Matrix dy(xv.rows(), xv.cols());
  for (Index i = 0; i < xv.size(); ++i) {
    const Real v = xv.data()[i];
    if (v > 0) {
      y.data()[i] = kSeluScale * v;
      dy.data()[i] = kSeluScale;
    } else {
      const Real e = std::exp(v);
      y.data()[i] = kSeluScale * kSeluAlpha * (e - 1.0);
      dy.data()[i] = kSeluScale * kSeluAlpha * e;
    }
  }
  return t.record("selu", std::move(y), {x}, [&t, x, dy = std::move(dy)](const Matrix& g) {
    t.accumulate_expr(x, g.cwiseProduct(dy));
  });
}

Var layer_norm(const Var& x, const Var& gamma, const Var& beta, Real eps) {
  const Matrix& xv = x.value();
  const Index d = xv.cols();
  if (d < 1) throw DimensionError("layer_norm: zero-width input");
  if (gamma.rows() != 1 || gamma.cols() != d || beta.rows() != 1 || beta.cols() != d) {
    throw DimensionError("layer_norm: gain/bias width must equal the feature count");
  }
  if (!(eps > 0)) throw ConfigError("layer_norm: eps must be positive");

  const ColVector mean = xv.rowwise().mean();
  Matrix centered = xv.colwise() - mean;
  const ColVector var = centered.array().square().rowwise().mean();
  const ColVector inv_std = (var.array() + eps).rsqrt();
  Matrix xhat = centered.array().colwise() * inv_std.array();
  Matrix y = xhat.array().rowwise() * gamma.value().row(0).array();
  y.rowwise() += beta.value().row(0);

  Tape& t = x.tape();
  return t.record(
      "layer_norm", std::move(y), {x, gamma, beta},
      [&t, x, gamma, beta, xhat = std::move(xhat), inv_std](const Matrix& g) {
        if (gamma.requires_grad()) {
          t.accumulate_expr(gamma, g.cwiseProduct(xhat).colwise().sum());
        }
        if (beta.requires_grad()) t.accumulate_expr(beta, g.colwise().sum());
        if (x.requires_grad()) {
          const Matrix gh = g.array().rowwise() * gamma.value().row(0).array();
          const ColVector gh_mean = gh.rowwise().mean();
          const ColVector ghx_mean = gh.cwiseProduct(xhat).rowwise().mean();
          Matrix dx = gh.colwise() - gh_mean;
          dx -= (xhat.array().colwise() * ghx_mean.array()).matrix();
          dx = dx.array().colwise() * inv_std.array();
          t.accumulate(x, dx);
        }
      });
}

Var dropout_with_mask(const Var& x, const Matrix& keep, Real p) {
  if (keep.rows() != x.rows() || keep.cols() != x.cols()) {
    throw DimensionError("dropout: mask shape differs from input");
  }
  Matrix factor = keep / (1.0 - p);
  Matrix y = x.value().cwiseProduct(factor);
  Tape& t = x.tape();
  return t.record("dropout", std::move(y), {x},
                  [&t, x, factor = std::move(factor)](const Matrix& g) {
                    t.accumulate_expr(x, g.cwiseProduct(factor));
                  });
}

Var dropout(const Var& x, Real p, Mode mode, Rng& rng) {
  if (!(p >= 0.0 && p < 1.0)) throw ConfigError("dropout: p must lie in [0, 1)");
  if (mode == Mode::eval || p == 0.0) return x;
  Matrix keep(x.rows(), x.cols());
  for (Index i = 0; i < keep.size(); ++i) keep.data()[i] = rng.uniform() < p ? 0.0 : 1.0;
  return dropout_with_mask(x, keep, p);
}

Var reparameterize_with_noise(const Var& mu, const Var& logvar, const Matrix& eta) {
  if (mu.rows() != logvar.rows() || mu.cols() != logvar.cols() || eta.rows() != mu.rows() ||
      eta.cols() != mu.cols()) {
    throw DimensionError("reparameterize: mu, logvar and noise shapes differ");
  }
  Tape& t = mu.tape();
  const Var noise = t.constant(eta);
  const Var sigma = ops::exp(ops::scale(logvar, 0.5));
  return ops::add(mu, ops::mul(sigma, noise));
}

Var reparameterize(const Var& mu, const Var& logvar, Rng& rng) {
  return reparameterize_with_noise(mu, logvar, rng.normal_matrix(mu.rows(), mu.cols()));
}

DenseBlock::DenseBlock(std::string name, DenseBlockSpec spec, Rng& init)
    : name_(std::move(name)), spec_(spec) {
  if (spec.in <= 0 || spec.out <= 0) throw ConfigError("dense block " + name_ + ": widths must be positive");
  if (!(spec.dropout >= 0.0 && spec.dropout < 1.0)) {
    throw ConfigError("dense block " + name_ + ": dropout must lie in [0, 1)");
  }
  weight_ = {name_ + ".weight",
             Tensor(init.normal_matrix(spec.in, spec.out, 1.0 / std::sqrt(static_cast<Real>(spec.in)))),
             true};
  bias_ = {name_ + ".bias", Tensor(1, spec.out), true};
  if (spec.layer_norm) {
    gain_ = {name_ + ".ln_gain", Tensor(Matrix::Ones(1, spec.out)), true};
    shift_ = {name_ + ".ln_bias", Tensor(1, spec.out), true};
  }
}

Var DenseBlock::forward(Tape& tape, const Var& x, const ForwardContext& ctx) {
  if (x.cols() != spec_.in) {
    throw DimensionError(name_ + ": expected width " + std::to_string(spec_.in) + ", got " +
                         std::to_string(x.cols()));
  }
  Var h = ops::affine(x, tape.parameter(weight_), tape.parameter(bias_));
  switch (spec_.activation) {
    case Activation::selu:
      h = selu(h);
      break;
    case Activation::sigmoid:
      h = ops::sigmoid(h);
      break;
    case Activation::linear:
      break;
  }
  if (spec_.layer_norm) {
    h = layer_norm(h, tape.parameter(gain_), tape.parameter(shift_), spec_.layer_norm_eps);
  }
  if (spec_.dropout > 0.0 && ctx.mode == Mode::train) {
    if (ctx.rng == nullptr) throw PreconditionError(name_ + ": train mode requires an rng");
    h = dropout(h, spec_.dropout, ctx.mode, *ctx.rng);
  }
  return h;
}

std::vector<Parameter*> DenseBlock::parameters() {
  std::vector<Parameter*> out{&weight_, &bias_};
  if (spec_.layer_norm) {
    out.push_back(&gain_);
    out.push_back(&shift_);
  }
  return out;
}

std::vector<const Parameter*> DenseBlock::parameters() const {
  std::vector<const Parameter*> out{&weight_, &bias_};
  if (spec_.layer_norm) {
    out.push_back(&gain_);
    out.push_back(&shift_);
  }
  return out;
}

void DenseBlock::set_trainable(bool trainable) {
  for (Parameter* p : parameters()) p->trainable = trainable;
}

GaussianHead::GaussianHead(std::string name, Index in, Index latent, Rng& init) {
  if (in <= 0 || latent <= 0) throw ConfigError("gaussian head " + name + ": widths must be positive");
  const Real scale = 1.0 / std::sqrt(static_cast<Real>(in));
  mu_weight_ = {name + ".mu.weight", Tensor(init.normal_matrix(in, latent, scale)), true};
  mu_bias_ = {name + ".mu.bias", Tensor(1, latent), true};
  logvar_weight_ = {name + ".logvar.weight", Tensor(init.normal_matrix(in, latent, scale)), true};
  logvar_bias_ = {name + ".logvar.bias", Tensor(1, latent), true};
}

GaussianOutput GaussianHead::forward(Tape& tape, const Var& h) {
  Var mu = ops::affine(h, tape.parameter(mu_weight_), tape.parameter(mu_bias_));
  Var logvar = ops::affine(h, tape.parameter(logvar_weight_), tape.parameter(logvar_bias_));
  return {mu, ops::clamp(logvar, kLogVarMin, kLogVarMax)};
}

std::vector<Parameter*> GaussianHead::parameters() {
  return {&mu_weight_, &mu_bias_, &logvar_weight_, &logvar_bias_};
}

std::vector<const Parameter*> GaussianHead::parameters() const {
  return {&mu_weight_, &mu_bias_, &logvar_weight_, &logvar_bias_};
}

void GaussianHead::set_trainable(bool trainable) {
  for (Parameter* p : parameters()) p->trainable = trainable;
}

}  // namespace cleit
