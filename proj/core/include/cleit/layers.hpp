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

#ifndef CLEIT_LAYERS_HPP
#define CLEIT_LAYERS_HPP

#include <string>
#include <vector>

#include "cleit/rng.hpp"
#include "cleit/tape.hpp"

namespace cleit {

inline constexpr Real kSeluAlpha = 1.6732632423543772;
inline constexpr Real kSeluScale = 1.0507009873554805;
inline constexpr Real kLogVarMin = -10.0;
inline constexpr Real kLogVarMax = 10.0;

enum class Mode { train, eval };

/// Everything a forward pass needs besides parameters and inputs.
struct ForwardContext {
  Mode mode = Mode::eval;
  Rng* rng = nullptr;  // required in train mode
  // Reparameterization draws eta = 0 (z = mu) while dropout stays active.
  bool zero_latent_noise = false;

  static ForwardContext eval() { return {}; }
  static ForwardContext train(Rng& rng) { return {Mode::train, &rng, false}; }
};

Var selu(const Var& x);

// Per row: (x - mean) / sqrt(var + eps) * gamma + beta, population variance.
Var layer_norm(const Var& x, const Var& gamma, const Var& beta, Real eps = 1e-5);

// Inverted dropout. Eval mode returns x itself.
Var dropout(const Var& x, Real p, Mode mode, Rng& rng);
// Train-mode dropout with a caller-supplied keep mask (entries 0/1).
Var dropout_with_mask(const Var& x, const Matrix& keep, Real p);

// z = mu + exp(0.5 logvar) * eta, eta ~ N(0, 1) per element from rng.
Var reparameterize(const Var& mu, const Var& logvar, Rng& rng);
Var reparameterize_with_noise(const Var& mu, const Var& logvar, const Matrix& eta);

enum class Activation { selu, linear, sigmoid };

struct DenseBlockSpec {
  Index in = 0;
  Index out = 0;
  Activation activation = Activation::selu;
  bool layer_norm = false;
  Real dropout = 0.0;
  Real layer_norm_eps = 1e-5;
};

/// affine -> activation -> [layer norm] -> [dropout]
class DenseBlock {
 public:
  DenseBlock() = default;
  // LeCun-normal weights (stddev 1/sqrt(fan_in)), zero biases, unit gain.
  DenseBlock(std::string name, DenseBlockSpec spec, Rng& init);

  Var forward(Tape& tape, const Var& x, const ForwardContext& ctx);

  const DenseBlockSpec& spec() const { return spec_; }
  const std::string& name() const { return name_; }

  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;
  void set_trainable(bool trainable);
  bool trainable() const { return weight_.trainable; }

  Parameter& weight() { return weight_; }
  Parameter& bias() { return bias_; }
  Parameter& gain() { return gain_; }
  Parameter& shift() { return shift_; }

 private:
  std::string name_;
  DenseBlockSpec spec_;
  Parameter weight_;
  Parameter bias_;
  Parameter gain_;   // layer-norm gamma (empty without layer norm)
  Parameter shift_;  // layer-norm beta
};

struct GaussianOutput {
  Var mu;
  Var logvar;  // clamped to [kLogVarMin, kLogVarMax]
};

/// Maps a hidden vector to (mu, log sigma^2) of the latent distribution.
class GaussianHead {
 public:
  GaussianHead() = default;
  GaussianHead(std::string name, Index in, Index latent, Rng& init);

  GaussianOutput forward(Tape& tape, const Var& h);

  Index latent_dim() const { return mu_weight_.value().cols(); }
  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;
  void set_trainable(bool trainable);

 private:
  Parameter mu_weight_, mu_bias_, logvar_weight_, logvar_bias_;
};

}  // namespace cleit

#endif  // CLEIT_LAYERS_HPP
