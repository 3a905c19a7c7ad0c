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

#ifndef CLEIT_MODELS_HPP
#define CLEIT_MODELS_HPP

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cleit/layers.hpp"
#include "cleit/losses.hpp"

namespace cleit {

/// Architecture widths and regularization shared by every stack.
struct ModelConfig {
  Index latent_dim = 128;
  std::vector<Index> encoder_widths{512, 256, 128};
  std::vector<Index> decoder_widths{128, 256, 512};
  std::vector<Index> transmitter_widths{128, 128};
  std::vector<Index> shared_widths{128, 128};
  std::vector<Index> head_widths{64, 16};  // followed by a sigmoid unit per task
  Real dropout = 0.1;
  Real layer_norm_eps = 1e-5;

  void validate() const;
};

nlohmann::json to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const nlohmann::json& j);

/// A contiguous run of parameters that freezes and unfreezes together.
struct ParameterGroup {
  std::string name;
  std::vector<Parameter*> params;

  void set_trainable(bool trainable);
  bool trainable() const;
};

/// Ordered trainable flags, index 0 nearest the input.
struct FreezeState {
  std::vector<std::string> blocks;
  std::vector<bool> trainable;

  bool any_frozen() const;
  Index unfrozen_count() const;
  static FreezeState all_frozen(std::vector<std::string> blocks);
};

/// Releases the frozen block nearest the output. With nothing frozen the
/// state is returned unchanged and a warning is logged.
FreezeState unfreeze_top(const FreezeState& state);

struct Encoded {
  Var z;
  Var mu;
  Var logvar;
};

/// Stochastic encoder: dense blocks (middle: SELU + layer norm + dropout,
/// last: linear + layer norm) followed by a Gaussian head.
class Encoder {
 public:
  Encoder() = default;
  Encoder(std::string name, Index input_width, const ModelConfig& config, Rng& init);

  // Train mode samples z via reparameterization; eval mode returns z = mu.
  Encoded encode(Tape& tape, const Var& x, const ForwardContext& ctx);
  Matrix encode_mean(const Matrix& x);

  Index input_width() const { return input_width_; }
  Index latent_dim() const { return head_.latent_dim(); }
  const std::string& name() const { return name_; }

  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;
  // Input side first; the Gaussian head belongs to the last group.
  std::vector<ParameterGroup> groups();
  void set_trainable(bool trainable);

 private:
  std::string name_;
  Index input_width_ = 0;
  std::vector<DenseBlock> blocks_;
  GaussianHead head_;
};

class Decoder {
 public:
  Decoder() = default;
  Decoder(std::string name, Index output_width, const ModelConfig& config, Rng& init);

  Var decode(Tape& tape, const Var& z, const ForwardContext& ctx);
  Index output_width() const { return output_width_; }

  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;
  void set_trainable(bool trainable);

 private:
  Index output_width_ = 0;
  std::vector<DenseBlock> blocks_;
};

/// Maps low-domain latents toward the high-domain embedding. In identity
/// mode it has no parameters and returns its input.
class Transmitter {
 public:
  Transmitter() = default;
  Transmitter(std::string name, const ModelConfig& config, Rng& init, bool identity = false);

  Var transmit(Tape& tape, const Var& z, const ForwardContext& ctx);
  Matrix transmit(const Matrix& z);
  bool identity() const { return identity_; }

  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;
  void set_trainable(bool trainable);
  std::vector<DenseBlock>& blocks() { return blocks_; }

 private:
  bool identity_ = true;
  Index width_ = 0;
  std::vector<DenseBlock> blocks_;
};

/// Shared trunk plus one small sigmoid head per task.
class MultiTaskRegressor {
 public:
  MultiTaskRegressor() = default;
  MultiTaskRegressor(std::string name, Index tasks, const ModelConfig& config, Rng& init);

  Var predict(Tape& tape, const Var& z, const ForwardContext& ctx);
  Matrix predict(const Matrix& z);
  Index tasks() const { return static_cast<Index>(heads_.size()); }

  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;
  void set_trainable(bool trainable);

 private:
  Index input_width_ = 0;
  std::vector<DenseBlock> shared_;
  std::vector<std::vector<DenseBlock>> heads_;
};

/// Two-layer leaky-ReLU critic used by the WGAN transmission loss.
class Critic {
 public:
  Critic() = default;
  Critic(std::string name, Index input_width, Index hidden, Rng& init);

  CriticWeights bind(Tape& tape);
  std::vector<Parameter*> parameters();
  void set_trainable(bool trainable);

 private:
  Parameter w1_, b1_, w2_, b2_;
};

Index parameter_count(const std::vector<const Parameter*>& params);

// Deep copies of parameter values, for bit-identity checks and restores.
std::vector<Matrix> snapshot(const std::vector<Parameter*>& params);
void restore(const std::vector<Parameter*>& params, const std::vector<Matrix>& values);
bool identical(const std::vector<Parameter*>& params, const std::vector<Matrix>& values);

void zero_grads(const std::vector<Parameter*>& params);

template <typename... Lists>
std::vector<Parameter*> concat_params(Lists&&... lists) {
  std::vector<Parameter*> out;
  (out.insert(out.end(), lists.begin(), lists.end()), ...);
  return out;
}

}  // namespace cleit

#endif  // CLEIT_MODELS_HPP
