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

#ifndef CLEIT_PIPELINE_HPP
#define CLEIT_PIPELINE_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "cleit/data.hpp"
#include "cleit/models.hpp"

namespace cleit {

enum class Phase { pretrain_high, finetune_high, pretrain_low, finetune_low };

// Hyphenated CLI spelling, e.g. "pretrain-low".
std::string_view phase_name(Phase phase);

/// Cross-level regularization used while pre-training the low domain.
enum class ClrKind { contrastive, mmd, wgan, none };

std::string_view to_string(ClrKind kind);
ClrKind parse_clr_kind(std::string_view text);

struct WganConfig {
  int critic_steps = 5;
  Real gradient_penalty = 10.0;
  Index critic_hidden = 64;
};

/// Hyperparameters of one training phase.
struct TrainPlan {
  Phase phase = Phase::pretrain_high;
  Index batch_size = 64;
  Real lr = 5e-3;
  int max_epochs = 500;
  int patience = 10;
  Real min_delta = 1e-5;

  // Low-domain pre-training.
  ClrKind clr = ClrKind::contrastive;
  Real lambda = 0.8;
  Real temperature = 1.0;
  // High-domain targets are the encoder mean (true) or a sample (false).
  bool latent_mean_target = true;
  std::vector<Real> mmd_multipliers{0.25, 0.5, 1.0, 2.0, 4.0};
  WganConfig wgan;

  // Fine-tuning (gradual unfreezing).
  Real decay = 0.8;
  int n_frozen = 5;
  int n_unfreeze = 5;
  // Regressor input during training: a reparameterized sample (true) or the
  // encoder mean (false). Prediction always uses the mean.
  bool sample_latent = false;

  std::uint64_t seed = 0;

  static TrainPlan defaults(Phase phase);
  void validate() const;
};

/// Tracks the best validation loss; stop() turns true after `patience`
/// consecutive evaluations that fail to beat it by more than min_delta.
class EarlyStopper {
 public:
  EarlyStopper(int patience, Real min_delta);

  // Returns true when this value improved on the best so far.
  bool update(Real value);
  bool stop() const { return bad_ >= patience_; }
  Real best() const { return best_; }
  int bad_evaluations() const { return bad_; }

 private:
  int patience_;
  Real min_delta_;
  Real best_;
  int bad_ = 0;
};

struct EpochRecord {
  Phase phase = Phase::pretrain_high;
  int epoch = 0;  // 1-based; 0 is the pre-training baseline evaluation
  std::map<std::string, Real> losses;
  Real lr = 0.0;
  Index unfrozen_blocks = 0;
};

nlohmann::json to_json(const EpochRecord& record);

using EpochSink = std::function<void(const EpochRecord&)>;

enum class StopReason { early_stop, max_epochs };
std::string_view to_string(StopReason reason);

struct PhaseResult {
  Phase phase = Phase::pretrain_high;
  std::vector<EpochRecord> trace;  // one entry per training epoch
  StopReason reason = StopReason::max_epochs;
  Real initial_validation = 0.0;
  Real best_validation = 0.0;
  int best_epoch = 0;

  // Fine-tuning: unfreeze events as epoch indices counted after the frozen
  // prologue, and the learning rate assigned to each released group.
  std::vector<int> unfreeze_events;
  std::vector<Real> group_lrs;
  Real final_lr = 0.0;

  // Low-domain pre-training diagnostics.
  Real initial_alignment = 0.0;
  Real final_alignment = 0.0;
  Index critic_updates = 0;
  Index generator_updates = 0;
};

nlohmann::json to_json(const PhaseResult& result);

/// Learning rate after `events` unfreeze events: lr0 * decay^events.
Real decayed_lr(Real lr0, Real decay, int events);

/// Step 1: VAE pre-training of the high-domain encoder. `validation` is
/// evaluated in eval mode; early stopping tracks its VAE loss.
PhaseResult pretrain_high(Encoder& encoder, Decoder& decoder, const DomainDataset& unlabeled,
                          const DomainDataset& validation, const TrainPlan& plan,
                          const EpochSink& sink = {});

/// Step 2: multi-task fine-tuning with gradual unfreezing. The encoder is
/// left frozen on return.
PhaseResult finetune_high(Encoder& encoder, MultiTaskRegressor& regressor, const DomainDataset& train,
                          const DomainDataset& validation, const TrainPlan& plan,
                          const EpochSink& sink = {});

/// Inputs of step 3. Rows of `pairs` feed both the VAE and the cross-level
/// term; `low_only` rows (may be empty) feed the VAE term alone.
struct LowPretrainData {
  PairedDataset pairs;
  Matrix low_only;
  PairedDataset validation;
};

/// Step 3: lambda * L_clr(F(z_low), z_high) + (1 - lambda) * L_VAE with the
/// high encoder frozen in eval mode.
PhaseResult pretrain_low(const LowPretrainData& data, Encoder& high_encoder, Encoder& encoder,
                         Decoder& decoder, Transmitter& transmitter, const TrainPlan& plan,
                         const EpochSink& sink = {});

/// Step 4: encoder -> transmitter -> inherited regressor, fine-tuned with
/// the same schedule as step 2 (transmitter released first).
PhaseResult finetune_low(Encoder& encoder, Transmitter& transmitter, MultiTaskRegressor& regressor,
                         const DomainDataset& train, const DomainDataset& validation,
                         const TrainPlan& plan, const EpochSink& sink = {});

/// Baseline: encoder + regressor trained jointly from scratch, all layers
/// trainable from the first epoch.
PhaseResult train_mlp(Encoder& encoder, MultiTaskRegressor& regressor, const DomainDataset& train,
                      const DomainDataset& validation, const TrainPlan& plan,
                      const EpochSink& sink = {});

/// Eval-mode predictions of a low-domain model; pass nullptr to skip the
/// transmitter.
Matrix predict(Encoder& encoder, Transmitter* transmitter, MultiTaskRegressor& regressor,
               const Matrix& x);

/// Mean row-wise cosine similarity.
Real mean_cosine(const Matrix& a, const Matrix& b);

}  // namespace cleit

#endif  // CLEIT_PIPELINE_HPP
