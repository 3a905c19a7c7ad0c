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

#ifndef CLEIT_LOSSES_HPP
#define CLEIT_LOSSES_HPP

#include <vector>

#include "cleit/tape.hpp"

namespace cleit {

/// Ground-truth scores with availability mask (1 = observed, 0 = NA).
struct LabelBatch {
  Matrix y;
  Matrix mask;

  Index tasks() const { return y.cols(); }
};

/// Masked scale-invariant MSE, averaged over rows. Per row with observed
/// residuals d and k* observed tasks: sum(d^2)/k* - (sum d)^2/k*^2.
/// Throws PreconditionError for a row without observed entries.
Var si_mse(const LabelBatch& batch, const Var& prediction);

struct VaeTerms {
  Var total;
  Var reconstruction;  // mean squared error over all elements
  Var kl;              // KL to N(0, I), summed over latent dims, averaged over rows
};

VaeTerms vae_loss(const Var& x, const Var& x_hat, const Var& mu, const Var& logvar);

/// Cross-level contrastive loss over positive pairs (z_high[i], z_low[i]).
///
/// For each i, -log(exp(s(h_i, l_i)) / P_i) where P_i sums exp(s(h_i, l_k))
/// and exp(s(l_i, h_k)) over k != i, s is cosine similarity divided by
/// `temperature`. The positive pair is not part of P_i, so values below
/// zero are possible. Requires N >= 2 and non-zero rows.
Var contrastive_clr(const Var& z_high, const Var& z_low, Real temperature = 1.0);

/// Equal-weight mixture of RBF kernels exp(-|a-b|^2 / (2 sigma^2)); the
/// entries of `bandwidths` are sigma^2 values.
struct KernelSpec {
  std::vector<Real> bandwidths;

  Real operator()(const Eigen::Ref<const RowVector>& a, const Eigen::Ref<const RowVector>& b) const;
  void validate() const;
};

// Bandwidths = median pairwise squared distance of the pooled rows times
// each multiplier.
KernelSpec median_heuristic_kernel(const Matrix& a, const Matrix& b,
                                   const std::vector<Real>& multipliers = {0.25, 0.5, 1.0, 2.0, 4.0});

/// Biased (V-statistic) squared MMD between the row sets of a and b.
Var mmd(const Var& a, const Var& b, const KernelSpec& kernel);

struct WganLosses {
  Var critic;     // mean(critic_low) - mean(critic_high), no penalty
  Var generator;  // -mean(critic_low)
};

WganLosses wgan_losses(const Var& critic_high, const Var& critic_low);

/// lambda * clr + (1 - lambda) * vae; lambda must lie in [0, 1].
Var combined_pretrain_loss(Real lambda, const Var& clr, const Var& vae);

/// Parameters of a one-hidden-layer leaky-ReLU critic f(x) = lrelu(x W1 + b1) w2 + b2.
struct CriticWeights {
  Var w1;
  Var b1;
  Var w2;
  Var b2;
  Real slope = 0.2;
};

Var critic_forward(const Var& x, const CriticWeights& critic);

/// Gradient penalty coefficient * mean_i (|grad_x f(x_i)| - 1)^2 at the rows
/// of `points`, differentiable with respect to the critic weights.
Var gradient_penalty(const Matrix& points, const CriticWeights& critic, Real coefficient);

}  // namespace cleit

#endif  // CLEIT_LOSSES_HPP
