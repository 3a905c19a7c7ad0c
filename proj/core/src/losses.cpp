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

#include "cleit/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cleit/error.hpp"
#include "cleit/ops.hpp"

namespace cleit {
namespace {

Matrix scalar_matrix(Real v) {
  Matrix m(1, 1);
  m(0, 0) = v;
  return m;
}

// Row-normalizes m; throws on a zero-norm row.
Matrix normalize_rows(const Matrix& m, ColVector& norms) {
  norms = m.rowwise().norm();
  for (Index i = 0; i < norms.size(); ++i) {
    if (!(norms(i) > 0)) {
      throw NumericError("contrastive_clr: latent row " + std::to_string(i) + " has zero norm");
    }
  }
  return m.array().colwise() / norms.array();
}

// Backward through u = v / |v| per row.
Matrix normalize_rows_backward(const Matrix& unit, const ColVector& norms, const Matrix& g) {
  const ColVector proj = unit.cwiseProduct(g).rowwise().sum();
  Matrix out = g - (unit.array().colwise() * proj.array()).matrix();
  return out.array().colwise() / norms.array();
}

Matrix squared_distances(const Matrix& a, const Matrix& b) {
  const ColVector an = a.rowwise().squaredNorm();
  const ColVector bn = b.rowwise().squaredNorm();
  Matrix d = -2.0 * a * b.transpose();
  d.colwise() += an;
  d.rowwise() += bn.transpose();
  return d.cwiseMax(0.0);
}

// Kernel values K and the derivative weights W = sum_s w_s k_s / sigma_s^2.
void kernel_blocks(const Matrix& a, const Matrix& b, const KernelSpec& kernel, Matrix& k, Matrix& w) {
  const Matrix d2 = squared_distances(a, b);
  k = Matrix::Zero(d2.rows(), d2.cols());
  w = Matrix::Zero(d2.rows(), d2.cols());
  const Real weight = 1.0 / static_cast<Real>(kernel.bandwidths.size());
  for (Real s2 : kernel.bandwidths) {
    const Matrix ks = (-d2.array() / (2.0 * s2)).exp().matrix();
    k += weight * ks;
    w += (weight / s2) * ks;
  }
}

}  // namespace

Var si_mse(const LabelBatch& batch, const Var& prediction) {
  const Matrix& yhat = prediction.value();
  if (batch.y.rows() != yhat.rows() || batch.y.cols() != yhat.cols() ||
      batch.mask.rows() != yhat.rows() || batch.mask.cols() != yhat.cols()) {
    throw DimensionError("si_mse: label, mask and prediction shapes differ");
  }
  const Index n = yhat.rows();
  if (n == 0) throw PreconditionError("si_mse: empty batch");
  const Matrix d = (batch.y - yhat).cwiseProduct(batch.mask);
  const ColVector kstar = batch.mask.rowwise().sum();
  const ColVector sums = d.rowwise().sum();
  Real total = 0.0;
  for (Index i = 0; i < n; ++i) {
    if (!(kstar(i) >= 1.0)) {
      throw PreconditionError("si_mse: row " + std::to_string(i) + " has no observed label");
    }
    total += d.row(i).squaredNorm() / kstar(i) - sums(i) * sums(i) / (kstar(i) * kstar(i));
  }
  Tape& t = prediction.tape();
  const Matrix mask = batch.mask;
  return t.record("si_mse", scalar_matrix(total / static_cast<Real>(n)), {prediction},
                  [&t, prediction, d, mask, kstar, sums, n](const Matrix& g) {
                    // dL/dyhat_ij = -m_ij * 2/(n k*) * (d_ij - S_i/k*)
                    Matrix centered = d.colwise() - (sums.array() / kstar.array()).matrix();
                    Matrix grad = centered.array().colwise() *
                                  (-2.0 / (static_cast<Real>(n) * kstar.array()));
                    t.accumulate_expr(prediction, g(0, 0) * grad.cwiseProduct(mask));
                  });
}

VaeTerms vae_loss(const Var& x, const Var& x_hat, const Var& mu, const Var& logvar) {
  if (x.rows() != x_hat.rows() || x.cols() != x_hat.cols()) {
    throw DimensionError("vae_loss: input and reconstruction shapes differ");
  }
  if (mu.rows() != logvar.rows() || mu.cols() != logvar.cols()) {
    throw DimensionError("vae_loss: mu and logvar shapes differ");
  }
  if (x.rows() == 0 || mu.rows() == 0) throw PreconditionError("vae_loss: empty batch");
  Tape& t = x.tape();

  const Matrix diff = x.value() - x_hat.value();
  const Real count = static_cast<Real>(diff.size());
  Var recon = t.record("vae_reconstruction", scalar_matrix(diff.squaredNorm() / count), {x, x_hat},
                       [&t, x, x_hat, diff, count](const Matrix& g) {
                         const Real c = 2.0 * g(0, 0) / count;
                         t.accumulate_expr(x, c * diff);
                         t.accumulate_expr(x_hat, -c * diff);
                       });

  const Matrix& m = mu.value();
  const Matrix& lv = logvar.value();
  const Matrix ev = lv.array().exp().matrix();
  const Real rows = static_cast<Real>(m.rows());
  const Real kl_value =
      0.5 * (m.array().square() + ev.array() - lv.array() - 1.0).sum() / rows;
  Var kl = t.record("vae_kl", scalar_matrix(kl_value), {mu, logvar},
                    [&t, mu, logvar, &m, ev, rows](const Matrix& g) {
                      t.accumulate_expr(mu, (g(0, 0) / rows) * m);
                      t.accumulate_expr(logvar, (0.5 * g(0, 0) / rows) * (ev.array() - 1.0).matrix());
                    });
  return {ops::add(recon, kl), recon, kl};
}

Var contrastive_clr(const Var& z_high, const Var& z_low, Real temperature) {
  if (z_high.rows() != z_low.rows() || z_high.cols() != z_low.cols()) {
    throw DimensionError("contrastive_clr: paired latent batches differ in shape");
  }
  const Index n = z_high.rows();
  if (n < 2) throw PreconditionError("contrastive_clr: needs at least 2 pairs");
  if (!(temperature > 0)) throw ConfigError("contrastive_clr: temperature must be positive");

  ColVector hn, ln;
  const Matrix hu = normalize_rows(z_high.value(), hn);
  const Matrix lu = normalize_rows(z_low.value(), ln);
  const Matrix s = (hu * lu.transpose()) / temperature;

  // log P_i over the 2(N-1) off-diagonal entries of row i and column i.
  ColVector log_p(n);
  Real total = 0.0;
  for (Index i = 0; i < n; ++i) {
    Real peak = -std::numeric_limits<Real>::infinity();
    for (Index k = 0; k < n; ++k) {
      if (k == i) continue;
      peak = std::max({peak, s(i, k), s(k, i)});
    }
    Real acc = 0.0;
    for (Index k = 0; k < n; ++k) {
      if (k == i) continue;
      acc += std::exp(s(i, k) - peak) + std::exp(s(k, i) - peak);
    }
    log_p(i) = peak + std::log(acc);
    total += log_p(i) - s(i, i);
  }
  Tape& t = z_high.tape();
  return t.record(
      "contrastive_clr", scalar_matrix(total / static_cast<Real>(n)), {z_high, z_low},
      [&t, z_high, z_low, hu, lu, hn, ln, s, log_p, n, temperature](const Matrix& g) {
        const Real inv_n = g(0, 0) / static_cast<Real>(n);
        Matrix gs = Matrix::Zero(n, n);
        for (Index a = 0; a < n; ++a) {
          for (Index b = 0; b < n; ++b) {
            if (a == b) {
              gs(a, b) = -inv_n;
            } else {
              // s(a, b) sits in P_a (as h_a.l_b) and in P_b (as l_b.h_a).
              gs(a, b) = inv_n * (std::exp(s(a, b) - log_p(a)) + std::exp(s(a, b) - log_p(b)));
            }
          }
        }
        gs /= temperature;
        if (z_high.requires_grad()) {
          t.accumulate(z_high, normalize_rows_backward(hu, hn, gs * lu));
        }
        if (z_low.requires_grad()) {
          t.accumulate(z_low, normalize_rows_backward(lu, ln, gs.transpose() * hu));
        }
      });
}

Real KernelSpec::operator()(const Eigen::Ref<const RowVector>& a,
                            const Eigen::Ref<const RowVector>& b) const {
  const Real d2 = (a - b).squaredNorm();
  Real v = 0.0;
  for (Real s2 : bandwidths) v += std::exp(-d2 / (2.0 * s2));
  return v / static_cast<Real>(bandwidths.size());
}

void KernelSpec::validate() const {
  if (bandwidths.empty()) throw ConfigError("kernel: bandwidth list is empty");
  for (Real s2 : bandwidths) {
    if (!(s2 > 0) || !std::isfinite(s2)) throw ConfigError("kernel: bandwidths must be positive");
  }
}

KernelSpec median_heuristic_kernel(const Matrix& a, const Matrix& b,
                                   const std::vector<Real>& multipliers) {
  Matrix pooled(a.rows() + b.rows(), a.cols());
  pooled << a, b;
  const Matrix d2 = squared_distances(pooled, pooled);
  std::vector<Real> off;
  off.reserve(static_cast<std::size_t>(pooled.rows() * (pooled.rows() - 1) / 2));
  for (Index i = 0; i < d2.rows(); ++i) {
    for (Index j = i + 1; j < d2.cols(); ++j) off.push_back(d2(i, j));
  }
  Real median = 1.0;
  if (!off.empty()) {
    auto mid = off.begin() + static_cast<std::ptrdiff_t>(off.size() / 2);
    std::nth_element(off.begin(), mid, off.end());
    median = *mid;
  }
  if (!(median > 0)) median = 1.0;
  KernelSpec spec;
  for (Real m : multipliers) spec.bandwidths.push_back(m * median);
  spec.validate();
  return spec;
}

Var mmd(const Var& a, const Var& b, const KernelSpec& kernel) {
  kernel.validate();
  if (a.cols() != b.cols()) throw DimensionError("mmd: sample widths differ");
  const Index n = a.rows();
  const Index m = b.rows();
  if (n < 1 || m < 1) throw PreconditionError("mmd: both samples need at least one row");
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  Matrix kaa, waa, kab, wab, kbb, wbb;
  kernel_blocks(av, av, kernel, kaa, waa);
  kernel_blocks(av, bv, kernel, kab, wab);
  kernel_blocks(bv, bv, kernel, kbb, wbb);
  const Real nn = static_cast<Real>(n);
  const Real mm = static_cast<Real>(m);
  const Real value = kaa.sum() / (nn * nn) - 2.0 * kab.sum() / (nn * mm) + kbb.sum() / (mm * mm);
  Tape& t = a.tape();
  return t.record(
      "mmd", scalar_matrix(value), {a, b},
      [&t, a, b, &av, &bv, waa, wab, wbb, nn, mm](const Matrix& g) {
        // d k(x, y) / dx = -w (x - y) for each kernel term.
        const Real s = g(0, 0);
        if (a.requires_grad()) {
          Matrix ga = (-2.0 / (nn * nn)) *
                      (av.array().colwise() * waa.rowwise().sum().array()).matrix();
          ga += (2.0 / (nn * nn)) * waa * av;
          ga += (2.0 / (nn * mm)) *
                (av.array().colwise() * wab.rowwise().sum().array()).matrix();
          ga -= (2.0 / (nn * mm)) * wab * bv;
          t.accumulate_expr(a, s * ga);
        }
        if (b.requires_grad()) {
          Matrix gb = (-2.0 / (mm * mm)) *
                      (bv.array().colwise() * wbb.rowwise().sum().array()).matrix();
          gb += (2.0 / (mm * mm)) * wbb * bv;
          gb += (2.0 / (nn * mm)) *
                (bv.array().colwise() * wab.colwise().sum().transpose().array()).matrix();
          gb -= (2.0 / (nn * mm)) * wab.transpose() * av;
          t.accumulate_expr(b, s * gb);
        }
      });
}

WganLosses wgan_losses(const Var& critic_high, const Var& critic_low) {
  if (critic_high.value().size() != critic_low.value().size()) {
    throw DimensionError("wgan_losses: critic output lengths differ");
  }
  Var mean_low = ops::mean(critic_low);
  return {ops::sub(mean_low, ops::mean(critic_high)), ops::scale(mean_low, -1.0)};
}

Var combined_pretrain_loss(Real lambda, const Var& clr, const Var& vae) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw ConfigError("lambda must lie in [0, 1], got " + std::to_string(lambda));
  }
  return ops::add(ops::scale(clr, lambda), ops::scale(vae, 1.0 - lambda));
}

Var critic_forward(const Var& x, const CriticWeights& critic) {
  Var h = ops::leaky_relu(ops::affine(x, critic.w1, critic.b1), critic.slope);
  return ops::affine(h, critic.w2, critic.b2);
}

Var gradient_penalty(const Matrix& points, const CriticWeights& critic, Real coefficient) {
  const Matrix& w1 = critic.w1.value();
  const Matrix& b1 = critic.b1.value();
  const Matrix& w2 = critic.w2.value();
  if (points.cols() != w1.rows() || w2.rows() != w1.cols() || w2.cols() != 1) {
    throw DimensionError("gradient_penalty: critic shapes do not match the input");
  }
  const Index n = points.rows();
  if (n < 1) throw PreconditionError("gradient_penalty: no points");

  Matrix h = points * w1;
  h.rowwise() += b1.row(0);
  const Matrix slope_mask = (h.array() > 0).select(Matrix::Ones(h.rows(), h.cols()),
                                                   Matrix::Constant(h.rows(), h.cols(), critic.slope));
  // v_i = a_i * w2^T, grad_x f(x_i) = v_i W1^T
  const Matrix v = slope_mask.array().rowwise() * w2.col(0).transpose().array();
  const Matrix grads = v * w1.transpose();
  const ColVector norms = grads.rowwise().norm();
  const Real nn = static_cast<Real>(n);
  const Real value = coefficient * (norms.array() - 1.0).square().sum() / nn;

  Tape& t = critic.w1.tape();
  const CriticWeights c = critic;
  return t.record("gradient_penalty", scalar_matrix(value), {c.w1, c.b1, c.w2, c.b2},
                  [&t, c, &w1, slope_mask, v, grads, norms, nn, coefficient](const Matrix& g) {
                    ColVector factor(norms.size());
                    for (Index i = 0; i < norms.size(); ++i) {
                      factor(i) = norms(i) > 0 ? 2.0 * coefficient * (norms(i) - 1.0) / (nn * norms(i)) : 0.0;
                    }
                    const Matrix q = (grads.array().colwise() * factor.array()).matrix() * g(0, 0);
                    if (c.w1.requires_grad()) t.accumulate_expr(c.w1, q.transpose() * v);
                    if (c.w2.requires_grad()) {
                      t.accumulate_expr(c.w2, (q * w1).cwiseProduct(slope_mask).colwise().sum().transpose());
                    }
                  });
}

}  // namespace cleit
