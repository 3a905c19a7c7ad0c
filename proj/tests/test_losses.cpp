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

#include <gtest/gtest.h>

#include <cmath>

#include "cleit/error.hpp"
#include "cleit/grad_check.hpp"
#include "cleit/losses.hpp"
#include "cleit/ops.hpp"
#include "cleit/rng.hpp"
#include "helpers.hpp"

namespace cleit {
namespace {

using testing_util::row;
using testing_util::to_mat;

Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.begin()->size()));
  Index i = 0;
  for (const auto& r : rows) {
    Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

Matrix random_mask(Rng& rng, Index n, Index k, double rate) {
  Matrix m(n, k);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < k; ++j) m(i, j) = rng.uniform() < rate ? 0.0 : 1.0;
    m(i, static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(k)))) = 1.0;
  }
  return m;
}

// ------------------------------------------------------------------ si_mse

TEST(SiMse, PerfectPredictionIsZero) {
  Rng rng(1);
  Tape t;
  const Matrix y = rng.normal_matrix(3, 4);
  EXPECT_EQ(si_mse({y, Matrix::Ones(3, 4)}, t.constant(y)).scalar(), 0.0);
}

TEST(SiMse, HandEvaluatedExample) {
  Tape t;
  const double v = si_mse({mat({{0.2, 0.6}}), Matrix::Ones(1, 2)}, t.constant(mat({{0.4, 0.5}}))).scalar();
  EXPECT_NEAR(v, 0.0225, 1e-12);
}

TEST(SiMse, ShiftInvariance) {
  Rng rng(2);
  Tape t;
  const Matrix y = rng.normal_matrix(5, 6);
  const Matrix mask = random_mask(rng, 5, 6, 0.3);
  EXPECT_NEAR(si_mse({y, Matrix::Ones(5, 6)}, t.constant((y.array() + 0.37).matrix())).scalar(), 0.0, 1e-9);
  const Matrix pred = rng.normal_matrix(5, 6);
  Matrix shifted = pred;
  for (Index i = 0; i < 5; ++i) shifted.row(i).array() += rng.normal();
  EXPECT_NEAR(si_mse({y, mask}, t.constant(pred)).scalar(), si_mse({y, mask}, t.constant(shifted)).scalar(), 1e-9);
}

TEST(SiMse, MaskedEntriesAreIgnoredBitForBit) {
  Rng rng(3);
  Tape t;
  const Matrix y = rng.normal_matrix(4, 5);
  const Matrix mask = random_mask(rng, 4, 5, 0.4);
  const Matrix pred = rng.normal_matrix(4, 5);
  Matrix perturbed = pred;
  for (Index i = 0; i < perturbed.size(); ++i) {
    if (mask.data()[i] == 0) perturbed.data()[i] += 100.0 * rng.normal();
  }
  const double a = si_mse({y, mask}, t.constant(pred)).scalar();
  const double b = si_mse({y, mask}, t.constant(perturbed)).scalar();
  EXPECT_EQ(a, b);
}

TEST(SiMse, MatchesRowOracle) {
  Rng rng(4);
  Tape t;
  const Matrix y = rng.normal_matrix(6, 7), pred = rng.normal_matrix(6, 7);
  const Matrix mask = random_mask(rng, 6, 7, 0.5);
  double ref = 0;
  for (Index i = 0; i < 6; ++i) ref += oracle::si_mse_row(row(y, i), row(pred, i), row(mask, i));
  EXPECT_NEAR(si_mse({y, mask}, t.constant(pred)).scalar(), ref / 6.0, 1e-12);
}

TEST(SiMse, RowWithoutLabelsIsRejected) {
  Tape t;
  Matrix mask = Matrix::Ones(2, 3);
  mask.row(1).setZero();
  EXPECT_THROW(si_mse({Matrix::Zero(2, 3), mask}, t.constant(Matrix::Zero(2, 3))), PreconditionError);
}

// ------------------------------------------------------------------ vae

TEST(VaeLoss, VanishesAtPrior) {
  Rng rng(5);
  Tape t;
  const Matrix x = rng.normal_matrix(3, 4);
  VaeTerms v = vae_loss(t.constant(x), t.constant(x), t.constant(Matrix::Zero(3, 2)), t.constant(Matrix::Zero(3, 2)));
  EXPECT_EQ(v.total.scalar(), 0.0);
}

TEST(VaeLoss, UnitMeanKl) {
  Tape t;
  const Matrix x = Matrix::Ones(1, 3);
  VaeTerms v = vae_loss(t.constant(x), t.constant(x), t.constant(Matrix::Ones(1, 1)), t.constant(Matrix::Zero(1, 1)));
  EXPECT_NEAR(v.total.scalar(), 0.5, 1e-15);
}

TEST(VaeLoss, MatchesTermByTermOracle) {
  Rng rng(6);
  Tape t;
  const Matrix x = rng.normal_matrix(3, 5), xh = rng.normal_matrix(3, 5);
  const Matrix mu = rng.normal_matrix(3, 2), lv = rng.normal_matrix(3, 2);
  double mse = 0;
  for (Index i = 0; i < x.size(); ++i) mse += std::pow(x.data()[i] - xh.data()[i], 2);
  mse /= static_cast<double>(x.size());
  double kl = 0;
  for (Index i = 0; i < mu.size(); ++i) {
    kl += 0.5 * (mu.data()[i] * mu.data()[i] + std::exp(lv.data()[i]) - lv.data()[i] - 1.0);
  }
  kl /= 3.0;
  VaeTerms v = vae_loss(t.constant(x), t.constant(xh), t.constant(mu), t.constant(lv));
  EXPECT_NEAR(v.reconstruction.scalar(), mse, 1e-10);
  EXPECT_NEAR(v.kl.scalar(), kl, 1e-10);
  EXPECT_NEAR(v.total.scalar(), mse + kl, 1e-10);
}

// ------------------------------------------------------------ contrastive

TEST(Contrastive, OrthogonalPairsGiveLn2MinusOne) {
  Tape t;
  const Matrix z = mat({{1, 0}, {0, 1}});
  EXPECT_NEAR(contrastive_clr(t.constant(z), t.constant(z)).scalar(), std::log(2.0) - 1.0, 1e-9);
  EXPECT_NEAR(std::log(2.0) - 1.0, -0.30685, 1e-5);
}

TEST(Contrastive, IdenticalVectorsGiveLn2) {
  Tape t;
  const Matrix z = mat({{0.3, -1.2}, {0.3, -1.2}});
  EXPECT_NEAR(contrastive_clr(t.constant(z), t.constant(z)).scalar(), std::log(2.0), 1e-9);
}

TEST(Contrastive, MatchesDirectOracle) {
  Rng rng(7);
  Tape t;
  const Matrix zh = rng.normal_matrix(6, 4), zl = rng.normal_matrix(6, 4);
  EXPECT_NEAR(contrastive_clr(t.constant(zh), t.constant(zl)).scalar(),
              oracle::contrastive(to_mat(zh), to_mat(zl)), 1e-12);
}

TEST(Contrastive, ScaleAndPermutationInvariance) {
  Rng rng(8);
  Tape t;
  const Matrix zh = rng.normal_matrix(5, 3), zl = rng.normal_matrix(5, 3);
  const double base = contrastive_clr(t.constant(zh), t.constant(zl)).scalar();
  EXPECT_NEAR(contrastive_clr(t.constant(zh * 3.7), t.constant(zl * 0.02)).scalar(), base, 1e-9);
  const std::vector<Index> perm{3, 0, 4, 1, 2};
  Matrix ph(5, 3), pl(5, 3);
  for (Index i = 0; i < 5; ++i) {
    ph.row(i) = zh.row(perm[static_cast<std::size_t>(i)]);
    pl.row(i) = zl.row(perm[static_cast<std::size_t>(i)]);
  }
  EXPECT_NEAR(contrastive_clr(t.constant(ph), t.constant(pl)).scalar(), base, 1e-12);
}

TEST(Contrastive, Errors) {
  Tape t;
  EXPECT_THROW(contrastive_clr(t.constant(Matrix::Ones(1, 3)), t.constant(Matrix::Ones(1, 3))), PreconditionError);
  EXPECT_THROW(contrastive_clr(t.constant(mat({{1, 0}, {0, 0}})), t.constant(mat({{1, 0}, {0, 1}}))), NumericError);
  EXPECT_THROW(contrastive_clr(t.constant(Matrix::Ones(2, 3)), t.constant(Matrix::Ones(3, 3))), DimensionError);
}

// --------------------------------------------------------------------- mmd

TEST(Mmd, IdenticalSamplesGiveZero) {
  Rng rng(9);
  Tape t;
  const Matrix a = rng.normal_matrix(7, 3);
  EXPECT_NEAR(mmd(t.constant(a), t.constant(a), median_heuristic_kernel(a, a)).scalar(), 0.0, 1e-12);
}

TEST(Mmd, TwoPointHandValue) {
  Tape t;
  const double v = mmd(t.constant(Matrix::Zero(1, 1)), t.constant(Matrix::Ones(1, 1)), KernelSpec{{1.0}}).scalar();
  EXPECT_NEAR(v, 2.0 * (1.0 - std::exp(-0.5)), 1e-12);
  EXPECT_NEAR(v, 0.78694, 1e-5);
}

TEST(Mmd, MatchesDoubleLoopOracleAndIsSymmetric) {
  Rng rng(10);
  Tape t;
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix a = rng.normal_matrix(6, 3), b = (rng.normal_matrix(4, 3).array() + 0.5).matrix();
    const KernelSpec k = median_heuristic_kernel(a, b);
    const double v = mmd(t.constant(a), t.constant(b), k).scalar();
    EXPECT_GE(v, 0.0);
    EXPECT_NEAR(v, oracle::mmd(to_mat(a), to_mat(b), k.bandwidths), 1e-9);
    EXPECT_NEAR(mmd(t.constant(b), t.constant(a), k).scalar(), v, 1e-12);
  }
}

TEST(Mmd, MedianHeuristicUsesMultipliers) {
  const Matrix a = mat({{0}, {1}}), b = mat({{3}});
  const KernelSpec k = median_heuristic_kernel(a, b, {1.0, 2.0});
  ASSERT_EQ(k.bandwidths.size(), 2u);
  EXPECT_DOUBLE_EQ(k.bandwidths[1], 2.0 * k.bandwidths[0]);
  EXPECT_THROW(KernelSpec{{}}.validate(), ConfigError);
  EXPECT_THROW(KernelSpec{{-1.0}}.validate(), ConfigError);
}

// -------------------------------------------------------------------- wgan

TEST(Wgan, MeanDifferences) {
  Tape t;
  WganLosses eq = wgan_losses(t.constant(mat({{0.3}, {0.7}})), t.constant(mat({{0.3}, {0.7}})));
  EXPECT_EQ(eq.critic.scalar(), 0.0);
  WganLosses l = wgan_losses(t.constant(mat({{1}, {1}})), t.constant(mat({{0}, {0}})));
  EXPECT_EQ(l.critic.scalar(), -1.0);
  EXPECT_EQ(l.generator.scalar(), 0.0);
  Rng rng(11);
  const Matrix h = rng.normal_matrix(9, 1), lo = rng.normal_matrix(9, 1);
  WganLosses r = wgan_losses(t.constant(h), t.constant(lo));
  double mh = 0, ml = 0;
  for (Index i = 0; i < 9; ++i) {
    mh += h(i, 0) / 9.0;
    ml += lo(i, 0) / 9.0;
  }
  EXPECT_NEAR(r.critic.scalar(), ml - mh, 1e-12);
  EXPECT_NEAR(r.generator.scalar(), -ml, 1e-12);
}

struct CriticMats {
  Matrix w1, b1, w2, b2;
  CriticWeights on(Tape& t) const {
    return {t.constant(w1), t.constant(b1), t.constant(w2), t.constant(b2), 0.2};
  }
};

TEST(Wgan, GradientPenaltyMatchesFiniteDifferenceInputGradient) {
  Rng rng(12);
  const CriticMats c{rng.normal_matrix(3, 5), rng.normal_matrix(1, 5), rng.normal_matrix(5, 1),
                     rng.normal_matrix(1, 1)};
  const Matrix pts = rng.normal_matrix(4, 3);
  auto critic_at = [&](const Matrix& x) {
    Tape s;
    return critic_forward(s.constant(x), c.on(s)).scalar();
  };
  double ref = 0;
  for (Index i = 0; i < 4; ++i) {
    double norm2 = 0;
    for (Index j = 0; j < 3; ++j) {
      Matrix p = pts.row(i), m = pts.row(i);
      p(0, j) += 1e-6;
      m(0, j) -= 1e-6;
      const double d = (critic_at(p) - critic_at(m)) / 2e-6;
      norm2 += d * d;
    }
    ref += std::pow(std::sqrt(norm2) - 1.0, 2);
  }
  Tape t;
  EXPECT_NEAR(gradient_penalty(pts, c.on(t), 10.0).scalar(), 10.0 * ref / 4.0, 1e-6);
}

TEST(Wgan, GradientPenaltyParameterGradients) {
  Rng rng(13);
  const Matrix w1 = rng.normal_matrix(3, 5), b1 = rng.normal_matrix(1, 5), w2 = rng.normal_matrix(5, 1);
  const Matrix pts = rng.normal_matrix(4, 3);
  EXPECT_LT(grad_check([&](const Var& w) {
              auto& t = w.tape();
              return gradient_penalty(pts, {w, t.constant(b1), t.constant(w2), t.constant(Matrix::Zero(1, 1)), 0.2}, 10.0);
            }, w1), 1e-4);
  EXPECT_LT(grad_check([&](const Var& w) {
              auto& t = w.tape();
              return gradient_penalty(pts, {t.constant(w1), t.constant(b1), w, t.constant(Matrix::Zero(1, 1)), 0.2}, 10.0);
            }, w2), 1e-4);
}

// ---------------------------------------------------------------- combined

TEST(Combined, Weights) {
  Tape t;
  Var clr = t.constant(Matrix::Constant(1, 1, 2.0)), vae = t.constant(Matrix::Constant(1, 1, 1.0));
  EXPECT_EQ(combined_pretrain_loss(0.0, clr, vae).scalar(), 1.0);
  EXPECT_EQ(combined_pretrain_loss(1.0, clr, vae).scalar(), 2.0);
  EXPECT_NEAR(combined_pretrain_loss(0.8, clr, vae).scalar(), 1.8, 1e-15);
  EXPECT_THROW(combined_pretrain_loss(1.5, clr, vae), ConfigError);
  EXPECT_THROW(combined_pretrain_loss(-0.1, clr, vae), ConfigError);
}

TEST(Combined, ZeroLambdaGradientEqualsVaeGradient) {
  Rng rng(14);
  const Matrix x = rng.normal_matrix(4, 3), target = rng.normal_matrix(4, 3), zh = rng.normal_matrix(4, 2);
  auto grads = [&](bool with_clr) {
    Tape t;
    Var p = t.variable(x);
    Var mu = ops::take_rows(ops::concat_cols({p}), {0, 1, 2, 3});
    Var mu2 = ops::matmul(mu, t.constant(Matrix::Ones(3, 2)));
    VaeTerms v = vae_loss(t.constant(target), p, mu2, t.constant(Matrix::Zero(4, 2)));
    Var loss = with_clr ? combined_pretrain_loss(0.0, contrastive_clr(t.constant(zh), mu2), v.total) : v.total;
    t.backward(loss);
    return Matrix(p.grad());
  };
  EXPECT_EQ(grads(true), grads(false));
}

// ---------------------------------------------------------- gradient checks

TEST(GradCheck, Losses) {
  Rng rng(15);
  const Matrix y = rng.uniform() * rng.normal_matrix(4, 6), mask = random_mask(rng, 4, 6, 0.3);
  EXPECT_LT(grad_check([&](const Var& p) { return si_mse({y, mask}, p); }, rng.normal_matrix(4, 6)), 1e-4);

  const Matrix x = rng.normal_matrix(3, 5), mu = rng.normal_matrix(3, 2), lv = rng.normal_matrix(3, 2);
  EXPECT_LT(grad_check([&](const Var& xh) {
              auto& t = xh.tape();
              return vae_loss(t.constant(x), xh, t.constant(mu), t.constant(lv)).total;
            }, rng.normal_matrix(3, 5)), 1e-4);
  EXPECT_LT(grad_check([&](const Var& m) {
              auto& t = m.tape();
              return vae_loss(t.constant(x), t.constant(x), m, t.constant(lv)).total;
            }, mu), 1e-4);
  EXPECT_LT(grad_check([&](const Var& l) {
              auto& t = l.tape();
              return vae_loss(t.constant(x), t.constant(x), t.constant(mu), l).total;
            }, lv), 1e-4);

  const Matrix zh = rng.normal_matrix(5, 4);
  EXPECT_LT(grad_check([&](const Var& zl) { return contrastive_clr(zl.tape().constant(zh), zl); }, rng.normal_matrix(5, 4)), 1e-4);
  EXPECT_LT(grad_check([&](const Var& h) { return contrastive_clr(h, h.tape().constant(zh)); }, rng.normal_matrix(5, 4)), 1e-4);
  EXPECT_LT(grad_check([&](const Var& zl) { return contrastive_clr(zl.tape().constant(zh), zl, 0.3); }, rng.normal_matrix(5, 4)), 1e-4);

  const Matrix b = rng.normal_matrix(6, 4);
  const KernelSpec k = median_heuristic_kernel(zh, b);
  EXPECT_LT(grad_check([&](const Var& a) { return mmd(a, a.tape().constant(b), k); }, zh), 1e-4);
  EXPECT_LT(grad_check([&](const Var& bb) { return mmd(bb.tape().constant(zh), bb, k); }, b), 1e-4);
}

}  // namespace
}  // namespace cleit
