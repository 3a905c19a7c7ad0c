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


#include <benchmark/benchmark.h>

#include "cleit/adamax.hpp"
#include "cleit/eval.hpp"
#include "cleit/losses.hpp"
#include "cleit/models.hpp"
#include "cleit/ops.hpp"

namespace {

using namespace cleit;

void BM_AffineForwardBackward(benchmark::State& state) {
  const Index n = state.range(0);
  Rng rng(1);
  const Matrix x = rng.normal_matrix(n, 512), w = rng.normal_matrix(512, 256), b = rng.normal_matrix(1, 256);
  for (auto _ : state) {
    Tape t;
    Var wv = t.variable(w);
    Var out = ops::sum(ops::affine(t.constant(x), wv, t.constant(b)));
    t.backward(out);
    benchmark::DoNotOptimize(wv.grad().data());
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_AffineForwardBackward)->Arg(64)->Arg(256);

void BM_EncoderForward(benchmark::State& state) {
  const Index n = state.range(0);
  ModelConfig model;
  Rng init(2);
  Encoder encoder("encoder", 1000, model, init);
  const Matrix x = init.normal_matrix(n, 1000);
  for (auto _ : state) benchmark::DoNotOptimize(encoder.encode_mean(x).data());
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_EncoderForward)->Arg(64)->Arg(256);

void BM_EncoderTrainStep(benchmark::State& state) {
  ModelConfig model;
  Rng init(3);
  Encoder encoder("encoder", 1000, model, init);
  Transmitter transmitter("transmitter", model, init);
  const Matrix x = init.normal_matrix(64, 1000), target = init.normal_matrix(64, model.latent_dim);
  for (auto _ : state) {
    Tape t;
    Rng rng(4);
    const ForwardContext ctx = ForwardContext::train(rng);
    const Encoded e = encoder.encode(t, t.constant(x), ctx);
    t.backward(contrastive_clr(t.constant(target), transmitter.transmit(t, e.z, ctx)));
    zero_grads(concat_params(encoder.parameters(), transmitter.parameters()));
  }
}
BENCHMARK(BM_EncoderTrainStep);

void BM_Losses(benchmark::State& state) {
  const int which = static_cast<int>(state.range(0));
  Rng rng(5);
  const Matrix a = rng.normal_matrix(64, 128), b = rng.normal_matrix(64, 128);
  const Matrix mask = Matrix::Ones(64, 128);
  const KernelSpec kernel = median_heuristic_kernel(a, b);
  for (auto _ : state) {
    Tape t;
    Var av = t.variable(a);
    Var loss;
    switch (which) {
      case 0: loss = si_mse({b, mask}, av); break;
      case 1: loss = contrastive_clr(t.constant(b), av); break;
      case 2: loss = mmd(av, t.constant(b), kernel); break;
      default: loss = vae_loss(t.constant(b), av, av, t.constant(Matrix::Zero(64, 128))).total; break;
    }
    t.backward(loss);
    benchmark::DoNotOptimize(av.grad().data());
  }
  static const char* names[] = {"si_mse", "contrastive", "mmd", "vae"};
  state.SetLabel(names[which]);
}
BENCHMARK(BM_Losses)->DenseRange(0, 3);

void BM_AdamaxStep(benchmark::State& state) {
  Rng rng(6);
  Matrix p = rng.normal_matrix(512, 256);
  const Matrix g = rng.normal_matrix(512, 256);
  AdamaxState s = AdamaxState::zeros(512, 256);
  for (auto _ : state) adamax_step(p, g, s, 1e-4);
}
BENCHMARK(BM_AdamaxStep);

void BM_MatrixReport(benchmark::State& state) {
  Rng rng(7);
  const Matrix y = rng.normal_matrix(200, 20), yhat = rng.normal_matrix(200, 20);
  const Matrix mask = Matrix::Ones(200, 20);
  for (auto _ : state) benchmark::DoNotOptimize(matrix_report(y, yhat, mask).samplewise_pearson_mean());
}
BENCHMARK(BM_MatrixReport);

}  // namespace

BENCHMARK_MAIN();
