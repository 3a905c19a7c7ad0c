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

#include "cleit/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "cleit/error.hpp"

namespace cleit {
namespace {

Real evaluate(const ScalarFn& f, const Matrix& x) {
  Tape tape;
  Var out;
  try {
    out = f(tape.constant(x));
  } catch (const NumericError& e) {
    throw NumericError(std::string("grad_check: evaluation failed: ") + e.what());
  }
  const Real v = out.scalar();
  if (!std::isfinite(v)) throw NumericError("grad_check: non-finite function value");
  return v;
}

}  // namespace

double grad_check(const ScalarFn& f, const Matrix& x, double eps) {
  if (!(eps > 0)) throw PreconditionError("grad_check: eps must be positive");

  Tape tape;
  Var xv = tape.variable(x);
  Var out;
  try {
    out = f(xv);
  } catch (const NumericError& e) {
    throw NumericError(std::string("grad_check: evaluation failed: ") + e.what());
  }
  if (!std::isfinite(out.scalar())) throw NumericError("grad_check: non-finite function value");
  tape.backward(out);
  Matrix analytic = xv.grad().size() == 0 ? Matrix::Zero(x.rows(), x.cols()) : xv.grad();

  double worst = 0.0;
  Matrix probe = x;
  for (Index i = 0; i < x.size(); ++i) {
    const Real orig = probe.data()[i];
    probe.data()[i] = orig + eps;
    const Real up = evaluate(f, probe);
    probe.data()[i] = orig - eps;
    const Real down = evaluate(f, probe);
    probe.data()[i] = orig;
    const Real numeric = (up - down) / (2.0 * eps);
    const Real a = analytic.data()[i];
    worst = std::max(worst, std::abs(a - numeric) / std::max(1.0, std::abs(a)));
  }
  return worst;
}

}  // namespace cleit
