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

#ifndef CLEIT_GRAD_CHECK_HPP
#define CLEIT_GRAD_CHECK_HPP

#include <functional>

#include "cleit/tape.hpp"

namespace cleit {

/// Scalar-valued function of one tensor, built on the tape that owns `x`.
using ScalarFn = std::function<Var(const Var& x)>;

/// Compares reverse-mode gradients of `f` at `x` with central differences.
///
/// Returns max_i |analytic_i - numeric_i| / max(1, |analytic_i|). Any
/// randomness inside `f` must be frozen (fixed masks / fixed noise) so the
/// function is the same on every evaluation. Throws NumericError when f is
/// not finite at x.
double grad_check(const ScalarFn& f, const Matrix& x, double eps = 1e-5);

}  // namespace cleit

#endif  // CLEIT_GRAD_CHECK_HPP
