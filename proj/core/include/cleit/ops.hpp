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

#ifndef CLEIT_OPS_HPP
#define CLEIT_OPS_HPP

#include <vector>

#include "cleit/tape.hpp"

// Differentiable primitives recorded on a Tape. All operands must live on
// the same tape.
namespace cleit::ops {

// y = x W + b, with b (1 x d_out) broadcast over rows.
Var affine(const Var& x, const Var& W, const Var& b);
Var matmul(const Var& a, const Var& b);
Var add_row(const Var& x, const Var& row);

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, Real factor);

Var sum(const Var& a);
Var mean(const Var& a);

Var exp(const Var& a);
Var tanh(const Var& a);
Var sigmoid(const Var& a);
Var leaky_relu(const Var& a, Real slope);
// Gradient passes only where lo <= a <= hi.
Var clamp(const Var& a, Real lo, Real hi);

// Stop-gradient copy.
Var detach(const Var& a);

Var concat_cols(const std::vector<Var>& parts);
// Rows of `a` at `rows`, in order (repeats allowed).
Var take_rows(const Var& a, const std::vector<Index>& rows);

}  // namespace cleit::ops

#endif  // CLEIT_OPS_HPP
