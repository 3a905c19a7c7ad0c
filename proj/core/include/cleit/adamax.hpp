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

#ifndef CLEIT_ADAMAX_HPP
#define CLEIT_ADAMAX_HPP

#include <cstdint>
#include <map>
#include <string>

#include "cleit/tensor.hpp"

namespace cleit {

struct AdamaxConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Per-parameter Adamax moments.
struct AdamaxState {
  Matrix m;  // first moment
  Matrix u;  // exponentially weighted infinity norm
  std::int64_t t = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;

  static AdamaxState zeros(Index rows, Index cols, const AdamaxConfig& config = {});
};

// One Adamax update of `params` in place:
//   t += 1; m = b1 m + (1-b1) g; u = max(b2 u, |g|);
//   params -= lr / (1 - b1^t) * m / (u + epsilon)
void adamax_step(Matrix& params, const Matrix& grads, AdamaxState& state, double lr,
                 double epsilon = 1e-8);

/// Adamax over named parameters; moments are created lazily on a
/// parameter's first update, so a block unfrozen late starts at t = 1.
class Adamax {
 public:
  explicit Adamax(AdamaxConfig config = {}) : config_(config) {}

  // No-op for frozen parameters. Uses the parameter's accumulated grad.
  void step(Parameter& param, double lr);

  const AdamaxState* state(const std::string& name) const;
  const AdamaxConfig& config() const { return config_; }

 private:
  AdamaxConfig config_;
  std::map<std::string, AdamaxState> states_;
};

}  // namespace cleit

#endif  // CLEIT_ADAMAX_HPP
