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

#include "cleit/adamax.hpp"

#include <cmath>

#include "cleit/error.hpp"

namespace cleit {

AdamaxState AdamaxState::zeros(Index rows, Index cols, const AdamaxConfig& config) {
  AdamaxState s;
  s.m = Matrix::Zero(rows, cols);
  s.u = Matrix::Zero(rows, cols);
  s.beta1 = config.beta1;
  s.beta2 = config.beta2;
  return s;
}

void adamax_step(Matrix& params, const Matrix& grads, AdamaxState& state, double lr,
                 double epsilon) {
  if (params.rows() != grads.rows() || params.cols() != grads.cols() ||
      state.m.rows() != params.rows() || state.m.cols() != params.cols() ||
      state.u.rows() != params.rows() || state.u.cols() != params.cols()) {
    throw DimensionError("adamax_step: parameter, gradient and state shapes disagree");
  }
  if (!(lr > 0)) throw ConfigError("adamax_step: learning rate must be positive");
  if (!(state.beta1 > 0 && state.beta1 < 1 && state.beta2 > 0 && state.beta2 < 1)) {
    throw ConfigError("adamax_step: betas must lie in (0, 1)");
  }

  state.t += 1;
  state.m = state.beta1 * state.m + (1.0 - state.beta1) * grads;
  state.u = (state.beta2 * state.u).cwiseMax(grads.cwiseAbs());
  const Matrix denom = state.u.array() + epsilon;
  if ((denom.array() == 0.0).any()) {
    throw NumericError("adamax_step: zero infinity-norm accumulator with epsilon = 0");
  }
  const double step = lr / (1.0 - std::pow(state.beta1, static_cast<double>(state.t)));
  Matrix updated = params.array() - step * state.m.array() / denom.array();
  if (!updated.allFinite()) throw NumericError("adamax_step: non-finite parameter update");
  params = std::move(updated);
}

void Adamax::step(Parameter& param, double lr) {
  if (!param.trainable) return;
  auto it = states_.find(param.name);
  if (it == states_.end()) {
    it = states_
             .emplace(param.name,
                      AdamaxState::zeros(param.value().rows(), param.value().cols(), config_))
             .first;
  }
  const Matrix& g = param.tensor.has_grad()
                        ? param.tensor.grad()
                        : Matrix(Matrix::Zero(param.value().rows(), param.value().cols()));
  adamax_step(param.value(), g, it->second, lr, config_.epsilon);
}

const AdamaxState* Adamax::state(const std::string& name) const {
  auto it = states_.find(name);
  return it == states_.end() ? nullptr : &it->second;
}

}  // namespace cleit
