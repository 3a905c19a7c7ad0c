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

#include "cleit/tape.hpp"

#include <string>

#include "cleit/error.hpp"

namespace cleit {

const Matrix& Var::value() const { return tape_->value(id_); }
const Matrix& Var::grad() const { return tape_->grad(id_); }
bool Var::requires_grad() const { return tape_->requires_grad(id_); }

Real Var::scalar() const {
  const Matrix& v = value();
  if (v.size() != 1) {
    throw DimensionError("scalar() on a " + std::to_string(v.rows()) + "x" +
                         std::to_string(v.cols()) + " value");
  }
  return v(0, 0);
}

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Tape::constant(Matrix value) {
  if (!value.allFinite()) throw NumericError("non-finite constant");
  Node n;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Tape::variable(Matrix value) {
  if (!value.allFinite()) throw NumericError("non-finite variable");
  Node n;
  n.value = std::move(value);
  n.requires_grad = true;
  return push(std::move(n));
}

Var Tape::parameter(Parameter& param) {
  if (!param.value().allFinite()) throw NumericError("non-finite parameter " + param.name);
  Node n;
  n.value = param.value();
  n.requires_grad = param.trainable;
  n.param = param.trainable ? &param : nullptr;
  return push(std::move(n));
}

Var Tape::record(std::string_view op, Matrix value, const std::vector<Var>& parents,
                 Backward backward) {
  for (const Var& p : parents) {
    if (p.tape_ != this) throw PreconditionError(std::string(op) + ": operand from another tape");
  }
  if (!value.allFinite()) throw NumericError(std::string(op) + " produced a non-finite value");
  Node n;
  n.value = std::move(value);
  for (const Var& p : parents) n.requires_grad = n.requires_grad || p.requires_grad();
  if (n.requires_grad) n.backward = std::move(backward);
  return push(std::move(n));
}

Matrix& Tape::grad_slot(int id) { return nodes_[static_cast<std::size_t>(id)].grad; }

void Tape::accumulate(const Var& v, const Matrix& grad) { accumulate_expr(v, grad); }

void Tape::backward(const Var& loss) {
  if (loss.tape_ != this) throw PreconditionError("backward: loss from another tape");
  if (loss.value().size() != 1) throw DimensionError("backward: loss must be a scalar");
  for (Node& n : nodes_) n.grad.resize(0, 0);
  if (!loss.requires_grad()) return;
  nodes_[static_cast<std::size_t>(loss.id_)].grad = Matrix::Ones(1, 1);
  for (int i = loss.id_; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (!n.requires_grad || n.grad.size() == 0) continue;
    if (!n.grad.allFinite()) throw NumericError("non-finite gradient during backward");
    if (n.backward) n.backward(n.grad);
    if (n.param) n.param->tensor.grad() += n.grad;
  }
}

}  // namespace cleit
