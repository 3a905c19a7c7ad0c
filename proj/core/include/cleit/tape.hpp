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

#ifndef CLEIT_TAPE_HPP
#define CLEIT_TAPE_HPP

#include <deque>
#include <functional>
#include <vector>
#include <string_view>

#include "cleit/tensor.hpp"

namespace cleit {

class Tape;

/// Handle to a value recorded on a Tape.
class Var {
 public:
  Var() = default;

  const Matrix& value() const;
  // Gradient of the last backward() target with respect to this value;
  // zero-sized when no gradient reached it.
  const Matrix& grad() const;
  Index rows() const { return value().rows(); }
  Index cols() const { return value().cols(); }
  Real scalar() const;
  bool requires_grad() const;

  Tape& tape() const { return *tape_; }
  int id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  int id_ = -1;
};

/// Per-forward-pass operation record for reverse-mode differentiation.
///
/// Nodes live in a deque, so references to recorded values stay valid for
/// the lifetime of the tape and backward closures may hold them directly.
/// Every recorded value is checked for NaN/Inf.
class Tape {
 public:
  // Receives the gradient flowing into the node and scatters it to parents
  // via accumulate().
  using Backward = std::function<void(const Matrix& out_grad)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  Var variable(Matrix value);
  // Tracks gradients only when the parameter is trainable; backward() adds
  // into the parameter's accumulator.
  Var parameter(Parameter& param);

  Var record(std::string_view op, Matrix value, const std::vector<Var>& parents,
             Backward backward);

  void accumulate(const Var& v, const Matrix& grad);
  template <typename Expr>
  void accumulate_expr(const Var& v, const Expr& expr) {
    if (!v.requires_grad()) return;
    Matrix& g = grad_slot(v.id_);
    if (g.size() == 0) {
      g = expr;
    } else {
      g += expr;
    }
  }

  void backward(const Var& loss);

  const Matrix& value(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  const Matrix& grad(int id) const { return nodes_[static_cast<std::size_t>(id)].grad; }
  bool requires_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].requires_grad; }
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    Backward backward;
    Parameter* param = nullptr;
  };

  Var push(Node node);
  Matrix& grad_slot(int id);

  std::deque<Node> nodes_;
};

}  // namespace cleit

#endif  // CLEIT_TAPE_HPP
