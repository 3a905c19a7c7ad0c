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

#include "cleit/tensor.hpp"

#include "cleit/error.hpp"

namespace cleit {

Tensor::Tensor(Index rows, Index cols) : data_(Matrix::Zero(rows, cols)) {}

Tensor::Tensor(Matrix data) : data_(std::move(data)) {}

Matrix& Tensor::grad() {
  if (!grad_) grad_ = Matrix::Zero(data_.rows(), data_.cols());
  return *grad_;
}

const Matrix& Tensor::grad() const {
  if (!grad_) throw PreconditionError("tensor has no gradient accumulator");
  return *grad_;
}

void Tensor::zero_grad() {
  if (grad_ && grad_->rows() == data_.rows() && grad_->cols() == data_.cols()) {
    grad_->setZero();
  } else {
    grad_ = Matrix::Zero(data_.rows(), data_.cols());
  }
}

void round_to_storage_precision(Matrix& m) {
  for (Index i = 0; i < m.size(); ++i) {
    m.data()[i] = static_cast<Real>(static_cast<float>(m.data()[i]));
  }
}

}  // namespace cleit
