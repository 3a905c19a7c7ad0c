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

#ifndef CLEIT_TENSOR_HPP
#define CLEIT_TENSOR_HPP

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace cleit {

using Real = double;
using Index = Eigen::Index;
using Matrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::Matrix<Real, 1, Eigen::Dynamic>;
using ColVector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

/// Dense row-major array with an optional, same-shaped gradient accumulator.
///
/// Everything in the library is at most two-dimensional; vectors are stored
/// as 1 x d rows (biases) or n x 1 columns (per-sample scalars).
class Tensor {
 public:
  Tensor() = default;
  Tensor(Index rows, Index cols);
  explicit Tensor(Matrix data);

  Index rows() const { return data_.rows(); }
  Index cols() const { return data_.cols(); }
  Index size() const { return data_.size(); }
  std::vector<Index> shape() const { return {data_.rows(), data_.cols()}; }

  const Matrix& data() const { return data_; }
  Matrix& data() { return data_; }

  bool has_grad() const { return grad_.has_value(); }
  // Allocates a zero accumulator on first access.
  Matrix& grad();
  const Matrix& grad() const;
  void zero_grad();
  void drop_grad() { grad_.reset(); }

  bool all_finite() const { return data_.allFinite(); }

 private:
  Matrix data_;
  std::optional<Matrix> grad_;
};

/// A named, trainable tensor owned by a model block.
struct Parameter {
  std::string name;
  Tensor tensor;
  bool trainable = true;

  Matrix& value() { return tensor.data(); }
  const Matrix& value() const { return tensor.data(); }
};

/// Rounds every value to the nearest 32-bit float (checkpoint precision).
void round_to_storage_precision(Matrix& m);

}  // namespace cleit

#endif  // CLEIT_TENSOR_HPP
