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

// Bridges between Eigen matrices and the plain-vector oracles.
#ifndef CLEIT_TESTS_HELPERS_HPP
#define CLEIT_TESTS_HELPERS_HPP

#include <filesystem>
#include <random>
#include <string>

#include "cleit/tensor.hpp"
#include "oracles.hpp"

namespace testing_util {

inline oracle::Mat to_mat(const cleit::Matrix& m) {
  oracle::Mat out(static_cast<std::size_t>(m.rows()), oracle::Vec(static_cast<std::size_t>(m.cols())));
  for (cleit::Index i = 0; i < m.rows(); ++i)
    for (cleit::Index j = 0; j < m.cols(); ++j) out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = m(i, j);
  return out;
}

inline oracle::Vec row(const cleit::Matrix& m, cleit::Index i) {
  return {m.row(i).data(), m.row(i).data() + m.cols()};
}

inline oracle::Vec col(const cleit::Matrix& m, cleit::Index j) {
  oracle::Vec out;
  for (cleit::Index i = 0; i < m.rows(); ++i) out.push_back(m(i, j));
  return out;
}

// Fresh per-test scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("cleit_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Ridge fit on the first `fit_rows` rows (NA targets filled with the observed
// column mean), scored by mean sample-wise Pearson on the remaining rows.
inline double ridge_holdout_samplewise(const cleit::Matrix& x, const cleit::Matrix& y,
                                       const cleit::Matrix& mask, cleit::Index fit_rows,
                                       double alpha) {
  const cleit::Index n = x.rows(), k = y.cols();
  oracle::Mat fx, fy, hx;
  for (cleit::Index i = 0; i < fit_rows; ++i) fx.push_back(row(x, i));
  for (cleit::Index i = fit_rows; i < n; ++i) hx.push_back(row(x, i));
  oracle::Vec fill(static_cast<std::size_t>(k), 0.0);
  for (cleit::Index j = 0; j < k; ++j) {
    double s = 0, c = 0;
    for (cleit::Index i = 0; i < fit_rows; ++i) {
      s += mask(i, j) * y(i, j);
      c += mask(i, j);
    }
    fill[static_cast<std::size_t>(j)] = c > 0 ? s / c : 0.0;
  }
  for (cleit::Index i = 0; i < fit_rows; ++i) {
    oracle::Vec r = row(y, i);
    for (cleit::Index j = 0; j < k; ++j) {
      if (mask(i, j) == 0) r[static_cast<std::size_t>(j)] = fill[static_cast<std::size_t>(j)];
    }
    fy.push_back(r);
  }
  const oracle::Mat pred = oracle::ridge_predict(hx, oracle::ridge_fit(fx, fy, alpha));
  double sum = 0;
  int count = 0;
  for (cleit::Index i = fit_rows; i < n; ++i) {
    const auto r = oracle::pearson(row(y, i), pred[static_cast<std::size_t>(i - fit_rows)], row(mask, i));
    if (r) {
      sum += *r;
      ++count;
    }
  }
  return count > 0 ? sum / count : 0.0;
}

}  // namespace testing_util

#endif  // CLEIT_TESTS_HELPERS_HPP
