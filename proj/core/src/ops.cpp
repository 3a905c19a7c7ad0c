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

#include "cleit/ops.hpp"

#include <cmath>
#include <string>

#include "cleit/error.hpp"

namespace cleit::ops {
namespace {

std::string dims(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_same_shape(const char* op, const Var& a, const Var& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": shapes " + dims(a.value()) + " and " +
                         dims(b.value()) + " differ");
  }
}

}  // namespace

Var affine(const Var& x, const Var& W, const Var& b) {
  const Matrix& xv = x.value();
  const Matrix& wv = W.value();
  const Matrix& bv = b.value();
  if (xv.cols() != wv.rows() || bv.rows() != 1 || bv.cols() != wv.cols()) {
    throw DimensionError("affine: x " + dims(xv) + ", W " + dims(wv) + ", b " + dims(bv));
  }
  Matrix y = xv * wv;
  y.rowwise() += bv.row(0);
  Tape& t = x.tape();
  return t.record("affine", std::move(y), {x, W, b}, [&t, x, W, b, &xv, &wv](const Matrix& g) {
    if (x.requires_grad()) t.accumulate_expr(x, g * wv.transpose());
    if (W.requires_grad()) t.accumulate_expr(W, xv.transpose() * g);
    if (b.requires_grad()) t.accumulate_expr(b, g.colwise().sum());
  });
}

Var matmul(const Var& a, const Var& b) {
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  if (av.cols() != bv.rows()) throw DimensionError("matmul: " + dims(av) + " * " + dims(bv));
  Tape& t = a.tape();
  return t.record("matmul", av * bv, {a, b}, [&t, a, b, &av, &bv](const Matrix& g) {
    if (a.requires_grad()) t.accumulate_expr(a, g * bv.transpose());
    if (b.requires_grad()) t.accumulate_expr(b, av.transpose() * g);
  });
}

Var add_row(const Var& x, const Var& row) {
  const Matrix& rv = row.value();
  if (rv.rows() != 1 || rv.cols() != x.cols()) {
    throw DimensionError("add_row: x " + dims(x.value()) + ", row " + dims(rv));
  }
  Matrix y = x.value();
  y.rowwise() += rv.row(0);
  Tape& t = x.tape();
  return t.record("add_row", std::move(y), {x, row}, [&t, x, row](const Matrix& g) {
    t.accumulate(x, g);
    if (row.requires_grad()) t.accumulate_expr(row, g.colwise().sum());
  });
}

Var add(const Var& a, const Var& b) {
  require_same_shape("add", a, b);
  Tape& t = a.tape();
  return t.record("add", a.value() + b.value(), {a, b}, [&t, a, b](const Matrix& g) {
    t.accumulate(a, g);
    t.accumulate(b, g);
  });
}

Var sub(const Var& a, const Var& b) {
  require_same_shape("sub", a, b);
  Tape& t = a.tape();
  return t.record("sub", a.value() - b.value(), {a, b}, [&t, a, b](const Matrix& g) {
    t.accumulate(a, g);
    t.accumulate_expr(b, -g);
  });
}

Var mul(const Var& a, const Var& b) {
  require_same_shape("mul", a, b);
  Tape& t = a.tape();
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  return t.record("mul", av.cwiseProduct(bv), {a, b}, [&t, a, b, &av, &bv](const Matrix& g) {
    t.accumulate_expr(a, g.cwiseProduct(bv));
    t.accumulate_expr(b, g.cwiseProduct(av));
  });
}

Var scale(const Var& a, Real factor) {
  Tape& t = a.tape();
  return t.record("scale", a.value() * factor, {a},
                  [&t, a, factor](const Matrix& g) { t.accumulate_expr(a, g * factor); });
}

Var sum(const Var& a) {
  Tape& t = a.tape();
  Matrix s(1, 1);
  s(0, 0) = a.value().sum();
  return t.record("sum", std::move(s), {a}, [&t, a](const Matrix& g) {
    t.accumulate_expr(a, Matrix::Constant(a.rows(), a.cols(), g(0, 0)));
  });
}

Var mean(const Var& a) {
  if (a.value().size() == 0) throw DimensionError("mean of an empty tensor");
  Tape& t = a.tape();
  const Real n = static_cast<Real>(a.value().size());
  Matrix s(1, 1);
  s(0, 0) = a.value().sum() / n;
  return t.record("mean", std::move(s), {a}, [&t, a, n](const Matrix& g) {
    t.accumulate_expr(a, Matrix::Constant(a.rows(), a.cols(), g(0, 0) / n));
  });
}

Var exp(const Var& a) {
  Tape& t = a.tape();
  Matrix y = a.value().array().exp().matrix();
  return t.record("exp", y, {a}, [&t, a, y](const Matrix& g) {
    t.accumulate_expr(a, g.cwiseProduct(y));
  });
}

Var tanh(const Var& a) {
  Tape& t = a.tape();
  Matrix y = a.value().array().tanh().matrix();
  Matrix dy = (1.0 - y.array().square()).matrix();
  return t.record("tanh", std::move(y), {a}, [&t, a, dy = std::move(dy)](const Matrix& g) {
    t.accumulate_expr(a, g.cwiseProduct(dy));
  });
}

Var sigmoid(const Var& a) {
  Tape& t = a.tape();
  const Matrix& av = a.value();
  Matrix y(av.rows(), av.cols());
  for (Index i = 0; i < av.size(); ++i) {
    const Real v = av.data()[i];
    // Branches keep exp() from overflowing for large |v|.
    y.data()[i] = v >= 0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
  }
  Matrix dy = y.array() * (1.0 - y.array());
  return t.record("sigmoid", std::move(y), {a}, [&t, a, dy = std::move(dy)](const Matrix& g) {
    t.accumulate_expr(a, g.cwiseProduct(dy));
  });
}

Var leaky_relu(const Var& a, Real slope) {
  Tape& t = a.tape();
  const Matrix& av = a.value();
  Matrix d = (av.array() > 0).select(Matrix::Ones(av.rows(), av.cols()),
                                     Matrix::Constant(av.rows(), av.cols(), slope));
  Matrix y = av.cwiseProduct(d);
  return t.record("leaky_relu", std::move(y), {a}, [&t, a, d = std::move(d)](const Matrix& g) {
    t.accumulate_expr(a, g.cwiseProduct(d));
  });
}

Var clamp(const Var& a, Real lo, Real hi) {
  Tape& t = a.tape();
  const Matrix& av = a.value();
  Matrix y = av.cwiseMax(lo).cwiseMin(hi);
  Matrix pass = ((av.array() >= lo) && (av.array() <= hi)).cast<Real>().matrix();
  return t.record("clamp", std::move(y), {a}, [&t, a, pass = std::move(pass)](const Matrix& g) {
    t.accumulate_expr(a, g.cwiseProduct(pass));
  });
}

Var detach(const Var& a) { return a.tape().constant(a.value()); }

Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw DimensionError("concat_cols: no operands");
  const Index rows = parts.front().rows();
  Index cols = 0;
  for (const Var& p : parts) {
    if (p.rows() != rows) throw DimensionError("concat_cols: row counts differ");
    cols += p.cols();
  }
  Matrix y(rows, cols);
  Index offset = 0;
  for (const Var& p : parts) {
    y.middleCols(offset, p.cols()) = p.value();
    offset += p.cols();
  }
  Tape& t = parts.front().tape();
  return t.record("concat_cols", std::move(y), parts, [&t, parts](const Matrix& g) {
    Index at = 0;
    for (const Var& p : parts) {
      t.accumulate_expr(p, g.middleCols(at, p.cols()));
      at += p.cols();
    }
  });
}

Var take_rows(const Var& a, const std::vector<Index>& rows) {
  const Matrix& av = a.value();
  Matrix y(static_cast<Index>(rows.size()), av.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= av.rows()) throw DimensionError("take_rows: index out of range");
    y.row(static_cast<Index>(i)) = av.row(rows[i]);
  }
  Tape& t = a.tape();
  return t.record("take_rows", std::move(y), {a}, [&t, a, rows](const Matrix& g) {
    Matrix ga = Matrix::Zero(a.rows(), a.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) ga.row(rows[i]) += g.row(static_cast<Index>(i));
    t.accumulate(a, ga);
  });
}

}  // namespace cleit::ops
