/*
 * Copyright 2026 The rankforge Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "rankforge/matrix.h"

#include <cmath>
#include <string>

#include "rankforge/errors.h"

namespace rankforge {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols,
                         std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw InputError("DenseMatrix: data length " +
                     std::to_string(data_.size()) + " != " +
                     std::to_string(rows_) + "x" + std::to_string(cols_));
  }
}

bool DenseMatrix::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

DenseMatrix affine(const DenseMatrix& x, const DenseMatrix& w,
                   std::span<const double> bias) {
  if (x.cols() != w.cols() || bias.size() != w.rows()) {
    throw InputError("affine: shape mismatch, x has " +
                     std::to_string(x.cols()) + " columns, weight is " +
                     std::to_string(w.rows()) + "x" +
                     std::to_string(w.cols()));
  }
  DenseMatrix out(x.rows(), w.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto xr = x.row(r);
    auto orow = out.row(r);
    for (std::size_t o = 0; o < w.rows(); ++o) {
      orow[o] = dot(xr, w.row(o)) + bias[o];
    }
  }
  return out;
}

DenseMatrix matmul(const DenseMatrix& grad_out, const DenseMatrix& w) {
  if (grad_out.cols() != w.rows()) {
    throw InputError("matmul: inner dimensions differ");
  }
  DenseMatrix out(grad_out.rows(), w.cols());
  for (std::size_t r = 0; r < grad_out.rows(); ++r) {
    auto orow = out.row(r);
    for (std::size_t o = 0; o < w.rows(); ++o) {
      const double g = grad_out(r, o);
      if (g == 0.0) continue;
      const auto wrow = w.row(o);
      for (std::size_t i = 0; i < w.cols(); ++i) orow[i] += g * wrow[i];
    }
  }
  return out;
}

void accumulate_outer(const DenseMatrix& grad_out, const DenseMatrix& x,
                      DenseMatrix& grad_w) {
  if (grad_out.rows() != x.rows() || grad_w.rows() != grad_out.cols() ||
      grad_w.cols() != x.cols()) {
    throw InputError("accumulate_outer: shape mismatch");
  }
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto xr = x.row(r);
    for (std::size_t o = 0; o < grad_out.cols(); ++o) {
      const double g = grad_out(r, o);
      if (g == 0.0) continue;
      auto wrow = grad_w.row(o);
      for (std::size_t i = 0; i < x.cols(); ++i) wrow[i] += g * xr[i];
    }
  }
}

}  // namespace rankforge
