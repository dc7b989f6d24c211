// SPDX-FileCopyrightText: 2026 The mwrf Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef MWRF_MATRIX_HPP
#define MWRF_MATRIX_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "mwrf/error.hpp"

namespace mwrf {

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
      fail(ErrorCode::kShapeMismatch, "matrix data does not match shape");
    }
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }
  std::span<double> span() noexcept { return data_; }
  std::span<const double> span() const noexcept { return data_; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::vector<double>& values() noexcept { return data_; }
  const std::vector<double>& values() const noexcept { return data_; }

  bool same_shape(const Matrix& o) const noexcept {
    return rows_ == o.rows_ && cols_ == o.cols_;
  }

  // Copy of the [r0, r0+h) x [c0, c0+w) block.
  Matrix block(std::size_t r0, std::size_t c0, std::size_t h, std::size_t w) const {
    Matrix out(h, w);
    for (std::size_t r = 0; r < h; ++r) {
      std::copy_n(data_.data() + (r0 + r) * cols_ + c0, w, out.data() + r * w);
    }
    return out;
  }

  void set_block(std::size_t r0, std::size_t c0, const Matrix& src) {
    for (std::size_t r = 0; r < src.rows(); ++r) {
      std::copy_n(src.data() + r * src.cols(), src.cols(),
                  data_.data() + (r0 + r) * cols_ + c0);
    }
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) fail(ErrorCode::kShapeMismatch, "max_abs_diff size");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) fail(ErrorCode::kShapeMismatch, "max_abs_diff shape");
  return max_abs_diff(a.span(), b.span());
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) fail(ErrorCode::kShapeMismatch, "dot size");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace mwrf

#endif  // MWRF_MATRIX_HPP
