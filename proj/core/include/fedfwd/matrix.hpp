#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fedfwd {

/// Dense row-major matrix of doubles. The sole numeric carrier in the
/// project: weight matrices, activity batches (rows = samples, cols =
/// features) and gradients all live here. Values are immutable by
/// convention once handed across module boundaries.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix identity(std::size_t n);
  /// 1 x n wrapper, handy for treating vectors as matrices.
  static Matrix row_vector(std::span<const double> v);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  double* row(std::size_t r) { return data_.data() + r * cols_; }
  const double* row(std::size_t r) const { return data_.data() + r * cols_; }
  std::span<double> row_span(std::size_t r) { return {row(r), cols_}; }
  std::span<const double> row_span(std::size_t r) const { return {row(r), cols_}; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  /// Bitwise equality (shape and every entry).
  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// a (r x k) times b (k x c). Throws ShapeError on inner-dimension mismatch,
/// NumericError if the product contains non-finite entries.
Matrix matmul(const Matrix& a, const Matrix& b);

/// a (r x k) times b^T where b is (c x k). Same checks as matmul.
Matrix matmul_nt(const Matrix& a, const Matrix& b);

/// a^T (k x r -> r x k transposed) times b (k x c): result r x c where
/// a is (k x r). Same checks as matmul.
Matrix matmul_tn(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& a);

bool all_finite(const Matrix& a);
bool all_finite(std::span<const double> v);

}  // namespace fedfwd
