#include "fedfwd/matrix.hpp"

#include <cmath>
#include <string>

#include "fedfwd/errors.hpp"

namespace fedfwd {

namespace {

std::string shape_str(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void check_finite(const Matrix& m, const char* op) {
  if (!all_finite(m)) {
    throw NumericError(std::string(op) + " produced non-finite entries");
  }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw ShapeError("Matrix data length " + std::to_string(data_.size()) +
                     " does not match " + std::to_string(rows_) + "x" +
                     std::to_string(cols_));
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::row_vector(std::span<const double> v) {
  return Matrix(1, v.size(), std::vector<double>(v.begin(), v.end()));
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: " + shape_str(a) + " * " + shape_str(b));
  }
  Matrix c(a.rows(), b.cols());
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  for (std::size_t i = 0; i < n; ++i) {
    double* crow = c.row(i);
    const double* arow = a.row(i);
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = arow[p];
      const double* brow = b.row(p);
      for (std::size_t j = 0; j < m; ++j) crow[j] += aip * brow[j];
    }
  }
  check_finite(c, "matmul");
  return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw ShapeError("matmul_nt: " + shape_str(a) + " * " + shape_str(b) + "^T");
  }
  Matrix c(a.rows(), b.rows());
  const std::size_t k = a.cols();
  // Each dot product accumulates in 8 fixed lanes folded in a fixed order,
  // so results are reproducible while the lanes vectorize.
  constexpr std::size_t kLanes = 8;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* arow = a.row(i);
    double* crow = c.row(i);
    for (std::size_t j = 0; j < b.rows(); ++j) {
      const double* brow = b.row(j);
      double lanes[kLanes] = {0.0};
      std::size_t p = 0;
      for (; p + kLanes <= k; p += kLanes) {
        for (std::size_t u = 0; u < kLanes; ++u) lanes[u] += arow[p + u] * brow[p + u];
      }
      double tail = 0.0;
      for (; p < k; ++p) tail += arow[p] * brow[p];
      crow[j] = (((lanes[0] + lanes[1]) + (lanes[2] + lanes[3])) +
                 ((lanes[4] + lanes[5]) + (lanes[6] + lanes[7]))) +
                tail;
    }
  }
  check_finite(c, "matmul_nt");
  return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw ShapeError("matmul_tn: " + shape_str(a) + "^T * " + shape_str(b));
  }
  Matrix c(a.cols(), b.cols());
  const std::size_t m = b.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* arow = a.row(i);
    const double* brow = b.row(i);
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const double aij = arow[j];
      if (aij == 0.0) continue;
      double* crow = c.row(j);
      for (std::size_t p = 0; p < m; ++p) crow[p] += aij * brow[p];
    }
  }
  check_finite(c, "matmul_tn");
  return c;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

bool all_finite(std::span<const double> v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

bool all_finite(const Matrix& a) { return all_finite(a.data()); }

}  // namespace fedfwd
