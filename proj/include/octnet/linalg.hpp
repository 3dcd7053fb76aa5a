#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "octnet/errors.hpp"

namespace octnet {

/// Dense row-major matrix of doubles. Just enough linear algebra for the
/// KRR solves and the network engine; nothing here is clever.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  const double* row_ptr(std::size_t r) const { return data.data() + r * cols; }
  double* row_ptr(std::size_t r) { return data.data() + r * cols; }
};

/// C = A * B
inline Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols != b.rows) throw std::invalid_argument("matmul: shape mismatch");
  Matrix c(a.rows, b.cols, 0.0);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      const double* brow = b.row_ptr(k);
      double* crow = c.row_ptr(i);
      for (std::size_t j = 0; j < b.cols; ++j) crow[j] += aik * brow[j];
    }
  }
  return c;
}

/// C = A * B^T
inline Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols != b.cols) throw std::invalid_argument("matmul_nt: shape mismatch");
  Matrix c(a.rows, b.rows, 0.0);
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* arow = a.row_ptr(i);
    for (std::size_t j = 0; j < b.rows; ++j) {
      const double* brow = b.row_ptr(j);
      double acc = 0.0;
      for (std::size_t k = 0; k < a.cols; ++k) acc += arow[k] * brow[k];
      c(i, j) = acc;
    }
  }
  return c;
}

/// C = A^T * B
inline Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows != b.rows) throw std::invalid_argument("matmul_tn: shape mismatch");
  Matrix c(a.cols, b.cols, 0.0);
  for (std::size_t k = 0; k < a.rows; ++k) {
    const double* arow = a.row_ptr(k);
    const double* brow = b.row_ptr(k);
    for (std::size_t i = 0; i < a.cols; ++i) {
      const double aki = arow[i];
      if (aki == 0.0) continue;
      double* crow = c.row_ptr(i);
      for (std::size_t j = 0; j < b.cols; ++j) crow[j] += aki * brow[j];
    }
  }
  return c;
}

/// In-place Cholesky factorisation A = L L^T of a symmetric positive definite
/// matrix. Throws numeric_error when a pivot is not strictly positive.
inline Matrix cholesky_factor(const Matrix& a) {
  if (a.rows != a.cols) throw std::invalid_argument("cholesky: matrix not square");
  const std::size_t n = a.rows;
  Matrix l(n, n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    double diag = a(j, j);
    for (std::size_t k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
    if (!(diag > 0.0)) throw numeric_error("cholesky: matrix not positive definite");
    const double ljj = std::sqrt(diag);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double acc = a(i, j);
      for (std::size_t k = 0; k < j; ++k) acc -= l(i, k) * l(j, k);
      l(i, j) = acc / ljj;
    }
  }
  return l;
}

/// Solves A x = b for SPD A via the Cholesky factor.
inline std::vector<double> cholesky_solve(const Matrix& l, const std::vector<double>& b) {
  const std::size_t n = l.rows;
  if (b.size() != n) throw std::invalid_argument("cholesky_solve: size mismatch");
  std::vector<double> y(n), x(n);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = b[i];
    for (std::size_t k = 0; k < i; ++k) acc -= l(i, k) * y[k];
    y[i] = acc / l(i, i);
  }
  for (std::size_t ii = n; ii-- > 0;) {
    double acc = y[ii];
    for (std::size_t k = ii + 1; k < n; ++k) acc -= l(k, ii) * x[k];
    x[ii] = acc / l(ii, ii);
  }
  return x;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

}  // namespace octnet
