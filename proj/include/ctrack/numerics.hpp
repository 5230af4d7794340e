/*
 *  Copyright (C) 2026 The ctrack Authors
 *
 *  SPDX-License-Identifier: Apache-2.0
 *  See the file LICENSE for more information.
 */

#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "ctrack/errors.hpp"

namespace ctrack {

using Vector = std::vector<double>;
using Vec3 = std::array<double, 3>;

/// Dense row-major real matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> diag);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }

  std::span<const double> data() const noexcept { return data_; }

  Matrix transpose() const;
  /// Copy of the block starting at (r0, c0) with the given extent.
  Matrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const;
  /// Overwrites the block at (r0, c0) with `b`.
  void set_block(std::size_t r0, std::size_t c0, const Matrix& b);

  double max_abs() const;
  bool all_finite() const;

  Matrix& operator+=(const Matrix& o);
  Matrix& operator-=(const Matrix& o);
  Matrix& operator*=(double s);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(Matrix a, double s);
Matrix operator*(double s, Matrix a);
Matrix operator*(const Matrix& a, const Matrix& b);
Vector operator*(const Matrix& a, std::span<const double> x);

/// max_ij |a_ij - b_ij|; shapes must agree.
double max_abs_diff(const Matrix& a, const Matrix& b);

/// Symmetric matrix. The constructor replaces (i,j) and (j,i) with their
/// average, so the stored entries are exactly symmetric.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(const Matrix& m);
  SymMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static SymMatrix identity(std::size_t n);
  static SymMatrix zero(std::size_t n);
  static SymMatrix diagonal(std::span<const double> diag);

  std::size_t dim() const noexcept { return m_.rows(); }
  double operator()(std::size_t i, std::size_t j) const { return m_(i, j); }
  const Matrix& matrix() const noexcept { return m_; }

  friend bool operator==(const SymMatrix&, const SymMatrix&) = default;

 private:
  Matrix m_;
};

SymMatrix operator+(const SymMatrix& a, const SymMatrix& b);
SymMatrix operator-(const SymMatrix& a, const SymMatrix& b);
SymMatrix operator*(double s, const SymMatrix& a);

/// Eigen-decomposition of a symmetric matrix: ascending eigenvalues, and an
/// orthogonal matrix whose column i pairs with eigenvalue i. Each column is
/// signed so that its first nonzero component is positive.
struct Spectrum {
  Vector eigenvalues;
  Matrix eigenvectors;
};

/// Cyclic Jacobi eigensolver. Throws NumericalError when the sweep cap is hit.
Spectrum sym_eigen(const SymMatrix& a);

double lambda_min(const SymMatrix& a);
double lambda_max(const SymMatrix& a);

/// Strict test lambda_min(a) > margin.
bool is_pd(const SymMatrix& a, double margin = 0.0);

/// Spectral (2-)norm of a general matrix, via the largest eigenvalue of A^T A.
double spectral_norm(const Matrix& a);

Matrix kron(const Matrix& a, const Matrix& b);

/// I_3 - b b^T for a unit 3-vector b. Throws ValidationError when b is not unit.
SymMatrix projection_matrix(const Vec3& b);

/// Inverse of a symmetric positive definite matrix through its Cholesky
/// factor. Throws NumericalError when the matrix is not positive definite.
SymMatrix spd_inverse(const SymMatrix& a);

double norm(std::span<const double> x);
double dot(std::span<const double> a, std::span<const double> b);
Vec3 normalized(const Vec3& v);
Vec3 operator-(const Vec3& a, const Vec3& b);
Vec3 operator+(const Vec3& a, const Vec3& b);
Vec3 operator*(double s, const Vec3& a);
Vec3 cross(const Vec3& a, const Vec3& b);

/// One classical 4th-order Runge-Kutta step of x' = f(t, x).
/// Throws IntegrationError (carrying the stage time) on a non-finite derivative.
template <class F>
Vector rk4_step(F&& f, double t, const Vector& state, double h) {
  if (!(h > 0.0)) throw ValidationError("rk4_step: step must be positive");
  const std::size_t n = state.size();
  auto checked = [&](double ts, const Vector& x) {
    Vector d = f(ts, x);
    if (d.size() != n) throw ValidationError("rk4_step: derivative size mismatch");
    for (double v : d) {
      if (!std::isfinite(v)) {
        throw IntegrationError("rk4_step: non-finite derivative at t=" + std::to_string(ts), ts);
      }
    }
    return d;
  };
  auto axpy = [n](const Vector& x, double a, const Vector& y) {
    Vector r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = x[i] + a * y[i];
    return r;
  };
  const Vector k1 = checked(t, state);
  const Vector k2 = checked(t + 0.5 * h, axpy(state, 0.5 * h, k1));
  const Vector k3 = checked(t + 0.5 * h, axpy(state, 0.5 * h, k2));
  const Vector k4 = checked(t + h, axpy(state, h, k3));
  Vector out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = state[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  return out;
}

}  // namespace ctrack
