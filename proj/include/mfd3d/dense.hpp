#pragma once

// Small dense kernels for per-stencil systems (tens of unknowns).

#include <cstddef>
#include <span>
#include <vector>

namespace mfd3d::dense {

/// Row-major dense matrix.
class Matrix {
public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double &operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  std::span<const double> data() const { return data_; }

  double one_norm() const;
  std::vector<double> multiply(std::span<const double> x) const;
  std::vector<double> multiply_transposed(std::span<const double> x) const;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// LU with partial pivoting of a square matrix.
class Lu {
public:
  explicit Lu(Matrix a);

  /// An exactly zero pivot was met; solves are then invalid.
  bool singular() const { return singular_; }
  std::vector<double> solve(std::span<const double> b) const;
  std::vector<double> solve_transposed(std::span<const double> b) const;
  /// Reciprocal 1-norm condition estimate; 0 when singular.
  double rcond() const;

private:
  Matrix lu_;
  std::vector<std::size_t> piv_;
  double anorm_ = 0.0;
  bool singular_ = false;
};

/// Householder QR with column pivoting, A P = Q R.
class PivotedQr {
public:
  explicit PivotedQr(Matrix a);

  std::size_t rows() const { return qr_.rows(); }
  std::size_t cols() const { return qr_.cols(); }
  /// Original column index of pivot position j.
  std::size_t pivot(std::size_t j) const { return perm_[j]; }
  std::span<const std::size_t> permutation() const { return perm_; }
  /// R(i, j) for i <= j, with columns in pivot order.
  double r(std::size_t i, std::size_t j) const { return qr_(i, j); }
  /// Count of leading |R(j,j)| >= tol * |R(0,0)|.
  std::size_t rank(double relative_tol) const;
  /// In-place Q^T b.
  void apply_qt(std::span<double> b) const;
  /// First `count` columns of Q, as a rows() x count matrix.
  Matrix q_columns(std::size_t count) const;

private:
  Matrix qr_;
  std::vector<double> tau_;
  std::vector<std::size_t> perm_;
};

} // namespace mfd3d::dense
