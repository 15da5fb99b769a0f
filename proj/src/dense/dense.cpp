#include "mfd3d/dense.hpp"
#include "mfd3d/common.hpp"
#include "mfd3d/norm_estimate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mfd3d::dense {

double Matrix::one_norm() const {
  double best = 0.0;
  for (std::size_t j = 0; j < cols_; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) s += std::abs((*this)(i, j));
    best = std::max(best, s);
  }
  return best;
}

std::vector<double> Matrix::multiply(std::span<const double> x) const {
  std::vector<double> y(rows_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) s += (*this)(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

std::vector<double> Matrix::multiply_transposed(std::span<const double> x) const {
  std::vector<double> y(cols_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) y[j] += (*this)(i, j) * x[i];
  return y;
}

Lu::Lu(Matrix a) : lu_(std::move(a)) {
  if (lu_.rows() != lu_.cols()) throw Error("LU factorization needs a square matrix");
  const std::size_t n = lu_.rows();
  anorm_ = lu_.one_norm();
  piv_.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    double best = std::abs(lu_(k, k));
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(lu_(i, k)) > best) {
        best = std::abs(lu_(i, k));
        p = i;
      }
    piv_[k] = p;
    if (best == 0.0) {
      singular_ = true;
      continue;
    }
    if (p != k)
      for (std::size_t j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(p, j));
    const double inv = 1.0 / lu_(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double m = lu_(i, k) * inv;
      lu_(i, k) = m;
      if (m == 0.0) continue;
      for (std::size_t j = k + 1; j < n; ++j) lu_(i, j) -= m * lu_(k, j);
    }
  }
}

std::vector<double> Lu::solve(std::span<const double> b) const {
  const std::size_t n = lu_.rows();
  std::vector<double> x(b.begin(), b.end());
  for (std::size_t k = 0; k < n; ++k)
    if (piv_[k] != k) std::swap(x[k], x[piv_[k]]);
  for (std::size_t i = 0; i < n; ++i) {
    double s = x[i];
    for (std::size_t j = 0; j < i; ++j) s -= lu_(i, j) * x[j];
    x[i] = s;
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = x[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= lu_(i, j) * x[j];
    x[i] = s / lu_(i, i);
  }
  return x;
}

std::vector<double> Lu::solve_transposed(std::span<const double> b) const {
  const std::size_t n = lu_.rows();
  std::vector<double> x(b.begin(), b.end());
  for (std::size_t i = 0; i < n; ++i) {
    double s = x[i];
    for (std::size_t j = 0; j < i; ++j) s -= lu_(j, i) * x[j];
    x[i] = s / lu_(i, i);
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = x[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= lu_(j, i) * x[j];
    x[i] = s;
  }
  for (std::size_t k = n; k-- > 0;)
    if (piv_[k] != k) std::swap(x[k], x[piv_[k]]);
  return x;
}

double Lu::rcond() const {
  if (singular_ || anorm_ == 0.0) return 0.0;
  const double inv_norm = estimate_one_norm(
      lu_.rows(), [&](const std::vector<double> &x, std::vector<double> &y) { y = solve(x); },
      [&](const std::vector<double> &x, std::vector<double> &y) { y = solve_transposed(x); });
  if (!std::isfinite(inv_norm) || inv_norm == 0.0) return 0.0;
  return 1.0 / (anorm_ * inv_norm);
}

PivotedQr::PivotedQr(Matrix a) : qr_(std::move(a)) {
  const std::size_t m = qr_.rows();
  const std::size_t n = qr_.cols();
  const std::size_t steps = std::min(m, n);
  perm_.resize(n);
  std::iota(perm_.begin(), perm_.end(), std::size_t{0});
  tau_.assign(steps, 0.0);
  for (std::size_t j = 0; j < steps; ++j) {
    // Column norms are recomputed each step; matrices here are small.
    std::size_t best = j;
    double best_norm = -1.0;
    for (std::size_t c = j; c < n; ++c) {
      double s = 0.0;
      for (std::size_t i = j; i < m; ++i) s += qr_(i, c) * qr_(i, c);
      if (s > best_norm) {
        best_norm = s;
        best = c;
      }
    }
    if (best != j) {
      for (std::size_t i = 0; i < m; ++i) std::swap(qr_(i, j), qr_(i, best));
      std::swap(perm_[j], perm_[best]);
    }
    const double xnorm = std::sqrt(std::max(best_norm, 0.0));
    if (xnorm == 0.0) continue;
    const double x0 = qr_(j, j);
    const double beta = x0 >= 0.0 ? -xnorm : xnorm;
    const double tau = (beta - x0) / beta;
    const double scale = 1.0 / (x0 - beta);
    for (std::size_t i = j + 1; i < m; ++i) qr_(i, j) *= scale;
    qr_(j, j) = beta;
    tau_[j] = tau;
    for (std::size_t c = j + 1; c < n; ++c) {
      double w = qr_(j, c);
      for (std::size_t i = j + 1; i < m; ++i) w += qr_(i, j) * qr_(i, c);
      w *= tau;
      qr_(j, c) -= w;
      for (std::size_t i = j + 1; i < m; ++i) qr_(i, c) -= w * qr_(i, j);
    }
  }
}

std::size_t PivotedQr::rank(double relative_tol) const {
  const std::size_t steps = std::min(rows(), cols());
  if (steps == 0) return 0;
  const double r00 = std::abs(qr_(0, 0));
  if (r00 == 0.0) return 0;
  std::size_t r = 0;
  while (r < steps && std::abs(qr_(r, r)) >= relative_tol * r00) ++r;
  return r;
}

void PivotedQr::apply_qt(std::span<double> b) const {
  const std::size_t m = rows();
  for (std::size_t j = 0; j < tau_.size(); ++j) {
    if (tau_[j] == 0.0) continue;
    double w = b[j];
    for (std::size_t i = j + 1; i < m; ++i) w += qr_(i, j) * b[i];
    w *= tau_[j];
    b[j] -= w;
    for (std::size_t i = j + 1; i < m; ++i) b[i] -= w * qr_(i, j);
  }
}

Matrix PivotedQr::q_columns(std::size_t count) const {
  const std::size_t m = rows();
  Matrix q(m, count);
  std::vector<double> col(m);
  for (std::size_t c = 0; c < count; ++c) {
    std::fill(col.begin(), col.end(), 0.0);
    col[c] = 1.0;
    for (std::size_t j = tau_.size(); j-- > 0;) {
      if (tau_[j] == 0.0) continue;
      double w = col[j];
      for (std::size_t i = j + 1; i < m; ++i) w += qr_(i, j) * col[i];
      w *= tau_[j];
      col[j] -= w;
      for (std::size_t i = j + 1; i < m; ++i) col[i] -= w * qr_(i, j);
    }
    for (std::size_t i = 0; i < m; ++i) q(i, c) = col[i];
  }
  return q;
}

} // namespace mfd3d::dense
