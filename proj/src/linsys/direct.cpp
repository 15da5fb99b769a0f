#include "mfd3d/linsys.hpp"
#include "mfd3d/norm_estimate.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <cmath>

namespace mfd3d::linsys {

struct SparseLuSolver::Impl {
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
};

SparseLuSolver::SparseLuSolver(const SparseMatrix &A) : impl_(std::make_unique<Impl>()), n_(A.n) {
  const auto n = static_cast<Eigen::Index>(A.n);
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(A.nnz());
  for (std::size_t r = 0; r < A.n; ++r)
    for (std::size_t p = A.offsets[r]; p < A.offsets[r + 1]; ++p)
      t.emplace_back(static_cast<int>(r), A.cols[p], A.values[p]);
  Eigen::SparseMatrix<double> M(n, n);
  M.setFromTriplets(t.begin(), t.end());
  M.makeCompressed();
  impl_->lu.analyzePattern(M);
  impl_->lu.factorize(M);
  if (impl_->lu.info() != Eigen::Success)
    throw SingularMatrixError("matrix is singular to working precision: " + impl_->lu.lastErrorMessage());
}

SparseLuSolver::~SparseLuSolver() = default;
SparseLuSolver::SparseLuSolver(SparseLuSolver &&) noexcept = default;
SparseLuSolver &SparseLuSolver::operator=(SparseLuSolver &&) noexcept = default;

std::vector<double> SparseLuSolver::solve(std::span<const double> b) const {
  const Eigen::Map<const Eigen::VectorXd> rhs(b.data(), static_cast<Eigen::Index>(b.size()));
  const Eigen::VectorXd x = impl_->lu.solve(rhs);
  return {x.data(), x.data() + x.size()};
}

std::vector<double> SparseLuSolver::solve_transposed(std::span<const double> b) const {
  const Eigen::Map<const Eigen::VectorXd> rhs(b.data(), static_cast<Eigen::Index>(b.size()));
  const Eigen::VectorXd x = impl_->lu.transpose().solve(rhs);
  return {x.data(), x.data() + x.size()};
}

std::vector<double> sparse_lu_solve(const SparseMatrix &A, std::span<const double> b,
                                    const SparseLuSolver *factorization) {
  if (b.size() != A.n) throw Error("right-hand side length does not match the matrix");
  std::optional<SparseLuSolver> own;
  if (!factorization) factorization = &own.emplace(A);
  std::vector<double> x = factorization->solve(b);
  std::vector<double> r = A.multiply(x);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
  const double xn = norm_inf(x);
  const double rn = norm_inf(r);
  if (!std::isfinite(xn) || !(rn <= 1e-10 * (norm_inf(A) * xn + norm_inf(b))))
    throw SingularMatrixError("matrix is singular to working precision");
  return x;
}

double onenormest_inv_transpose(const SparseLuSolver &lu) {
  return estimate_one_norm(
      lu.size(), [&](const std::vector<double> &x, std::vector<double> &y) { y = lu.solve_transposed(x); },
      [&](const std::vector<double> &x, std::vector<double> &y) { y = lu.solve(x); });
}

} // namespace mfd3d::linsys
