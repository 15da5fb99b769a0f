#pragma once

#include "mfd3d/common.hpp"
#include "mfd3d/geometry.hpp"
#include "mfd3d/selection.hpp"
#include "mfd3d/simd.hpp"

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mfd3d::linsys {

/// Compressed sparse row matrix, n x n, columns strictly increasing per row,
/// no stored zeros.
struct SparseMatrix {
  std::size_t n = 0;
  std::vector<std::size_t> offsets{0};
  std::vector<simd::ColIndex> cols;
  std::vector<double> values;

  struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
  };

  /// Sums duplicates and drops zeros.
  static SparseMatrix from_triplets(std::size_t n, std::vector<Triplet> triplets);
  static SparseMatrix identity(std::size_t n);

  std::size_t nnz() const { return values.size(); }
  /// Stored value or 0.
  double at(std::size_t row, std::size_t col) const;
  /// y = A x.
  void multiply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> multiply(std::span<const double> x) const;
  SparseMatrix transposed() const;
  /// Throws Error when the storage invariants are violated.
  void validate() const;
};

/// Stencil with weights aligned to its members; `failure` set when the
/// weights could not be computed.
struct WeightedStencil {
  selection::InfluenceSet set;
  std::vector<double> weights;
  std::string failure;

  bool ok() const { return failure.empty(); }
};

/// Unknowns are the interior nodes; row i belongs to interior node row_nodes[i].
struct LinearProblem {
  SparseMatrix A;
  std::vector<double> rhs;
  std::vector<std::size_t> row_nodes;
};

using ScalarField = std::function<double(const Point3 &)>;

/// Stencil weights unusable at a given node.
class AssemblyError : public Error {
public:
  AssemblyError(const std::string &what, std::size_t node) : Error(what), node_(node) {}
  std::size_t node() const noexcept { return node_; }

private:
  std::size_t node_;
};

/// Eliminates boundary members into the right-hand side:
/// rhs[c] = f(c) - sum over boundary members of w * g. `stencils[i]` must be
/// the stencil of interior node i.
LinearProblem assemble(const geometry::NodeSet &nodes, std::span<const WeightedStencil> stencils,
                       const ScalarField &f, const ScalarField &g);

/// Sparse LU (COLAMD ordering) of a square matrix.
class SparseLuSolver {
public:
  /// Throws SingularMatrixError when the factorization breaks down.
  explicit SparseLuSolver(const SparseMatrix &A);
  ~SparseLuSolver();
  SparseLuSolver(SparseLuSolver &&) noexcept;
  SparseLuSolver &operator=(SparseLuSolver &&) noexcept;

  std::size_t size() const { return n_; }
  std::vector<double> solve(std::span<const double> b) const;
  std::vector<double> solve_transposed(std::span<const double> b) const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::size_t n_ = 0;
};

/// Direct solve with a residual check
/// ||Ax - b||_inf <= 1e-10 (||A||_inf ||x||_inf + ||b||_inf);
/// throws SingularMatrixError when the check fails or x is not finite.
std::vector<double> sparse_lu_solve(const SparseMatrix &A, std::span<const double> b,
                                    const SparseLuSolver *factorization = nullptr);

double norm_inf(const SparseMatrix &A);
double norm_inf(std::span<const double> v);
double norm2(std::span<const double> v);

/// Estimate of ||A^-T||_1 = ||A^-1||_inf from the factorization.
double onenormest_inv_transpose(const SparseLuSolver &lu);
inline double stability_constant(const SparseLuSolver &lu) { return onenormest_inv_transpose(lu); }

/// perm[new] = old. Reverse Cuthill-McKee on pattern(A) + pattern(A^T),
/// each component started from its minimum-degree vertex.
std::vector<std::size_t> rcm_ordering(const SparseMatrix &A);
/// B(i, j) = A(perm[i], perm[j]).
SparseMatrix permute(const SparseMatrix &A, std::span<const std::size_t> perm);
std::size_t bandwidth(const SparseMatrix &A);

/// Zero-fill incomplete LU. L is unit lower triangular, both factors are
/// stored in one matrix with the pattern of A.
class Ilu0 {
public:
  /// Throws Error on a zero or missing pivot.
  explicit Ilu0(const SparseMatrix &A);

  /// z = (LU)^-1 r.
  void apply(std::span<const double> r, std::span<double> z) const;
  const SparseMatrix &factors() const { return lu_; }

private:
  SparseMatrix lu_;
  std::vector<std::size_t> diag_;
};

struct IterReport {
  enum class Stop { Converged, MaxIterations, Breakdown };

  /// Multiple of 0.5.
  double iterations = 0.0;
  double relative_residual = 0.0;
  bool converged = false;
  Stop stop = Stop::MaxIterations;
};

struct BicgstabOptions {
  double tol = 1e-6;
  int maxit = 1000;
};

struct BicgstabResult {
  std::vector<double> x;
  IterReport report;
};

/// Right-preconditioned BiCGSTAB; converged iff ||b - Ax||_2 <= tol ||b||_2.
/// Each BiCG step and each minimal-residual step counts as half an iteration.
BicgstabResult bicgstab(const SparseMatrix &A, std::span<const double> b, const Ilu0 *precond = nullptr,
                        BicgstabOptions opts = {}, std::span<const double> x0 = {});

/// RCM permutation, ILU(0) of the permuted matrix (unpreconditioned when it
/// has a zero pivot), BiCGSTAB, and the solution mapped back.
struct IterativeSolve {
  std::vector<double> x;
  IterReport report;
  bool preconditioned = true;
};
IterativeSolve solve_bicgstab_ilu_rcm(const SparseMatrix &A, std::span<const double> b, BicgstabOptions opts = {});

/// Matrix Market coordinate real general, 1-based indices.
void write_matrix_market(std::ostream &out, const SparseMatrix &A);
void save_matrix_market(const std::filesystem::path &path, const SparseMatrix &A);

} // namespace mfd3d::linsys
