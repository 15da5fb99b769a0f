#include "mfd3d/linsys.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>

namespace mfd3d::linsys {

SparseMatrix SparseMatrix::from_triplets(std::size_t n, std::vector<Triplet> triplets) {
  if (n > static_cast<std::size_t>(std::numeric_limits<simd::ColIndex>::max()))
    throw Error("sparse matrix dimension exceeds the column index range");
  std::sort(triplets.begin(), triplets.end(),
            [](const Triplet &a, const Triplet &b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });
  SparseMatrix A;
  A.n = n;
  A.offsets.assign(n + 1, 0);
  std::size_t i = 0;
  while (i < triplets.size()) {
    const auto [row, col, first] = triplets[i];
    if (row >= n || col >= n) throw Error("sparse matrix entry out of range");
    double sum = first;
    std::size_t j = i + 1;
    for (; j < triplets.size() && triplets[j].row == row && triplets[j].col == col; ++j) sum += triplets[j].value;
    if (sum != 0.0) {
      A.cols.push_back(static_cast<simd::ColIndex>(col));
      A.values.push_back(sum);
      ++A.offsets[row + 1];
    }
    i = j;
  }
  for (std::size_t r = 0; r < n; ++r) A.offsets[r + 1] += A.offsets[r];
  return A;
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
  std::vector<Triplet> t;
  t.reserve(n);
  for (std::size_t i = 0; i < n; ++i) t.push_back({i, i, 1.0});
  return from_triplets(n, std::move(t));
}

double SparseMatrix::at(std::size_t row, std::size_t col) const {
  const auto begin = cols.begin() + static_cast<std::ptrdiff_t>(offsets[row]);
  const auto end = cols.begin() + static_cast<std::ptrdiff_t>(offsets[row + 1]);
  const auto it = std::lower_bound(begin, end, static_cast<simd::ColIndex>(col));
  if (it == end || *it != static_cast<simd::ColIndex>(col)) return 0.0;
  return values[static_cast<std::size_t>(it - cols.begin())];
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  simd::active().csr_spmv(n, offsets.data(), cols.data(), values.data(), x.data(), y.data());
}

std::vector<double> SparseMatrix::multiply(std::span<const double> x) const {
  std::vector<double> y(n);
  multiply(x, y);
  return y;
}

SparseMatrix SparseMatrix::transposed() const {
  SparseMatrix T;
  T.n = n;
  T.offsets.assign(n + 1, 0);
  for (simd::ColIndex c : cols) ++T.offsets[static_cast<std::size_t>(c) + 1];
  for (std::size_t r = 0; r < n; ++r) T.offsets[r + 1] += T.offsets[r];
  T.cols.resize(nnz());
  T.values.resize(nnz());
  std::vector<std::size_t> next(T.offsets.begin(), T.offsets.end() - 1);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t p = offsets[r]; p < offsets[r + 1]; ++p) {
      const std::size_t q = next[static_cast<std::size_t>(cols[p])]++;
      T.cols[q] = static_cast<simd::ColIndex>(r);
      T.values[q] = values[p];
    }
  return T;
}

void SparseMatrix::validate() const {
  if (offsets.size() != n + 1 || offsets.front() != 0 || offsets.back() != values.size() ||
      cols.size() != values.size())
    throw Error("CSR offsets inconsistent with storage");
  for (std::size_t r = 0; r < n; ++r) {
    if (offsets[r] > offsets[r + 1]) throw Error("CSR offsets not monotone at row " + std::to_string(r));
    for (std::size_t p = offsets[r]; p < offsets[r + 1]; ++p) {
      if (cols[p] < 0 || static_cast<std::size_t>(cols[p]) >= n)
        throw Error("CSR column out of range in row " + std::to_string(r));
      if (p > offsets[r] && cols[p] <= cols[p - 1])
        throw Error("CSR columns not strictly increasing in row " + std::to_string(r));
      if (values[p] == 0.0) throw Error("CSR stores an explicit zero in row " + std::to_string(r));
    }
  }
}

LinearProblem assemble(const geometry::NodeSet &nodes, std::span<const WeightedStencil> stencils,
                       const ScalarField &f, const ScalarField &g) {
  const std::size_t n = nodes.interior.size();
  if (stencils.size() < n) throw AssemblyError("interior node " + std::to_string(stencils.size()) + " lacks a stencil", stencils.size());
  LinearProblem out;
  out.rhs.resize(n);
  out.row_nodes.resize(n);
  out.A.n = n;
  out.A.offsets.assign(n + 1, 0);
  std::vector<std::pair<simd::ColIndex, double>> row;
  for (std::size_t i = 0; i < n; ++i) {
    const WeightedStencil &st = stencils[i];
    const std::string who = "node " + std::to_string(i);
    if (st.set.center != i || st.set.members.empty())
      throw AssemblyError("interior " + who + " lacks a stencil", i);
    if (!st.ok()) throw AssemblyError("weights failed at " + who + ": " + st.failure, i);
    if (st.weights.size() != st.set.members.size())
      throw AssemblyError("weights of " + who + " do not match its members", i);
    double rhs = f(nodes.interior[i]);
    row.clear();
    for (std::size_t j = 0; j < st.weights.size(); ++j) {
      const double w = st.weights[j];
      if (!std::isfinite(w)) throw AssemblyError("non-finite weight at " + who, i);
      const std::size_t m = st.set.members[j];
      if (m >= nodes.size()) throw AssemblyError("stencil of " + who + " references unknown node", i);
      if (nodes.is_interior(m))
        row.emplace_back(static_cast<simd::ColIndex>(m), w);
      else
        rhs -= w * g(nodes[m]);
    }
    std::sort(row.begin(), row.end(), [](const auto &a, const auto &b) { return a.first < b.first; });
    bool has_diagonal = false;
    for (std::size_t p = 0; p < row.size();) {
      double sum = row[p].second;
      std::size_t q = p + 1;
      for (; q < row.size() && row[q].first == row[p].first; ++q) sum += row[q].second;
      if (sum != 0.0) {
        out.A.cols.push_back(row[p].first);
        out.A.values.push_back(sum);
        has_diagonal = has_diagonal || static_cast<std::size_t>(row[p].first) == i;
      }
      p = q;
    }
    if (!has_diagonal) throw AssemblyError("zero diagonal weight at " + who, i);
    out.A.offsets[i + 1] = out.A.values.size();
    out.rhs[i] = rhs;
    out.row_nodes[i] = i;
  }
  return out;
}

double norm_inf(const SparseMatrix &A) {
  double best = 0.0;
  for (std::size_t r = 0; r < A.n; ++r) {
    double s = 0.0;
    for (std::size_t p = A.offsets[r]; p < A.offsets[r + 1]; ++p) s += std::abs(A.values[p]);
    best = std::max(best, s);
  }
  return best;
}

double norm_inf(std::span<const double> v) {
  double best = 0.0;
  for (double e : v) {
    if (std::isnan(e)) return e;
    best = std::max(best, std::abs(e));
  }
  return best;
}

double norm2(std::span<const double> v) { return std::sqrt(simd::dot(v, v)); }

void write_matrix_market(std::ostream &out, const SparseMatrix &A) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << A.n << ' ' << A.n << ' ' << A.nnz() << '\n';
  char buf[64];
  for (std::size_t r = 0; r < A.n; ++r)
    for (std::size_t p = A.offsets[r]; p < A.offsets[r + 1]; ++p) {
      const auto res = std::to_chars(buf, buf + sizeof buf, A.values[p]);
      out << r + 1 << ' ' << A.cols[p] + 1 << ' ' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf))
          << '\n';
    }
}

void save_matrix_market(const std::filesystem::path &path, const SparseMatrix &A) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  write_matrix_market(out, A);
  if (!out) throw Error("failed writing " + path.string());
}

} // namespace mfd3d::linsys
