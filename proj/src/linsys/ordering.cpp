#include "mfd3d/linsys.hpp"

#include <algorithm>
#include <numeric>

namespace mfd3d::linsys {

std::vector<std::size_t> rcm_ordering(const SparseMatrix &A) {
  const std::size_t n = A.n;
  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t p = A.offsets[r]; p < A.offsets[r + 1]; ++p) {
      const auto c = static_cast<std::size_t>(A.cols[p]);
      if (c == r) continue;
      adj[r].push_back(c);
      adj[c].push_back(r);
    }
  std::vector<std::size_t> degree(n);
  for (std::size_t v = 0; v < n; ++v) {
    auto &list = adj[v];
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
    degree[v] = list.size();
  }
  const auto by_degree = [&](std::size_t a, std::size_t b) {
    return degree[a] != degree[b] ? degree[a] < degree[b] : a < b;
  };
  std::vector<std::size_t> starts(n);
  std::iota(starts.begin(), starts.end(), std::size_t{0});
  std::sort(starts.begin(), starts.end(), by_degree);

  std::vector<std::size_t> order;
  order.reserve(n);
  std::vector<bool> seen(n, false);
  std::vector<std::size_t> next;
  for (std::size_t s : starts) {
    if (seen[s]) continue;
    seen[s] = true;
    std::size_t head = order.size();
    order.push_back(s);
    while (head < order.size()) {
      const std::size_t v = order[head++];
      next.clear();
      for (std::size_t u : adj[v])
        if (!seen[u]) {
          seen[u] = true;
          next.push_back(u);
        }
      std::sort(next.begin(), next.end(), by_degree);
      order.insert(order.end(), next.begin(), next.end());
    }
  }
  std::reverse(order.begin(), order.end());
  return order;
}

SparseMatrix permute(const SparseMatrix &A, std::span<const std::size_t> perm) {
  const std::size_t n = A.n;
  if (perm.size() != n) throw Error("permutation length does not match the matrix");
  std::vector<std::size_t> inverse(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (perm[i] >= n || inverse[perm[i]] != n) throw Error("invalid permutation");
    inverse[perm[i]] = i;
  }
  SparseMatrix B;
  B.n = n;
  B.offsets.assign(n + 1, 0);
  B.cols.reserve(A.nnz());
  B.values.reserve(A.nnz());
  std::vector<std::pair<simd::ColIndex, double>> row;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = perm[i];
    row.clear();
    for (std::size_t p = A.offsets[r]; p < A.offsets[r + 1]; ++p)
      row.emplace_back(static_cast<simd::ColIndex>(inverse[static_cast<std::size_t>(A.cols[p])]), A.values[p]);
    std::sort(row.begin(), row.end(), [](const auto &a, const auto &b) { return a.first < b.first; });
    for (const auto &[c, v] : row) {
      B.cols.push_back(c);
      B.values.push_back(v);
    }
    B.offsets[i + 1] = B.values.size();
  }
  return B;
}

std::size_t bandwidth(const SparseMatrix &A) {
  std::size_t bw = 0;
  for (std::size_t r = 0; r < A.n; ++r)
    for (std::size_t p = A.offsets[r]; p < A.offsets[r + 1]; ++p) {
      const auto c = static_cast<std::size_t>(A.cols[p]);
      bw = std::max(bw, c > r ? c - r : r - c);
    }
  return bw;
}

} // namespace mfd3d::linsys
