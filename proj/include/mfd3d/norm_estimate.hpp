#pragma once

// Block 1-norm power method (Higham & Tisseur, SIAM J. Matrix Anal. Appl.
// 21(4), 2000) for an operator B available only through products B*X and
// B^T*X. The returned value is ||B*x||_1 for some x with ||x||_1 = 1, so it
// never exceeds ||B||_1 beyond rounding.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace mfd3d {

struct NormEstimateOptions {
  int columns = 2;
  int max_sweeps = 5;
  std::uint64_t seed = 0x5eed5eedULL;
};

/// `apply(x, y)` computes y = B x and `apply_transposed(x, y)` y = B^T x for
/// vectors of length n.
template <class Apply, class ApplyTransposed>
double estimate_one_norm(std::size_t n, Apply &&apply, ApplyTransposed &&apply_transposed,
                         NormEstimateOptions opts = {}) {
  if (n == 0) return 0.0;
  std::vector<double> x(n), y(n);
  const auto one_norm = [](const std::vector<double> &v) {
    double s = 0.0;
    for (double e : v) s += std::abs(e);
    return s;
  };

  // Small operators: exact column sums.
  if (n <= 4) {
    double best = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      std::fill(x.begin(), x.end(), 0.0);
      x[j] = 1.0;
      apply(x, y);
      best = std::max(best, one_norm(y));
    }
    return best;
  }

  const std::size_t t = static_cast<std::size_t>(std::clamp<int>(opts.columns, 1, static_cast<int>(n)));
  std::mt19937_64 rng(opts.seed);
  const auto random_sign = [&] { return (rng() & 1U) ? 1.0 : -1.0; };
  const double inv_n = 1.0 / static_cast<double>(n);

  std::vector<std::vector<double>> X(t, std::vector<double>(n, inv_n));
  for (std::size_t c = 1; c < t; ++c) {
    // Resample until the column is not parallel to an earlier one.
    for (int attempt = 0; attempt < 32; ++attempt) {
      for (double &e : X[c]) e = random_sign() * inv_n;
      bool parallel = false;
      for (std::size_t p = 0; p < c && !parallel; ++p) {
        double d = 0.0;
        for (std::size_t i = 0; i < n; ++i) d += X[c][i] * X[p][i];
        parallel = std::abs(std::abs(d) - inv_n) < 1e-14;
      }
      if (!parallel) break;
    }
  }

  std::vector<std::vector<double>> Y(t, std::vector<double>(n));
  std::vector<std::vector<double>> S(t, std::vector<double>(n)), S_old;
  std::vector<std::vector<double>> Z(t, std::vector<double>(n));
  std::vector<bool> used(n, false);
  std::vector<std::size_t> order(n);
  std::vector<double> h(n);
  // unit_of[c]: index j when X[c] = e_j, n otherwise.
  std::vector<std::size_t> unit_of(t, n);
  double est = 0.0, est_old = 0.0;
  std::size_t best_index = n;

  for (int sweep = 1; sweep <= opts.max_sweeps; ++sweep) {
    std::size_t best_col = 0;
    est = 0.0;
    for (std::size_t c = 0; c < t; ++c) {
      apply(X[c], Y[c]);
      const double nrm = one_norm(Y[c]);
      if (nrm > est) {
        est = nrm;
        best_col = c;
      }
    }
    if (sweep >= 2 && est <= est_old) {
      est = est_old;
      break;
    }
    if (sweep == 1 || est > est_old) best_index = unit_of[best_col];
    est_old = est;
    if (sweep == opts.max_sweeps) break;

    S_old = S;
    for (std::size_t c = 0; c < t; ++c)
      for (std::size_t i = 0; i < n; ++i) S[c][i] = Y[c][i] >= 0.0 ? 1.0 : -1.0;
    if (sweep >= 2) {
      // Every sign vector repeated from the previous sweep: converged.
      bool all_repeat = true;
      for (std::size_t c = 0; c < t && all_repeat; ++c) {
        bool found = false;
        for (std::size_t p = 0; p < t && !found; ++p)
          found = std::equal(S[c].begin(), S[c].end(), S_old[p].begin());
        all_repeat = found;
      }
      if (all_repeat) break;
    }
    for (std::size_t c = 0; c < t; ++c) apply_transposed(S[c], Z[c]);
    for (std::size_t i = 0; i < n; ++i) {
      double m = 0.0;
      for (std::size_t c = 0; c < t; ++c) m = std::max(m, std::abs(Z[c][i]));
      h[i] = m;
    }
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return h[a] > h[b]; });
    if (sweep >= 2 && best_index < n && h[order[0]] <= h[best_index]) break;
    if (sweep >= 2 && std::all_of(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(t),
                                  [&](std::size_t i) { return used[i]; }))
      break;
    std::size_t filled = 0;
    for (std::size_t k = 0; k < n && filled < t; ++k) {
      const std::size_t i = order[k];
      if (used[i]) continue;
      used[i] = true;
      std::fill(X[filled].begin(), X[filled].end(), 0.0);
      X[filled][i] = 1.0;
      unit_of[filled] = i;
      ++filled;
    }
    if (filled < t) break;
  }
  return est;
}

} // namespace mfd3d
