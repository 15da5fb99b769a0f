#include "mfd3d/linsys.hpp"

#include <algorithm>
#include <cmath>

namespace mfd3d::linsys {

Ilu0::Ilu0(const SparseMatrix &A) : lu_(A), diag_(A.n) {
  const std::size_t n = A.n;
  for (std::size_t i = 0; i < n; ++i) {
    const auto begin = lu_.cols.begin() + static_cast<std::ptrdiff_t>(lu_.offsets[i]);
    const auto end = lu_.cols.begin() + static_cast<std::ptrdiff_t>(lu_.offsets[i + 1]);
    const auto it = std::lower_bound(begin, end, static_cast<simd::ColIndex>(i));
    if (it == end || *it != static_cast<simd::ColIndex>(i))
      throw Error("ILU(0): row " + std::to_string(i) + " has no diagonal entry");
    diag_[i] = static_cast<std::size_t>(it - lu_.cols.begin());
  }
  // Row-oriented IKJ elimination restricted to the pattern of A.
  std::vector<std::size_t> where(n, SIZE_MAX);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t p = lu_.offsets[i]; p < lu_.offsets[i + 1]; ++p) where[static_cast<std::size_t>(lu_.cols[p])] = p;
    for (std::size_t p = lu_.offsets[i]; p < diag_[i]; ++p) {
      const auto k = static_cast<std::size_t>(lu_.cols[p]);
      const double pivot = lu_.values[diag_[k]];
      if (pivot == 0.0) throw Error("ILU(0): zero pivot in row " + std::to_string(k));
      const double lik = lu_.values[p] / pivot;
      lu_.values[p] = lik;
      for (std::size_t q = diag_[k] + 1; q < lu_.offsets[k + 1]; ++q) {
        const std::size_t at = where[static_cast<std::size_t>(lu_.cols[q])];
        if (at != SIZE_MAX) lu_.values[at] -= lik * lu_.values[q];
      }
    }
    for (std::size_t p = lu_.offsets[i]; p < lu_.offsets[i + 1]; ++p) where[static_cast<std::size_t>(lu_.cols[p])] = SIZE_MAX;
    if (lu_.values[diag_[i]] == 0.0 || !std::isfinite(lu_.values[diag_[i]]))
      throw Error("ILU(0): zero pivot in row " + std::to_string(i));
  }
}

void Ilu0::apply(std::span<const double> r, std::span<double> z) const {
  const std::size_t n = lu_.n;
  for (std::size_t i = 0; i < n; ++i) {
    double s = r[i];
    for (std::size_t p = lu_.offsets[i]; p < diag_[i]; ++p) s -= lu_.values[p] * z[static_cast<std::size_t>(lu_.cols[p])];
    z[i] = s;
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = z[i];
    for (std::size_t p = diag_[i] + 1; p < lu_.offsets[i + 1]; ++p)
      s -= lu_.values[p] * z[static_cast<std::size_t>(lu_.cols[p])];
    z[i] = s / lu_.values[diag_[i]];
  }
}

namespace {

constexpr double kBreakdown = 1e-30;

double true_residual(const SparseMatrix &A, std::span<const double> b, std::span<const double> x,
                     std::vector<double> &work) {
  A.multiply(x, work);
  for (std::size_t i = 0; i < work.size(); ++i) work[i] = b[i] - work[i];
  return norm2(work);
}

} // namespace

BicgstabResult bicgstab(const SparseMatrix &A, std::span<const double> b, const Ilu0 *precond, BicgstabOptions opts,
                        std::span<const double> x0) {
  const std::size_t n = A.n;
  if (b.size() != n || (!x0.empty() && x0.size() != n)) throw Error("bicgstab: dimension mismatch");
  BicgstabResult out;
  auto &x = out.x;
  auto &rep = out.report;
  x.assign(n, 0.0);
  if (!x0.empty()) std::copy(x0.begin(), x0.end(), x.begin());

  const double nb = norm2(b);
  if (nb == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    rep = {0.0, 0.0, true, IterReport::Stop::Converged};
    return out;
  }
  const double target = opts.tol * nb;
  std::vector<double> work(n);
  std::vector<double> r(n);
  double normr = true_residual(A, b, x, r);
  rep.relative_residual = normr / nb;
  if (normr <= target) {
    rep.converged = true;
    rep.stop = IterReport::Stop::Converged;
    return out;
  }

  const auto precondition = [&](const std::vector<double> &in, std::vector<double> &res) {
    if (precond)
      precond->apply(in, res);
    else
      res = in;
  };

  const std::vector<double> rt = r;
  std::vector<double> p(n, 0.0), v(n, 0.0), ph(n), s(n), sh(n), t(n), xhalf(n);
  double rho = 1.0, alpha = 1.0, omega = 1.0;
  const auto &k = simd::active();
  for (int it = 1; it <= opts.maxit; ++it) {
    const double rho1 = rho;
    rho = k.dot(rt.data(), r.data(), n);
    if (std::abs(rho) < kBreakdown || !std::isfinite(rho)) {
      rep.stop = IterReport::Stop::Breakdown;
      return out;
    }
    if (it == 1) {
      p = r;
    } else {
      const double beta = (rho / rho1) * (alpha / omega);
      if (beta == 0.0 || !std::isfinite(beta)) {
        rep.stop = IterReport::Stop::Breakdown;
        return out;
      }
      // p = r + beta * (p - omega * v)
      k.axpy(-omega, v.data(), p.data(), n);
      for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
    }
    precondition(p, ph);
    A.multiply(ph, v);
    const double rtv = k.dot(rt.data(), v.data(), n);
    if (rtv == 0.0 || !std::isfinite(rtv)) {
      rep.stop = IterReport::Stop::Breakdown;
      return out;
    }
    alpha = rho / rtv;
    xhalf = x;
    k.axpy(alpha, ph.data(), xhalf.data(), n);
    s = r;
    k.axpy(-alpha, v.data(), s.data(), n);
    normr = true_residual(A, b, xhalf, work);
    if (normr <= target) {
      x = xhalf;
      rep = {it - 0.5, normr / nb, true, IterReport::Stop::Converged};
      return out;
    }

    precondition(s, sh);
    A.multiply(sh, t);
    const double tt = k.dot(t.data(), t.data(), n);
    if (tt == 0.0 || !std::isfinite(tt)) {
      x = xhalf;
      rep = {it - 0.5, normr / nb, false, IterReport::Stop::Breakdown};
      return out;
    }
    omega = k.dot(t.data(), s.data(), n) / tt;
    if (std::abs(omega) < kBreakdown) {
      x = xhalf;
      rep = {it - 0.5, normr / nb, false, IterReport::Stop::Breakdown};
      return out;
    }
    x = xhalf;
    k.axpy(omega, sh.data(), x.data(), n);
    r = s;
    k.axpy(-omega, t.data(), r.data(), n);
    normr = true_residual(A, b, x, work);
    rep.iterations = it;
    rep.relative_residual = normr / nb;
    if (normr <= target) {
      rep.converged = true;
      rep.stop = IterReport::Stop::Converged;
      return out;
    }
  }
  rep.stop = IterReport::Stop::MaxIterations;
  return out;
}

IterativeSolve solve_bicgstab_ilu_rcm(const SparseMatrix &A, std::span<const double> b, BicgstabOptions opts) {
  const auto perm = rcm_ordering(A);
  const SparseMatrix B = permute(A, perm);
  std::vector<double> pb(A.n);
  for (std::size_t i = 0; i < A.n; ++i) pb[i] = b[perm[i]];
  IterativeSolve out;
  std::optional<Ilu0> ilu;
  try {
    ilu.emplace(B);
  } catch (const Error &) {
    out.preconditioned = false;
  }
  auto res = bicgstab(B, pb, ilu ? &*ilu : nullptr, opts);
  out.report = res.report;
  out.x.resize(A.n);
  for (std::size_t i = 0; i < A.n; ++i) out.x[perm[i]] = res.x[i];
  return out;
}

} // namespace mfd3d::linsys
