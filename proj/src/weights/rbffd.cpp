#include "mfd3d/weights.hpp"
#include "mfd3d/dense.hpp"

#include <algorithm>
#include <cmath>

namespace mfd3d::weights {
namespace {

constexpr double kRankTol = 1e-10;
constexpr double kConsistencyTol = 1e-9;
constexpr double kMinRcond = 1e-13;
constexpr double kExactnessTol = 1e-9;

double ipow(double x, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= x;
  return r;
}

} // namespace

PolyBasis::PolyBasis(int order) : order_(order) {
  if (order < 1) throw Error("polynomial order must be at least 1");
  for (int degree = 0; degree < order; ++degree)
    for (int a = degree; a >= 0; --a)
      for (int b = degree - a; b >= 0; --b) exponents_.push_back({a, b, degree - a - b});
}

void PolyBasis::eval_into(const Point3 &p, std::span<double> out) const {
  for (std::size_t i = 0; i < exponents_.size(); ++i) {
    const auto &e = exponents_[i];
    out[i] = ipow(p.x, e[0]) * ipow(p.y, e[1]) * ipow(p.z, e[2]);
  }
}

void PolyBasis::laplacian_into(const Point3 &p, std::span<double> out) const {
  for (std::size_t i = 0; i < exponents_.size(); ++i) {
    const auto [a, b, c] = exponents_[i];
    double v = 0.0;
    if (a >= 2) v += a * (a - 1) * ipow(p.x, a - 2) * ipow(p.y, b) * ipow(p.z, c);
    if (b >= 2) v += b * (b - 1) * ipow(p.x, a) * ipow(p.y, b - 2) * ipow(p.z, c);
    if (c >= 2) v += c * (c - 1) * ipow(p.x, a) * ipow(p.y, b) * ipow(p.z, c - 2);
    out[i] = v;
  }
}

std::vector<double> PolyBasis::eval(const Point3 &p) const {
  std::vector<double> out(size());
  eval_into(p, out);
  return out;
}

std::vector<double> PolyBasis::laplacian(const Point3 &p) const {
  std::vector<double> out(size());
  laplacian_into(p, out);
  return out;
}

PolyharmonicRbf::PolyharmonicRbf(int exponent) : exponent_(exponent) {
  if (exponent < 3 || exponent % 2 == 0) throw Error("polyharmonic exponent must be odd and at least 3");
}

double PolyharmonicRbf::value(double r) const { return ipow(r, exponent_); }

double PolyharmonicRbf::laplacian(double r) const {
  return static_cast<double>(exponent_ * (exponent_ + 1)) * ipow(r, exponent_ - 2);
}

double mean_member_distance(const Point3 &center, std::span<const Point3> members) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const Point3 &m : members) {
    const double d = distance(m, center);
    if (d == 0.0) continue;
    sum += d;
    ++count;
  }
  return count == 0 ? 1.0 : sum / static_cast<double>(count);
}

double exactness_residual(const Point3 &center, std::span<const Point3> members, std::span<const double> weights,
                          int order) {
  const PolyBasis basis(order);
  const double scale = mean_member_distance(center, members);
  const std::size_t L = basis.size();
  std::vector<double> target(L), acc(L, 0.0), values(L);
  basis.laplacian_into({0, 0, 0}, target);
  for (std::size_t j = 0; j < members.size(); ++j) {
    basis.eval_into((members[j] - center) * (1.0 / scale), values);
    const double w = weights[j] * scale * scale;
    for (std::size_t i = 0; i < L; ++i) acc[i] += w * values[i];
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < L; ++i)
    worst = std::max(worst, std::abs(target[i] - acc[i]) / (1.0 + std::abs(target[i])));
  return worst;
}

// The saddle system [[Phi, P], [P^T, 0]] is singular whenever P lacks full
// column rank, even though the weights stay unique as long as P^T w = Lap p
// is solvable. We therefore replace P by an orthonormal basis U of its
// column space: P Pi = U [R11 R12], the polynomial conditions fix U^T w = y
// through R11^T y = (Pi^T b)_1 (with R12^T y = (Pi^T b)_2 checked), and
// [[Phi, U], [U^T, 0]] [w; mu] = [Lap phi; y] is nonsingular for
// conditionally positive definite Phi.
WeightResult compute_rbffd_weights(const Point3 &center, std::span<const Point3> members, const PolyharmonicRbf &phi,
                                   int order) {
  if (members.empty()) throw Error("RBF-FD weights need at least the center");
  if (!(members.front() == center)) throw Error("first stencil member must be the center");
  const PolyBasis basis(order);
  const std::size_t k = members.size();
  const std::size_t L = basis.size();
  const double scale = mean_member_distance(center, members);

  std::vector<Point3> x(k);
  for (std::size_t i = 0; i < k; ++i) x[i] = (members[i] - center) * (1.0 / scale);

  dense::Matrix P(k, L);
  std::vector<double> row(L);
  for (std::size_t i = 0; i < k; ++i) {
    basis.eval_into(x[i], row);
    for (std::size_t a = 0; a < L; ++a) P(i, a) = row[a];
  }
  std::vector<double> b_poly(L);
  basis.laplacian_into({0, 0, 0}, b_poly);

  const dense::PivotedQr qr(P);
  const std::size_t r = qr.rank(kRankTol);
  if (r == 0) return WeightResult::fail("polynomial collocation matrix is zero");

  // R11^T y = (Pi^T b)[0:r], forward substitution.
  std::vector<double> y(r);
  for (std::size_t i = 0; i < r; ++i) {
    double s = b_poly[qr.pivot(i)];
    for (std::size_t j = 0; j < i; ++j) s -= qr.r(j, i) * y[j];
    y[i] = s / qr.r(i, i);
  }
  double b_norm = 0.0;
  for (double v : b_poly) b_norm = std::max(b_norm, std::abs(v));
  for (std::size_t c = r; c < L; ++c) {
    double s = 0.0;
    for (std::size_t j = 0; j < std::min(r, c + 1); ++j) s += qr.r(j, c) * y[j];
    if (std::abs(s - b_poly[qr.pivot(c)]) > kConsistencyTol * (1.0 + b_norm))
      return WeightResult::fail("polynomial exactness is not attainable on this stencil");
  }

  const dense::Matrix U = qr.q_columns(r);
  const std::size_t n = k + r;
  dense::Matrix saddle(n, n);
  std::vector<double> rhs(n, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) saddle(i, j) = phi.value(distance(x[i], x[j]));
    for (std::size_t a = 0; a < r; ++a) {
      saddle(i, k + a) = U(i, a);
      saddle(k + a, i) = U(i, a);
    }
    rhs[i] = phi.laplacian(norm(x[i]));
  }
  for (std::size_t a = 0; a < r; ++a) rhs[k + a] = y[a];

  const dense::Lu lu(std::move(saddle));
  if (lu.singular()) return WeightResult::fail("RBF-FD system is singular");
  if (const double rc = lu.rcond(); !(rc >= kMinRcond))
    return WeightResult::fail("RBF-FD system is singular to working precision (rcond " + std::to_string(rc) + ")");
  const std::vector<double> sol = lu.solve(rhs);

  WeightResult out;
  out.values.resize(k);
  const double inv_s2 = 1.0 / (scale * scale);
  for (std::size_t i = 0; i < k; ++i) {
    if (!std::isfinite(sol[i])) return WeightResult::fail("non-finite RBF-FD weight");
    out.values[i] = sol[i] * inv_s2;
  }
  if (const double res = exactness_residual(center, members, out.values, order); !(res <= kExactnessTol))
    return WeightResult::fail("polynomial exactness residual " + std::to_string(res) + " exceeds tolerance");
  return out;
}

std::vector<double> classical_7star_weights(double h) {
  if (!(h > 0.0)) throw Error("7-point star spacing must be positive");
  const double w = 1.0 / (h * h);
  return {-6.0 * w, w, w, w, w, w, w};
}

} // namespace mfd3d::weights
