#include "mfd3d/dense.hpp"
#include "mfd3d/norm_estimate.hpp"

#include <Eigen/Dense>
#include <doctest.h>

#include <random>

using namespace mfd3d;
using namespace mfd3d::dense;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix m(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) m(i, j) = u(rng);
  return m;
}

Eigen::MatrixXd to_eigen(const Matrix &m) {
  Eigen::MatrixXd e(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) e(Eigen::Index(i), Eigen::Index(j)) = m(i, j);
  return e;
}

} // namespace

TEST_CASE("LU solves and transposed solves") {
  for (std::size_t n : {1u, 2u, 5u, 17u, 30u}) {
    const Matrix A = random_matrix(n, n, n);
    const Lu lu(A);
    REQUIRE_FALSE(lu.singular());
    std::vector<double> b(n);
    for (std::size_t i = 0; i < n; ++i) b[i] = double(i) - 1.5;
    const auto x = lu.solve(b);
    const auto r = A.multiply(x);
    const auto xt = lu.solve_transposed(b);
    const auto rt = A.multiply_transposed(xt);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(r[i] == doctest::Approx(b[i]).epsilon(1e-10));
      CHECK(rt[i] == doctest::Approx(b[i]).epsilon(1e-10));
    }
  }
}

TEST_CASE("LU of a singular matrix") {
  Matrix A(3, 3);
  A(0, 0) = 1;
  A(1, 1) = 1;
  const Lu lu(A);
  CHECK(lu.singular());
  CHECK(lu.rcond() == 0.0);
}

TEST_CASE("rcond is close to the exact reciprocal condition number") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Matrix A = random_matrix(12, 12, seed);
    const auto E = to_eigen(A);
    const Eigen::MatrixXd inv = E.inverse();
    const double exact = 1.0 / (E.cwiseAbs().colwise().sum().maxCoeff() * inv.cwiseAbs().colwise().sum().maxCoeff());
    const double est = Lu(A).rcond();
    CHECK(est >= exact * 0.999);
    CHECK(est <= exact * 3.0);
  }
  Matrix D(2, 2);
  D(0, 0) = 1;
  D(1, 1) = 1e-14;
  CHECK(Lu(D).rcond() == doctest::Approx(1e-14));
}

TEST_CASE("pivoted QR reconstructs A P") {
  for (auto [r, c] : {std::pair{9, 100}, std::pair{19, 40}, std::pair{10, 10}, std::pair{12, 5}}) {
    const Matrix A = random_matrix(std::size_t(r), std::size_t(c), std::size_t(r * c));
    const PivotedQr qr(A);
    const std::size_t k = std::min(qr.rows(), qr.cols());
    const Matrix Q = qr.q_columns(k);
    for (std::size_t j = 0; j < k; ++j) {
      for (std::size_t i = 0; i < qr.rows(); ++i) {
        double s = 0.0;
        for (std::size_t l = 0; l <= j; ++l) s += Q(i, l) * qr.r(l, j);
        CHECK(s == doctest::Approx(A(i, qr.pivot(j))).epsilon(1e-12).scale(1.0));
      }
      if (j > 0) CHECK(std::abs(qr.r(j, j)) <= std::abs(qr.r(j - 1, j - 1)) * (1 + 1e-12));
    }
    // Q has orthonormal columns.
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = 0; b < k; ++b) {
        double s = 0.0;
        for (std::size_t i = 0; i < qr.rows(); ++i) s += Q(i, a) * Q(i, b);
        CHECK(s == doctest::Approx(a == b ? 1.0 : 0.0).scale(1.0).epsilon(1e-12));
      }
  }
}

TEST_CASE("pivoted QR reveals rank") {
  // Rank 3: columns are combinations of three random vectors.
  const Matrix B = random_matrix(8, 3, 1), C = random_matrix(3, 20, 2);
  Matrix A(8, 20);
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 20; ++j)
      for (std::size_t l = 0; l < 3; ++l) A(i, j) += B(i, l) * C(l, j);
  const PivotedQr qr(A);
  CHECK(qr.rank(1e-10) == 3);
  std::vector<double> b(8, 1.0);
  qr.apply_qt(b);
  double norm2 = 0.0;
  for (double x : b) norm2 += x * x;
  CHECK(norm2 == doctest::Approx(8.0));
}

TEST_CASE("norm estimator bounds the exact 1-norm") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::size_t n = 3 + seed * 5;
    const Matrix A = random_matrix(n, n, seed + 50);
    const double exact = A.one_norm();
    const double est = estimate_one_norm(
        n, [&](const std::vector<double> &x, std::vector<double> &y) { y = A.multiply(x); },
        [&](const std::vector<double> &x, std::vector<double> &y) { y = A.multiply_transposed(x); });
    CHECK(est <= exact * (1 + 1e-12));
    CHECK(est >= exact / 3.0);
  }
}
