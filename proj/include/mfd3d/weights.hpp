#pragma once

#include "mfd3d/common.hpp"

#include <array>
#include <span>
#include <string>
#include <vector>

namespace mfd3d::weights {

/// Trivariate monomials of total degree < order, graded lexicographic
/// (1, x, y, z, x^2, xy, xz, y^2, yz, z^2, x^3, ...).
class PolyBasis {
public:
  explicit PolyBasis(int order);

  int order() const { return order_; }
  std::size_t size() const { return exponents_.size(); }
  std::span<const std::array<int, 3>> exponents() const { return exponents_; }

  std::vector<double> eval(const Point3 &p) const;
  std::vector<double> laplacian(const Point3 &p) const;
  void eval_into(const Point3 &p, std::span<double> out) const;
  void laplacian_into(const Point3 &p, std::span<double> out) const;

private:
  int order_;
  std::vector<std::array<int, 3>> exponents_;
};

/// Dimension C(order + 2, 3) of the polynomials of degree < order.
constexpr std::size_t poly_dimension(int order) {
  return static_cast<std::size_t>(order) * static_cast<std::size_t>(order + 1) *
         static_cast<std::size_t>(order + 2) / 6;
}

/// phi(r) = r^exponent with an odd exponent >= 3.
class PolyharmonicRbf {
public:
  explicit PolyharmonicRbf(int exponent = 5);
  int exponent() const { return exponent_; }
  double value(double r) const;
  /// 3D Laplacian of x -> phi(|x|): exponent * (exponent + 1) * r^(exponent - 2).
  double laplacian(double r) const;

private:
  int exponent_;
};

inline double rbf_eval(const PolyharmonicRbf &phi, double r) { return phi.value(r); }
inline double rbf_laplacian3d(const PolyharmonicRbf &phi, double r) { return phi.laplacian(r); }

/// Weights of a numerical Laplacian, aligned with the stencil members.
/// `failure` is non-empty when no valid weights exist.
struct WeightResult {
  std::vector<double> values;
  std::string failure;

  bool ok() const { return failure.empty(); }
  static WeightResult fail(std::string why) { return {{}, std::move(why)}; }
};

/// Mean distance of the non-center members to the center; 1 when there are none.
double mean_member_distance(const Point3 &center, std::span<const Point3> members);

/// Worst scaled polynomial-exactness residual
///   max_i |Lap p_i(0) - sum_j w_j s^2 p_i((x_j - c) / s)| / (1 + |Lap p_i(0)|)
/// with s the mean member distance.
double exactness_residual(const Point3 &center, std::span<const Point3> members, std::span<const double> weights,
                          int order);

/// Polyharmonic RBF-FD weights with polynomial augmentation of the given order.
/// `members[0]` must equal `center` (Error otherwise). Fails when polynomial exactness cannot be
/// satisfied on the members or the reduced saddle system is numerically singular.
WeightResult compute_rbffd_weights(const Point3 &center, std::span<const Point3> members,
                                   const PolyharmonicRbf &phi = PolyharmonicRbf(5), int order = 3);

/// (-6/h^2, 1/h^2 x 6) for the 7-point star ordered center, +x, -x, +y, -y, +z, -z.
std::vector<double> classical_7star_weights(double h);

} // namespace mfd3d::weights
