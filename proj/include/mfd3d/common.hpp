#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace mfd3d {

/// Point or displacement in R^3.
struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Point3() = default;
  constexpr Point3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

  constexpr double operator[](std::size_t i) const { return i == 0 ? x : (i == 1 ? y : z); }

  constexpr Point3 &operator+=(const Point3 &o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  constexpr Point3 &operator-=(const Point3 &o) {
    x -= o.x;
    y -= o.y;
    z -= o.z;
    return *this;
  }
  constexpr Point3 &operator*=(double s) {
    x *= s;
    y *= s;
    z *= s;
    return *this;
  }

  friend constexpr Point3 operator+(Point3 a, const Point3 &b) { return a += b; }
  friend constexpr Point3 operator-(Point3 a, const Point3 &b) { return a -= b; }
  friend constexpr Point3 operator-(const Point3 &a) { return {-a.x, -a.y, -a.z}; }
  friend constexpr Point3 operator*(Point3 a, double s) { return a *= s; }
  friend constexpr Point3 operator*(double s, Point3 a) { return a *= s; }
  friend constexpr bool operator==(const Point3 &, const Point3 &) = default;
};

constexpr double dot(const Point3 &a, const Point3 &b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

constexpr Point3 cross(const Point3 &a, const Point3 &b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

// Evaluated as (dx*dx + dy*dy) + dz*dz; the SIMD distance kernels use the
// same association so tie-breaking on equal distances agrees bitwise.
inline double squared_norm(const Point3 &a) { return a.x * a.x + a.y * a.y + a.z * a.z; }
inline double norm(const Point3 &a) { return std::sqrt(squared_norm(a)); }
inline double squared_distance(const Point3 &a, const Point3 &b) { return squared_norm(a - b); }
inline double distance(const Point3 &a, const Point3 &b) { return std::sqrt(squared_distance(a, b)); }

inline bool is_finite(const Point3 &p) {
  return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z);
}

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file. `line()` is 1-based, or 0 when not line-oriented.
class ParseError : public Error {
public:
  ParseError(const std::string &what, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

/// Linear system singular to working precision.
class SingularMatrixError : public Error {
public:
  using Error::Error;
};

} // namespace mfd3d
