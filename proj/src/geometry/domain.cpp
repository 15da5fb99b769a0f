#include "mfd3d/geometry.hpp"

#include <algorithm>
#include <limits>
#include <numbers>
#include <random>

namespace mfd3d::geometry {
namespace {

constexpr double kBaryTol = 1e-10;
constexpr int kMaxRayRetries = 16;

enum class Hit { None, Crossing, Ambiguous };

// Moller-Trumbore with explicit detection of grazing hits near edges,
// vertices, or triangles coplanar with the ray.
Hit intersect(const Point3 &origin, const Point3 &dir, const Point3 &a, const Point3 &b, const Point3 &c,
              double t_tol) {
  const Point3 e1 = b - a;
  const Point3 e2 = c - a;
  const Point3 pvec = cross(dir, e2);
  const double det = dot(e1, pvec);
  const double scale = norm(e1) * norm(e2) * norm(dir);
  const Point3 tvec = origin - a;
  if (std::abs(det) <= kBaryTol * scale) {
    // Parallel: only a problem when the ray runs inside the triangle's plane.
    const Point3 n = cross(e1, e2);
    const double offset = std::abs(dot(tvec, n)) / norm(n);
    return offset <= t_tol ? Hit::Ambiguous : Hit::None;
  }
  const double inv = 1.0 / det;
  const double u = dot(tvec, pvec) * inv;
  if (u < -kBaryTol || u > 1.0 + kBaryTol) return Hit::None;
  const Point3 qvec = cross(tvec, e1);
  const double v = dot(dir, qvec) * inv;
  if (v < -kBaryTol || u + v > 1.0 + kBaryTol) return Hit::None;
  const double t = dot(e2, qvec) * inv;
  if (t < -t_tol) return Hit::None;
  if (t <= t_tol) return Hit::Crossing; // origin on the surface; resolved by the caller
  const double w = 1.0 - u - v;
  if (u < kBaryTol || v < kBaryTol || w < kBaryTol) return Hit::Ambiguous;
  return Hit::Crossing;
}

double unit_double(std::mt19937_64 &rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

Point3 random_direction(std::mt19937_64 &rng) {
  const double z = 2.0 * unit_double(rng) - 1.0;
  const double phi = 2.0 * std::numbers::pi * unit_double(rng);
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {r * std::cos(phi), r * std::sin(phi), z};
}

bool mesh_contains(const MeshDomain &m, const Point3 &p, std::uint64_t seed) {
  const auto &box = m.box;
  if (p.x < box.min.x || p.y < box.min.y || p.z < box.min.z || p.x > box.max.x || p.y > box.max.y ||
      p.z > box.max.z)
    return false;
  const double t_tol = kBaryTol * box.diagonal();
  const auto &s = m.surface;
  std::mt19937_64 rng(seed);
  Point3 dir{1.0, 0.0, 0.0};
  for (int attempt = 0; attempt <= kMaxRayRetries; ++attempt) {
    std::size_t crossings = 0;
    bool ambiguous = false;
    for (const auto &tri : s.triangles) {
      const Point3 &a = s.vertices[tri[0]];
      const Point3 &b = s.vertices[tri[1]];
      const Point3 &c = s.vertices[tri[2]];
      // Cheap reject for the axis-aligned first ray.
      if (attempt == 0) {
        if (std::max({a.y, b.y, c.y}) < p.y - t_tol || std::min({a.y, b.y, c.y}) > p.y + t_tol ||
            std::max({a.z, b.z, c.z}) < p.z - t_tol || std::min({a.z, b.z, c.z}) > p.z + t_tol ||
            std::max({a.x, b.x, c.x}) < p.x - t_tol)
          continue;
      }
      const Hit hit = intersect(p, dir, a, b, c, t_tol);
      if (hit == Hit::Ambiguous) {
        ambiguous = true;
        break;
      }
      if (hit == Hit::Crossing) {
        const Point3 q = closest_point_on_triangle(p, a, b, c);
        if (distance(p, q) <= t_tol) return false; // on the boundary, not strictly inside
        ++crossings;
      }
    }
    if (!ambiguous) return (crossings % 2) == 1;
    dir = random_direction(rng);
  }
  throw Error("inside test: ray casting stayed ambiguous after " + std::to_string(kMaxRayRetries) +
              " retries (pathological geometry near the query point)");
}

BoundaryPoint mesh_closest(const MeshDomain &m, const Point3 &p) {
  const auto &s = m.surface;
  BoundaryPoint best{std::numeric_limits<double>::infinity(), {}};
  double best_sq = std::numeric_limits<double>::infinity();
  for (const auto &tri : s.triangles) {
    const Point3 q = closest_point_on_triangle(p, s.vertices[tri[0]], s.vertices[tri[1]], s.vertices[tri[2]]);
    const double d2 = squared_distance(p, q);
    if (d2 < best_sq) {
      best_sq = d2;
      best.point = q;
    }
  }
  best.distance = std::sqrt(best_sq);
  return best;
}

} // namespace

Domain Domain::ball(Point3 center, double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw Error("ball radius must be positive");
  if (!is_finite(center)) throw Error("ball center must be finite");
  return Domain(Ball{center, radius});
}

Domain Domain::mesh(SurfaceMesh surface) {
  if (surface.triangles.empty()) throw Error("surface mesh has no triangles");
  for (const auto &tri : surface.triangles)
    for (std::uint32_t v : tri)
      if (v >= surface.vertices.size()) throw Error("surface mesh triangle index out of range");
  const Aabb box = surface.bounds();
  return Domain(MeshDomain{std::move(surface), box});
}

Aabb Domain::bounds() const {
  if (is_ball()) {
    const Ball &b = as_ball();
    const Point3 r{b.radius, b.radius, b.radius};
    return {b.center - r, b.center + r};
  }
  return as_mesh().box;
}

bool Domain::contains(const Point3 &p) const {
  if (is_ball()) {
    const Ball &b = as_ball();
    return norm(p - b.center) < b.radius;
  }
  return mesh_contains(as_mesh(), p, seed_);
}

double Domain::distance_to_boundary(const Point3 &p) const {
  if (is_ball()) {
    const Ball &b = as_ball();
    return std::abs(b.radius - norm(p - b.center));
  }
  return mesh_closest(as_mesh(), p).distance;
}

Point3 Domain::project_to_boundary(const Point3 &p) const { return closest_boundary_point(p).point; }

BoundaryPoint Domain::closest_boundary_point(const Point3 &p) const {
  if (is_ball()) {
    const Ball &b = as_ball();
    const Point3 d = p - b.center;
    const double r = norm(d);
    if (r == 0.0) throw Error("projection onto the sphere is undefined at the ball center");
    return {std::abs(b.radius - r), b.center + d * (b.radius / r)};
  }
  return mesh_closest(as_mesh(), p);
}

// Region classification after Ericson, "Real-Time Collision Detection", 5.1.5.
Point3 closest_point_on_triangle(const Point3 &p, const Point3 &a, const Point3 &b, const Point3 &c) {
  const Point3 ab = b - a;
  const Point3 ac = c - a;
  const Point3 ap = p - a;
  const double d1 = dot(ab, ap);
  const double d2 = dot(ac, ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;

  const Point3 bp = p - b;
  const double d3 = dot(ab, bp);
  const double d4 = dot(ac, bp);
  if (d3 >= 0.0 && d4 <= d3) return b;

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + ab * (d1 / (d1 - d3));

  const Point3 cp = p - c;
  const double d5 = dot(ab, cp);
  const double d6 = dot(ac, cp);
  if (d6 >= 0.0 && d5 <= d6) return c;

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + ac * (d2 / (d2 - d6));

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0)
    return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));

  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

} // namespace mfd3d::geometry
