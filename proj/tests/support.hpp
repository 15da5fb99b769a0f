#pragma once

// Helpers shared by the unit tests: random clouds, lattices and brute-force oracles.

#include "mfd3d/common.hpp"
#include "mfd3d/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace testing_support {

using mfd3d::Point3;

inline std::vector<Point3> random_points(std::size_t n, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<Point3> pts(n);
  for (auto &p : pts) p = {u(rng), u(rng), u(rng)};
  return pts;
}

/// Random points strictly inside the unit ball.
inline std::vector<Point3> random_ball_points(std::size_t n, std::uint64_t seed, double radius = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-radius, radius);
  std::vector<Point3> pts;
  while (pts.size() < n) {
    Point3 p{u(rng), u(rng), u(rng)};
    if (mfd3d::norm(p) < radius) pts.push_back(p);
  }
  return pts;
}

/// (2r+1)^3 lattice with spacing h centred at the origin; the origin comes first.
inline std::vector<Point3> cubic_lattice(int r, double h = 1.0) {
  std::vector<Point3> pts{{0, 0, 0}};
  for (int i = -r; i <= r; ++i)
    for (int j = -r; j <= r; ++j)
      for (int k = -r; k <= r; ++k)
        if (i || j || k) pts.push_back({i * h, j * h, k * h});
  return pts;
}

struct Ranked {
  std::size_t index;
  double distance;
};

/// All points sorted by distance to q, ties by index.
inline std::vector<Ranked> brute_force_sorted(const std::vector<Point3> &pts, const Point3 &q) {
  std::vector<Ranked> out;
  for (std::size_t i = 0; i < pts.size(); ++i) out.push_back({i, mfd3d::distance(pts[i], q)});
  std::sort(out.begin(), out.end(), [](const Ranked &a, const Ranked &b) {
    return a.distance != b.distance ? a.distance < b.distance : a.index < b.index;
  });
  return out;
}

/// Unit cube [0,1]^3 as 12 outward triangles.
inline mfd3d::geometry::SurfaceMesh unit_cube_mesh() {
  mfd3d::geometry::SurfaceMesh m;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int z = 0; z < 2; ++z) m.vertices.push_back({double(x), double(y), double(z)});
  const auto id = [](int x, int y, int z) { return std::uint32_t(x * 4 + y * 2 + z); };
  const std::uint32_t quads[6][4] = {
      {id(0, 0, 0), id(0, 0, 1), id(0, 1, 1), id(0, 1, 0)}, {id(1, 0, 0), id(1, 1, 0), id(1, 1, 1), id(1, 0, 1)},
      {id(0, 0, 0), id(1, 0, 0), id(1, 0, 1), id(0, 0, 1)}, {id(0, 1, 0), id(0, 1, 1), id(1, 1, 1), id(1, 1, 0)},
      {id(0, 0, 0), id(0, 1, 0), id(1, 1, 0), id(1, 0, 0)}, {id(0, 0, 1), id(1, 0, 1), id(1, 1, 1), id(0, 1, 1)}};
  for (const auto &q : quads) {
    m.triangles.push_back({q[0], q[1], q[2]});
    m.triangles.push_back({q[0], q[2], q[3]});
  }
  for (const auto &t : m.triangles) {
    const Point3 n = mfd3d::cross(m.vertices[t[1]] - m.vertices[t[0]], m.vertices[t[2]] - m.vertices[t[0]]);
    m.normals.push_back(n * (1.0 / mfd3d::norm(n)));
  }
  return m;
}

/// Fresh directory under the build tree's temp area.
inline std::filesystem::path scratch_dir(const std::string &name) {
  const auto dir = std::filesystem::temp_directory_path() / ("mfd3d_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

} // namespace testing_support
