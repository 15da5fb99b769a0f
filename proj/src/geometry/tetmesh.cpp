#include "mfd3d/geometry.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

namespace mfd3d::geometry {
namespace {

bool next_line(std::istream &in, std::string &line, std::size_t &line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
  }
  return false;
}

std::vector<std::string> fields(const std::string &line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  for (std::string f; ss >> f;) out.push_back(f);
  return out;
}

template <class T> T to_number(const std::string &s, std::size_t line_no) {
  T value{};
  const char *first = s.data() + (s.starts_with('+') ? 1 : 0);
  auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ParseError("malformed number '" + s + "'", line_no);
  return value;
}

double triangle_area(const Point3 &a, const Point3 &b, const Point3 &c) { return 0.5 * norm(cross(b - a, c - a)); }

} // namespace

double signed_volume(const Point3 &a, const Point3 &b, const Point3 &c, const Point3 &d) {
  return dot(b - a, cross(c - a, d - a)) / 6.0;
}

TetMesh read_tetmesh(std::istream &in) {
  std::string line;
  std::size_t line_no = 0;
  if (!next_line(in, line, line_no)) throw ParseError("empty tetrahedral mesh file", 1);
  auto head = fields(line);
  if (head.size() != 2) throw ParseError("header must be 'NV NT'", line_no);
  const auto nv = to_number<std::size_t>(head[0], line_no);
  const auto nt = to_number<std::size_t>(head[1], line_no);

  TetMesh mesh;
  mesh.vertices.reserve(nv);
  mesh.boundary.assign(nv, false);
  for (std::size_t i = 0; i < nv; ++i) {
    if (!next_line(in, line, line_no)) throw ParseError("expected " + std::to_string(nv) + " vertex lines", line_no + 1);
    auto f = fields(line);
    if (f.size() != 3 && f.size() != 4) throw ParseError("vertex line must be 'x y z [b]'", line_no);
    mesh.vertices.push_back(
        {to_number<double>(f[0], line_no), to_number<double>(f[1], line_no), to_number<double>(f[2], line_no)});
    if (f.size() == 4) {
      const int b = to_number<int>(f[3], line_no);
      if (b != 0 && b != 1) throw ParseError("boundary flag must be 0 or 1", line_no);
      mesh.boundary[i] = b == 1;
    }
  }
  mesh.tets.reserve(nt);
  for (std::size_t t = 0; t < nt; ++t) {
    if (!next_line(in, line, line_no)) throw ParseError("expected " + std::to_string(nt) + " tetrahedron lines", line_no + 1);
    auto f = fields(line);
    if (f.size() != 4) throw ParseError("tetrahedron line must hold 4 vertex indices", line_no);
    std::array<std::uint32_t, 4> tet{};
    for (int k = 0; k < 4; ++k) {
      tet[k] = to_number<std::uint32_t>(f[k], line_no);
      if (tet[k] >= nv) throw ParseError("vertex index " + f[k] + " out of range", line_no);
    }
    const auto &v = mesh.vertices;
    if (signed_volume(v[tet[0]], v[tet[1]], v[tet[2]], v[tet[3]]) < 0.0) std::swap(tet[2], tet[3]);
    mesh.tets.push_back(tet);
  }
  if (next_line(in, line, line_no)) throw ParseError("trailing data after the declared tetrahedra", line_no);
  return mesh;
}

TetMesh load_tetmesh(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open tetrahedral mesh '" + path.string() + "'");
  try {
    return read_tetmesh(in);
  } catch (const ParseError &e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_tetmesh(std::ostream &out, const TetMesh &mesh) {
  out.precision(17);
  out << mesh.vertices.size() << ' ' << mesh.tets.size() << '\n';
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    const Point3 &p = mesh.vertices[i];
    out << p.x << ' ' << p.y << ' ' << p.z;
    if (i < mesh.boundary.size()) out << ' ' << (mesh.boundary[i] ? 1 : 0);
    out << '\n';
  }
  for (const auto &t : mesh.tets) out << t[0] << ' ' << t[1] << ' ' << t[2] << ' ' << t[3] << '\n';
}

double tet_gamma(const Point3 &a, const Point3 &b, const Point3 &c, const Point3 &d) {
  const std::array<Point3, 4> v{a, b, c, d};
  double diameter = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) diameter = std::max(diameter, distance(v[i], v[j]));
  if (diameter == 0.0) return 0.0;
  const double volume = std::abs(signed_volume(a, b, c, d));
  // Coplanar input in floating point leaves a volume at rounding level.
  if (volume <= 1e-14 * diameter * diameter * diameter) return 0.0;
  const double area = triangle_area(a, b, c) + triangle_area(a, b, d) + triangle_area(a, c, d) + triangle_area(b, c, d);
  const double inradius = 3.0 * volume / area;
  return std::clamp(2.0 * std::sqrt(6.0) * inradius / diameter, 0.0, 1.0);
}

QualityStats mesh_quality_stats(const TetMesh &mesh) {
  if (mesh.tets.empty()) throw Error("mesh quality statistics need at least one tetrahedron");
  QualityStats stats;
  stats.count = mesh.tets.size();
  stats.min_gamma = std::numeric_limits<double>::infinity();
  std::array<std::size_t, 4> counts{};
  double sum = 0.0;
  for (const auto &t : mesh.tets) {
    const double g = tet_gamma(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]], mesh.vertices[t[3]]);
    stats.min_gamma = std::min(stats.min_gamma, g);
    sum += g;
    const std::size_t bin = g <= 0.25 ? 0 : g <= 0.5 ? 1 : g <= 0.75 ? 2 : 3;
    ++counts[bin];
  }
  stats.mean_gamma = sum / static_cast<double>(stats.count);
  for (int b = 0; b < 4; ++b) stats.bins[b] = static_cast<double>(counts[b]) / static_cast<double>(stats.count);
  return stats;
}

} // namespace mfd3d::geometry
