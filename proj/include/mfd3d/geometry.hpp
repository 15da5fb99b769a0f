#pragma once

#include "mfd3d/common.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace mfd3d::geometry {

struct Aabb {
  Point3 min;
  Point3 max;

  Point3 extent() const { return max - min; }
  double diagonal() const { return norm(extent()); }
  double volume() const {
    const Point3 e = extent();
    return e.x * e.y * e.z;
  }
};

/// Triangle surface. Normals are unit vectors recomputed from the vertices.
struct SurfaceMesh {
  std::vector<Point3> vertices;
  std::vector<std::array<std::uint32_t, 3>> triangles;
  std::vector<Point3> normals;
  /// Triangles discarded at parse time because their area was negligible.
  std::size_t dropped_degenerate = 0;

  Aabb bounds() const;
};

/// Parses binary or ASCII STL. Binary is detected when 84 + 50 * count equals
/// the byte length; otherwise a leading `solid` selects the ASCII grammar.
SurfaceMesh parse_stl(std::span<const std::byte> bytes);
SurfaceMesh read_stl(const std::filesystem::path &path);
std::vector<std::byte> write_stl_binary(const SurfaceMesh &mesh);

struct Ball {
  Point3 center;
  double radius = 1.0;
};

struct MeshDomain {
  SurfaceMesh surface;
  Aabb box;
};

/// Result of a nearest-boundary query.
struct BoundaryPoint {
  double distance = 0.0;
  Point3 point;
};

/// Either an analytic ball or the interior of a watertight triangle surface.
class Domain {
public:
  static Domain ball(Point3 center, double radius);
  static Domain mesh(SurfaceMesh surface);

  bool is_ball() const { return std::holds_alternative<Ball>(shape_); }
  const Ball &as_ball() const { return std::get<Ball>(shape_); }
  const MeshDomain &as_mesh() const { return std::get<MeshDomain>(shape_); }
  Aabb bounds() const;

  /// Seed of the pseudo-random ray directions used by `contains` on meshes.
  void set_seed(std::uint64_t seed) { seed_ = seed; }
  std::uint64_t seed() const { return seed_; }

  bool contains(const Point3 &p) const;
  double distance_to_boundary(const Point3 &p) const;
  Point3 project_to_boundary(const Point3 &p) const;
  BoundaryPoint closest_boundary_point(const Point3 &p) const;

private:
  explicit Domain(std::variant<Ball, MeshDomain> shape) : shape_(std::move(shape)) {}

  std::variant<Ball, MeshDomain> shape_;
  std::uint64_t seed_ = 0x9e3779b97f4a7c15ULL;
};

/// Exact closest point on triangle (a, b, c) to p.
Point3 closest_point_on_triangle(const Point3 &p, const Point3 &a, const Point3 &b,
                                 const Point3 &c);

/// Interior nodes followed by boundary nodes.
struct NodeSet {
  std::vector<Point3> interior;
  std::vector<Point3> boundary;

  std::size_t size() const { return interior.size() + boundary.size(); }
  const Point3 &operator[](std::size_t global) const {
    return global < interior.size() ? interior[global] : boundary[global - interior.size()];
  }
  bool is_interior(std::size_t global) const { return global < interior.size(); }
};

/// Lattice bbox.min + h/2 + h*(i,j,k), keeping points inside with clearance >= h/4.
std::vector<Point3> generate_grid_nodes(const Domain &domain, double h);

/// Radical inverse of `index` in `base`.
double radical_inverse(std::uint64_t index, unsigned base);

/// Point `index` (1-based) of the Halton sequence with bases 2, 3, 5 in [0,1)^3.
Point3 halton_point(std::uint64_t index);

/// Target number of Halton nodes for average spacing h: round(V / h^3), with V
/// estimated from the first 10000 Halton points.
std::size_t halton_target_count(const Domain &domain, double h);

std::vector<Point3> generate_halton_nodes(const Domain &domain, double h);

/// Generates Halton nodes until `target` are accepted.
std::vector<Point3> generate_halton_nodes(const Domain &domain, double h, std::size_t target);

/// Projections of interior nodes closer than h to the boundary, merged when
/// closer than 1e-6 h.
std::vector<Point3> project_boundary_nodes(const Domain &domain, std::span<const Point3> interior,
                                           double h);

void write_nodes(std::ostream &out, const NodeSet &nodes);
NodeSet read_nodes(std::istream &in);
void save_nodes(const std::filesystem::path &path, const NodeSet &nodes);
NodeSet load_nodes(const std::filesystem::path &path);

struct TetMesh {
  std::vector<Point3> vertices;
  std::vector<std::array<std::uint32_t, 4>> tets;
  std::vector<bool> boundary;
};

/// Signed volume of (a, b, c, d); positive for right-handed orientation.
double signed_volume(const Point3 &a, const Point3 &b, const Point3 &c, const Point3 &d);

/// Reads `NV NT`, NV vertex lines `x y z [b]`, NT lines of 4 zero-based indices.
/// Negatively oriented tetrahedra are flipped.
TetMesh read_tetmesh(std::istream &in);
TetMesh load_tetmesh(const std::filesystem::path &path);
void write_tetmesh(std::ostream &out, const TetMesh &mesh);

/// Inverse aspect ratio 2*sqrt(6)*inradius/diameter, in [0,1].
double tet_gamma(const Point3 &a, const Point3 &b, const Point3 &c, const Point3 &d);

struct QualityStats {
  double min_gamma = 0.0;
  double mean_gamma = 0.0;
  /// Fractions in (0,.25], (.25,.5], (.5,.75], (.75,1]; gamma = 0 counts in the first.
  std::array<double, 4> bins{};
  std::size_t count = 0;
};

QualityStats mesh_quality_stats(const TetMesh &mesh);

} // namespace mfd3d::geometry
