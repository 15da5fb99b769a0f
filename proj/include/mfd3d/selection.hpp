#pragma once

#include "mfd3d/common.hpp"
#include "mfd3d/geometry.hpp"
#include "mfd3d/spatial.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mfd3d::selection {

struct SelectionParams {
  std::size_t m = 100;
  std::size_t k = 17;
  int s = 1;
  int n = 3;
  double delta = 0.9;

  /// Throws Error unless 0 < delta < 1, s in {1,2,3}, n a positive multiple of s, k >= 2, m > k.
  void validate() const;
};

/// Global node indices of a stencil; members.front() == center.
struct InfluenceSet {
  std::size_t center = 0;
  std::vector<std::size_t> members;

  std::size_t size() const { return members.size(); }
};

/// Cone index in 1..8s. Octant o = 1 + [x<0] + 2[y<0] + 4[z<0]; s = 2 halves
/// each octant by |x| >= |y|, s = 3 splits by the dominant coordinate.
int classify_cone(const Point3 &v, int s);

inline int octant_of_cone(int cone, int s) { return (cone - 1) / s + 1; }

/// Step-by-step record of oct-dist, for inspection and tests.
struct OctDistTrace {
  struct Admission {
    std::size_t index;
    int sweep;
    double rho;
    /// Distance to the members selected before this one.
    double separation;
  };

  double rho0 = 0.0;
  std::vector<std::size_t> candidates;
  std::vector<std::size_t> seeds;
  std::vector<Admission> admissions;
  bool early_stop = false;
};

/// Octant-based selection with distance control (two stages: per-cone
/// candidates, then separation-controlled greedy sweeps with a shrinking radius).
InfluenceSet select_oct_dist(std::size_t center, const spatial::SpatialIndex &index, const SelectionParams &params,
                             OctDistTrace *trace = nullptr);

/// Closest node in each half-octant among the 100 nearest, plus the center.
InfluenceSet select_oct(std::size_t center, const spatial::SpatialIndex &index, std::size_t cloud = 100);

/// Center plus its k - 1 nearest nodes.
InfluenceSet select_knear(std::size_t center, const spatial::SpatialIndex &index, std::size_t k);

/// Edge adjacency of a tetrahedral mesh, mapped onto global node indices.
class TetNeighborhood {
public:
  /// Each mesh vertex is matched to the node within `tolerance` of it; throws
  /// when a vertex has no such node.
  TetNeighborhood(const geometry::TetMesh &mesh, const spatial::SpatialIndex &index, double tolerance);

  /// Mesh vertex of a global node, if any.
  std::optional<std::size_t> vertex_of(std::size_t node) const;
  std::size_t node_of(std::size_t vertex) const { return node_of_vertex_[vertex]; }
  const std::vector<std::size_t> &adjacent(std::size_t vertex) const { return adjacency_[vertex]; }

private:
  std::vector<std::size_t> node_of_vertex_;
  std::vector<std::size_t> vertex_of_node_;
  std::vector<std::vector<std::size_t>> adjacency_;
};

/// Vertex adjacency lists (sorted, deduplicated) of a tet mesh.
std::vector<std::vector<std::size_t>> tet_adjacency(const geometry::TetMesh &mesh);

/// Center plus all nodes sharing a tetrahedron edge with it.
InfluenceSet select_tet(std::size_t center, const TetNeighborhood &mesh);

/// The 7-point star {c, c +- h e_x, c +- h e_y, c +- h e_z} when all six
/// neighbors are interior nodes.
std::optional<InfluenceSet> select_grid_7star(std::size_t center, const spatial::SpatialIndex &index, double h);

struct PqrResult {
  InfluenceSet set;
  std::vector<double> weights;
  std::string failure;

  bool ok() const { return failure.empty(); }
};

/// Nodes chosen as pivot columns of a column-pivoted QR of the polynomial
/// collocation matrix over the `cloud` nearest neighbors, with weights exact
/// for the Laplacian of polynomials of degree < order. The center is always a
/// member and carries minus the sum of the other weights.
PqrResult select_pqr(std::size_t center, const spatial::SpatialIndex &index, int order, std::size_t cloud = 100);

/// Throws Error when the set has no members, does not start with its center,
/// has duplicates, exceeds max_size or references unknown nodes.
void check_influence_set(const InfluenceSet &set, std::size_t node_count, std::size_t max_size);

} // namespace mfd3d::selection
