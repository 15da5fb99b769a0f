#include "mfd3d/selection.hpp"
#include "mfd3d/dense.hpp"
#include "mfd3d/weights.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <unordered_set>

namespace mfd3d::selection {

void SelectionParams::validate() const {
  if (!(delta > 0.0 && delta < 1.0)) throw Error("oct-dist: delta must lie in (0, 1)");
  if (s < 1 || s > 3) throw Error("oct-dist: s must be 1, 2 or 3");
  if (n < s || n % s != 0) throw Error("oct-dist: n must be a positive multiple of s");
  if (k < 2) throw Error("oct-dist: k must be at least 2");
  if (m <= k) throw Error("oct-dist: m must exceed k");
}

int classify_cone(const Point3 &v, int s) {
  if (v.x == 0.0 && v.y == 0.0 && v.z == 0.0) throw Error("cannot classify the zero vector");
  const int octant = 1 + (v.x < 0.0 ? 1 : 0) + (v.y < 0.0 ? 2 : 0) + (v.z < 0.0 ? 4 : 0);
  const double ax = std::abs(v.x), ay = std::abs(v.y), az = std::abs(v.z);
  switch (s) {
  case 1:
    return octant;
  case 2:
    return 2 * (octant - 1) + (ax >= ay ? 1 : 2);
  case 3: {
    int arg = 1;
    double best = ax;
    if (ay > best) {
      arg = 2;
      best = ay;
    }
    if (az > best) arg = 3;
    return 3 * (octant - 1) + arg;
  }
  default:
    throw Error("cone subdivision must be 1, 2 or 3");
  }
}

InfluenceSet select_oct_dist(std::size_t center, const spatial::SpatialIndex &index, const SelectionParams &params,
                             OctDistTrace *trace) {
  params.validate();
  if (center >= index.size()) throw Error("oct-dist: center index out of range");
  const Point3 zeta = index.point(center);
  const auto cloud = index.k_nearest(zeta, params.m - 1, true);
  if (cloud.size() < 6)
    throw Error("oct-dist: node " + std::to_string(center) + " has fewer than 6 neighbors");

  double rho = 0.0;
  for (std::size_t i = 0; i < 6; ++i) rho += cloud[i].distance;
  rho *= params.delta / 6.0;

  // Stage I: at most nu nearest per cone, regrouped per octant. The cloud is
  // sorted by distance, so insertion order keeps every list sorted.
  const int cones = 8 * params.s;
  const std::size_t nu = static_cast<std::size_t>(params.n / params.s);
  std::vector<std::size_t> per_cone(static_cast<std::size_t>(cones), 0);
  std::array<std::vector<std::size_t>, 8> octants; // positions in `cloud`
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const int cone = classify_cone(index.point(cloud[i].index) - zeta, params.s);
    auto &count = per_cone[static_cast<std::size_t>(cone - 1)];
    if (count == nu) continue;
    ++count;
    octants[static_cast<std::size_t>(octant_of_cone(cone, params.s) - 1)].push_back(i);
    candidates.push_back(i);
  }

  InfluenceSet out{center, {center}};
  if (trace) {
    *trace = {};
    trace->rho0 = rho;
    for (std::size_t i : candidates) trace->candidates.push_back(cloud[i].index);
  }
  const std::size_t target = params.k - 1;
  if (candidates.size() <= target) {
    for (std::size_t i : candidates) out.members.push_back(cloud[i].index);
    if (trace) trace->early_stop = true;
    return out;
  }

  // Stage II.
  std::vector<bool> taken(cloud.size(), false);
  std::vector<std::size_t> seeds;
  for (const auto &list : octants)
    if (!list.empty()) seeds.push_back(list.front());
  if (seeds.size() > target) {
    // Only reachable for k < 9: keep the closest seeds.
    std::vector<std::size_t> by_distance = seeds;
    std::sort(by_distance.begin(), by_distance.end());
    by_distance.resize(target);
    std::erase_if(seeds, [&](std::size_t s) {
      return std::find(by_distance.begin(), by_distance.end(), s) == by_distance.end();
    });
  }
  std::vector<Point3> selected;
  for (std::size_t i : seeds) {
    taken[i] = true;
    out.members.push_back(cloud[i].index);
    selected.push_back(index.point(cloud[i].index));
    if (trace) trace->seeds.push_back(cloud[i].index);
  }

  std::sort(candidates.begin(), candidates.end());
  for (int sweep = 1; selected.size() < target; ++sweep) {
    bool remaining = false;
    for (std::size_t i : candidates) {
      if (taken[i]) continue;
      remaining = true;
      const Point3 &p = index.point(cloud[i].index);
      double sep = std::numeric_limits<double>::infinity();
      for (const Point3 &q : selected) sep = std::min(sep, distance(p, q));
      if (sep < rho) continue;
      taken[i] = true;
      selected.push_back(p);
      out.members.push_back(cloud[i].index);
      if (trace) trace->admissions.push_back({cloud[i].index, sweep, rho, sep});
      if (selected.size() == target) break;
    }
    if (!remaining) break;
    rho *= params.delta;
  }
  return out;
}

InfluenceSet select_oct(std::size_t center, const spatial::SpatialIndex &index, std::size_t cloud_size) {
  if (center >= index.size()) throw Error("oct: center index out of range");
  const Point3 zeta = index.point(center);
  const auto cloud = index.k_nearest(zeta, cloud_size, true);
  std::array<bool, 16> filled{};
  InfluenceSet out{center, {center}};
  for (const auto &nb : cloud) {
    const int cone = classify_cone(index.point(nb.index) - zeta, 2);
    if (filled[static_cast<std::size_t>(cone - 1)]) continue;
    filled[static_cast<std::size_t>(cone - 1)] = true;
    out.members.push_back(nb.index);
  }
  return out;
}

InfluenceSet select_knear(std::size_t center, const spatial::SpatialIndex &index, std::size_t k) {
  if (center >= index.size()) throw Error("knear: center index out of range");
  InfluenceSet out{center, {center}};
  if (k <= 1) return out;
  for (const auto &nb : index.k_nearest(index.point(center), k - 1, true)) out.members.push_back(nb.index);
  return out;
}

std::vector<std::vector<std::size_t>> tet_adjacency(const geometry::TetMesh &mesh) {
  std::vector<std::vector<std::size_t>> adj(mesh.vertices.size());
  for (const auto &t : mesh.tets)
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        if (a != b) adj[t[static_cast<std::size_t>(a)]].push_back(t[static_cast<std::size_t>(b)]);
  for (auto &list : adj) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  return adj;
}

TetNeighborhood::TetNeighborhood(const geometry::TetMesh &mesh, const spatial::SpatialIndex &index, double tolerance)
    : node_of_vertex_(mesh.vertices.size()), vertex_of_node_(index.size(), std::numeric_limits<std::size_t>::max()),
      adjacency_(tet_adjacency(mesh)) {
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    const auto nb = index.k_nearest(mesh.vertices[v], 1);
    if (nb.empty() || nb.front().distance > tolerance)
      throw Error("tet: mesh vertex " + std::to_string(v) + " matches no node");
    const std::size_t node = nb.front().index;
    if (vertex_of_node_[node] != std::numeric_limits<std::size_t>::max())
      throw Error("tet: mesh vertices " + std::to_string(vertex_of_node_[node]) + " and " + std::to_string(v) +
                  " match the same node");
    node_of_vertex_[v] = node;
    vertex_of_node_[node] = v;
  }
}

std::optional<std::size_t> TetNeighborhood::vertex_of(std::size_t node) const {
  if (node >= vertex_of_node_.size() || vertex_of_node_[node] == std::numeric_limits<std::size_t>::max())
    return std::nullopt;
  return vertex_of_node_[node];
}

InfluenceSet select_tet(std::size_t center, const TetNeighborhood &mesh) {
  const auto vertex = mesh.vertex_of(center);
  if (!vertex) throw Error("tet: node " + std::to_string(center) + " is not a mesh vertex");
  InfluenceSet out{center, {center}};
  for (std::size_t v : mesh.adjacent(*vertex)) out.members.push_back(mesh.node_of(v));
  return out;
}

std::optional<InfluenceSet> select_grid_7star(std::size_t center, const spatial::SpatialIndex &index, double h) {
  if (!(h > 0.0)) throw Error("7-point star spacing must be positive");
  static constexpr std::array<Point3, 6> kOffsets{{{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}}};
  InfluenceSet out{center, {center}};
  const Point3 zeta = index.point(center);
  for (const Point3 &dir : kOffsets) {
    const auto nb = index.lattice_neighbor(zeta, dir * h, h);
    if (!nb || !index.is_interior(*nb)) return std::nullopt;
    out.members.push_back(*nb);
  }
  return out;
}

// The center contributes only to the constant row, so it is taken as the
// first pivot and the QR runs on the non-constant monomials alone.
PqrResult select_pqr(std::size_t center, const spatial::SpatialIndex &index, int order, std::size_t cloud_size) {
  if (order != 3 && order != 4) throw Error("pQR order must be 3 or 4");
  if (center >= index.size()) throw Error("pQR: center index out of range");
  PqrResult out;
  out.set = {center, {center}};
  const Point3 zeta = index.point(center);
  const auto cloud = index.k_nearest(zeta, cloud_size, true);
  const weights::PolyBasis basis(order);
  const std::size_t L = basis.size();
  if (cloud.size() + 1 < L) {
    out.failure = "pQR: fewer candidates than polynomials";
    return out;
  }
  double scale = 0.0;
  const std::size_t near = std::min<std::size_t>(6, cloud.size());
  for (std::size_t i = 0; i < near; ++i) scale += cloud[i].distance;
  scale /= static_cast<double>(near);

  // Pivoting on raw columns favours the farthest nodes; weighting column j by (r_loc/d_j)^order
  // turns the pivot choice toward nearby nodes.
  std::vector<double> colw(cloud.size());
  for (std::size_t j = 0; j < cloud.size(); ++j) colw[j] = std::pow(scale / cloud[j].distance, order);

  const std::size_t rows = L - 1;
  dense::Matrix P(rows, cloud.size());
  std::vector<double> values(L);
  for (std::size_t j = 0; j < cloud.size(); ++j) {
    basis.eval_into((index.point(cloud[j].index) - zeta) * (1.0 / scale), values);
    for (std::size_t i = 0; i < rows; ++i) P(i, j) = values[i + 1] * colw[j];
  }
  std::vector<double> lap(L);
  basis.laplacian_into({0, 0, 0}, lap);
  const std::vector<double> b(lap.begin() + 1, lap.end());

  const dense::PivotedQr qr(P);
  const std::size_t r = qr.rank(1e-10);
  if (r == 0) {
    out.failure = "pQR: collocation matrix is zero";
    return out;
  }
  std::vector<double> qtb = b;
  qr.apply_qt(qtb);
  std::vector<double> w(r);
  for (std::size_t i = r; i-- > 0;) {
    double s = qtb[i];
    for (std::size_t j = i + 1; j < r; ++j) s -= qr.r(i, j) * w[j];
    w[i] = s / qr.r(i, i);
  }

  double res2 = 0.0, b2 = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < r; ++j) s += P(i, qr.pivot(j)) * w[j];
    res2 += (s - b[i]) * (s - b[i]);
    b2 += b[i] * b[i];
  }
  if (!(std::sqrt(res2) <= 1e-9 * std::sqrt(b2))) {
    out.failure = "pQR: polynomial exactness is not attainable on the candidates";
    return out;
  }

  const double inv_s2 = 1.0 / (scale * scale);
  out.weights.assign(1, 0.0);
  double sum = 0.0;
  for (std::size_t j = 0; j < r; ++j) {
    out.set.members.push_back(cloud[qr.pivot(j)].index);
    out.weights.push_back(w[j] * colw[qr.pivot(j)] * inv_s2);
    sum += w[j] * colw[qr.pivot(j)] * inv_s2;
  }
  out.weights[0] = -sum;
  return out;
}

void check_influence_set(const InfluenceSet &set, std::size_t node_count, std::size_t max_size) {
  const std::string who = "stencil of node " + std::to_string(set.center);
  if (set.members.empty() || set.members.front() != set.center) throw Error(who + " does not start with its center");
  if (set.members.size() > max_size)
    throw Error(who + " has " + std::to_string(set.members.size()) + " members, more than " +
                std::to_string(max_size));
  std::unordered_set<std::size_t> seen;
  for (std::size_t m : set.members) {
    if (m >= node_count) throw Error(who + " references unknown node " + std::to_string(m));
    if (!seen.insert(m).second) throw Error(who + " repeats node " + std::to_string(m));
  }
}

} // namespace mfd3d::selection
