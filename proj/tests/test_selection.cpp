#include "mfd3d/selection.hpp"
#include "mfd3d/weights.hpp"
#include "support.hpp"

#include <doctest.h>

#include <map>
#include <set>

using namespace mfd3d;
using namespace mfd3d::selection;
using namespace testing_support;

namespace {

int octant_oracle(const Point3 &v) {
  const bool px = !(v.x < 0), py = !(v.y < 0), pz = !(v.z < 0);
  static const std::map<std::array<bool, 3>, int> table = {
      {{true, true, true}, 1},   {{false, true, true}, 2},   {{true, false, true}, 3},   {{false, false, true}, 4},
      {{true, true, false}, 5},  {{false, true, false}, 6},  {{true, false, false}, 7},  {{false, false, false}, 8}};
  return table.at({px, py, pz});
}

int cone_oracle(const Point3 &v, int s) {
  const int o = octant_oracle(v);
  if (s == 1) return o;
  const double a[3] = {std::abs(v.x), std::abs(v.y), std::abs(v.z)};
  if (s == 2) return 2 * (o - 1) + (a[0] >= a[1] ? 1 : 2);
  int arg = 0;
  for (int i = 1; i < 3; ++i)
    if (a[i] > a[arg]) arg = i;
  return 3 * (o - 1) + arg + 1;
}

// Straight transcription of the two-stage oct-dist algorithm on a brute-force sorted cloud.
std::vector<std::size_t> oct_dist_oracle(const std::vector<Point3> &pts, std::size_t c, const SelectionParams &p) {
  const Point3 z = pts[c];
  std::vector<Ranked> cloud;
  for (const auto &r : brute_force_sorted(pts, z))
    if (r.index != c && cloud.size() < p.m - 1) cloud.push_back(r);
  double rho = 0.0;
  for (int i = 0; i < 6; ++i) rho += cloud[std::size_t(i)].distance;
  rho *= p.delta / 6.0;

  const std::size_t nu = std::size_t(p.n / p.s);
  std::map<int, std::size_t> per_cone;
  std::vector<Ranked> cand;
  std::map<int, std::vector<Ranked>> by_octant;
  for (const auto &r : cloud) {
    const Point3 v = pts[r.index] - z;
    if (per_cone[cone_oracle(v, p.s)]++ >= nu) continue;
    cand.push_back(r);
    by_octant[octant_oracle(v)].push_back(r);
  }
  std::vector<std::size_t> out{c};
  if (cand.size() <= p.k - 1) {
    for (const auto &r : cand) out.push_back(r.index);
    return out;
  }
  std::vector<std::size_t> chosen;
  for (const auto &[oct, list] : by_octant) chosen.push_back(list.front().index);
  std::set<std::size_t> in(chosen.begin(), chosen.end());
  while (chosen.size() < p.k - 1) {
    bool any = false;
    for (const auto &r : cand) {
      if (in.count(r.index) || chosen.size() == p.k - 1) continue;
      any = true;
      double sep = 1e300;
      for (std::size_t q : chosen) sep = std::min(sep, distance(pts[r.index], pts[q]));
      if (sep >= rho) {
        chosen.push_back(r.index);
        in.insert(r.index);
      }
    }
    if (!any) break;
    rho *= p.delta;
  }
  out.insert(out.end(), chosen.begin(), chosen.end());
  return out;
}

std::set<int> octants_of(const std::vector<Point3> &pts, const InfluenceSet &set, std::size_t first, std::size_t last) {
  std::set<int> out;
  for (std::size_t i = first; i < last; ++i) out.insert(octant_oracle(pts[set.members[i]] - pts[set.center]));
  return out;
}

} // namespace

TEST_SUITE("cones") {
  TEST_CASE("sign pattern") {
    CHECK(classify_cone({1, 1, 1}, 1) == 1);
    CHECK(classify_cone({-1, 1, 1}, 1) == 2);
    CHECK(classify_cone({1, -1, 1}, 1) == 3);
    CHECK(classify_cone({-1, -1, -1}, 1) == 8);
    CHECK(classify_cone({0, 0, 1}, 1) == 1);
    CHECK(classify_cone({0, -0.0, -1}, 1) == 5);
  }

  TEST_CASE("dominant coordinate picks the third") {
    CHECK(classify_cone({1, 2, 3}, 3) == 3);
    CHECK(classify_cone({-3, 2, 1}, 3) == 4);
    CHECK(classify_cone({1, 1, 1}, 3) == 1);
    CHECK(classify_cone({0, 1, 1}, 3) == 2);
    CHECK(classify_cone({2, 1, 0}, 2) == 1);
    CHECK(classify_cone({1, 2, 0}, 2) == 2);
    CHECK(octant_of_cone(classify_cone({-1, 2, 3}, 3), 3) == 2);
  }

  TEST_CASE("zero vector") { CHECK_THROWS_AS(classify_cone({0, 0, 0}, 1), Error); }

  TEST_CASE("cones partition directions") {
    const std::size_t n = 1000000;
    std::mt19937_64 rng(123);
    std::normal_distribution<double> g;
    for (int s : {1, 2, 3}) {
      std::vector<std::size_t> count(std::size_t(8 * s), 0);
      for (std::size_t i = 0; i < n; ++i) {
        const Point3 v{g(rng), g(rng), g(rng)};
        const int c = classify_cone(v, s);
        REQUIRE(c >= 1);
        REQUIRE(c <= 8 * s);
        REQUIRE(c == cone_oracle(v, s));
        ++count[std::size_t(c - 1)];
      }
      std::size_t total = 0;
      for (std::size_t c : count) total += c;
      CHECK(total == n);
      if (s == 1)
        for (std::size_t c : count) CHECK(std::abs(double(c) / double(n) - 0.125) <= 0.02 * 0.125);
      // By symmetry every sub-cone holds the same share.
      for (std::size_t c : count) CHECK(std::abs(double(c) / double(n) - 1.0 / (8.0 * s)) <= 0.02 / (8.0 * s));
    }
  }
}

TEST_SUITE("oct-dist") {
  TEST_CASE("parameter validation") {
    SelectionParams p;
    CHECK_NOTHROW(p.validate());
    p.delta = 1.0;
    CHECK_THROWS_AS(p.validate(), Error);
    p = {};
    p.s = 2;
    p.n = 3;
    CHECK_THROWS_AS(p.validate(), Error);
    p = {};
    p.m = p.k;
    CHECK_THROWS_AS(p.validate(), Error);
    p = {};
    p.k = 1;
    CHECK_THROWS_AS(p.validate(), Error);
  }

  TEST_CASE("lattice origin, k = 17") {
    const auto pts = cubic_lattice(3);
    const spatial::SpatialIndex index(pts, pts.size());
    SelectionParams p;
    p.k = 17;
    OctDistTrace trace;
    const auto set = select_oct_dist(0, index, p, &trace);
    CHECK(set.size() == 17);
    CHECK(set.members.front() == 0);
    CHECK(octants_of(pts, set, 1, 9).size() == 8);
    CHECK(trace.rho0 == doctest::Approx(0.9));
    CHECK(set.members == oct_dist_oracle(pts, 0, p));
  }

  TEST_CASE("early stop returns every candidate") {
    // Three nodes in each of five octants: 15 candidates = k - 2 for k = 17.
    std::vector<Point3> pts{{0, 0, 0}};
    const Point3 dirs[5] = {{1, 1, 1}, {-1, 1, 1}, {1, -1, 1}, {1, 1, -1}, {-1, -1, -1}};
    for (const auto &d : dirs)
      for (double r : {1.0, 1.3, 1.7}) pts.push_back(d * r + Point3{0.01 * r, 0.02, 0.0} * (d.x > 0 ? 1 : -1));
    const spatial::SpatialIndex index(pts, pts.size());
    SelectionParams p;
    p.k = 17;
    OctDistTrace trace;
    const auto set = select_oct_dist(0, index, p, &trace);
    CHECK(trace.early_stop);
    CHECK(trace.candidates.size() == 15);
    CHECK(set.size() == 16);
    std::set<std::size_t> got(set.members.begin(), set.members.end());
    CHECK(got.size() == 16);
  }

  TEST_CASE("fewer than six neighbors") {
    std::vector<Point3> pts{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {-1, 0, 0}, {0, -1, 0}};
    const spatial::SpatialIndex index(pts, pts.size());
    CHECK_THROWS_AS(select_oct_dist(0, index, SelectionParams{}), Error);
  }

  TEST_CASE("matches the oracle on random clouds") {
    geometry::NodeSet nodes;
    nodes.interior = random_ball_points(3000, 31);
    const spatial::SpatialIndex index(nodes);
    for (int s : {1, 2, 3})
      for (double delta : {0.9, 0.7}) {
        SelectionParams p;
        p.s = s;
        p.n = s == 2 ? 4 : (s == 3 ? 6 : 3);
        p.delta = delta;
        p.k = s == 3 ? 17 : 13;
        for (std::size_t c = 0; c < 3000; c += 211) CHECK(select_oct_dist(c, index, p).members == oct_dist_oracle(nodes.interior, c, p));
      }
  }

  TEST_CASE("sweep, separation and seed properties") {
    geometry::NodeSet nodes;
    nodes.interior = random_ball_points(2500, 41);
    for (std::uint64_t i = 1; nodes.interior.size() < 4000; ++i) {
      const Point3 p = geometry::halton_point(i) * 2.0 - Point3{1, 1, 1};
      if (norm(p) < 1.0) nodes.interior.push_back(p);
    }
    const spatial::SpatialIndex index(nodes);
    SelectionParams p;
    p.k = 17;
    for (std::size_t c = 0; c < nodes.interior.size(); c += 37) {
      OctDistTrace trace;
      const auto set = select_oct_dist(c, index, p, &trace);
      check_influence_set(set, index.size(), p.k);
      const Point3 z = index.point(c);
      // Size rule.
      CHECK(set.size() == std::min(p.k, trace.candidates.size() + 1));
      if (trace.early_stop) continue;
      // Seeds come first, one per nonempty octant.
      REQUIRE(set.members.size() >= 1 + trace.seeds.size());
      for (std::size_t i = 0; i < trace.seeds.size(); ++i) CHECK(set.members[1 + i] == trace.seeds[i]);
      CHECK(octants_of(nodes.interior, set, 1, 1 + trace.seeds.size()).size() == trace.seeds.size());
      // Separation at admission and monotone distance within one sweep.
      std::vector<std::size_t> chosen(trace.seeds);
      for (std::size_t a = 0; a < trace.admissions.size(); ++a) {
        const auto &adm = trace.admissions[a];
        double sep = 1e300;
        for (std::size_t q : chosen) sep = std::min(sep, distance(index.point(adm.index), index.point(q)));
        CHECK(sep >= adm.rho);
        CHECK(sep == adm.separation);
        if (a > 0 && trace.admissions[a - 1].sweep == adm.sweep)
          CHECK(distance(index.point(trace.admissions[a - 1].index), z) <= distance(index.point(adm.index), z));
        chosen.push_back(adm.index);
      }
    }
  }
}

TEST_SUITE("oct") {
  TEST_CASE("lattice") {
    const auto pts = cubic_lattice(3);
    const spatial::SpatialIndex index(pts, pts.size());
    const auto set = select_oct(0, index);
    check_influence_set(set, pts.size(), 17);
    std::set<int> cones;
    for (std::size_t i = 1; i < set.size(); ++i) cones.insert(classify_cone(pts[set.members[i]], 2));
    CHECK(cones.size() == set.size() - 1);
    CHECK(cones.size() == 16);
  }

  TEST_CASE("one populated half-octant") {
    std::vector<Point3> pts{{0, 0, 0}};
    for (int i = 1; i <= 120; ++i) pts.push_back({1.0 + 0.01 * i, 0.5, 0.2 + 0.001 * i});
    const spatial::SpatialIndex index(pts, pts.size());
    CHECK(select_oct(0, index).size() == 2);
  }

  TEST_CASE("matches per-cone argmin") {
    const auto pts = random_points(2000, 17);
    const spatial::SpatialIndex index(pts, pts.size());
    for (std::size_t c = 0; c < 2000; c += 101) {
      std::map<int, std::size_t> best;
      std::size_t taken = 0;
      for (const auto &r : brute_force_sorted(pts, pts[c])) {
        if (r.index == c) continue;
        if (taken++ == 100) break;
        best.emplace(cone_oracle(pts[r.index] - pts[c], 2), r.index);
      }
      std::set<std::size_t> want{c};
      for (const auto &[cone, i] : best) want.insert(i);
      const auto set = select_oct(c, index);
      CHECK(std::set<std::size_t>(set.members.begin(), set.members.end()) == want);
      CHECK(set.size() <= 17);
    }
  }
}

TEST_SUITE("knear") {
  TEST_CASE("small sets and identity") {
    const auto pts = random_points(15, 1);
    const spatial::SpatialIndex index(pts, pts.size());
    CHECK(select_knear(3, index, 20).size() == 15);
    const auto one = select_knear(3, index, 1);
    CHECK(one.members == std::vector<std::size_t>{3});
  }

  TEST_CASE("matches brute force") {
    const auto pts = random_points(1500, 2);
    const spatial::SpatialIndex index(pts, pts.size());
    for (std::size_t c = 0; c < 1500; c += 77) {
      const auto set = select_knear(c, index, 20);
      const auto sorted = brute_force_sorted(pts, pts[c]);
      REQUIRE(set.size() == 20);
      CHECK(set.members[0] == c);
      std::size_t j = 1;
      for (const auto &r : sorted) {
        if (r.index == c) continue;
        if (j == 20) break;
        CHECK(set.members[j++] == r.index);
      }
    }
  }
}

TEST_SUITE("tet") {
  TEST_CASE("single tetrahedron") {
    geometry::TetMesh mesh;
    mesh.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    mesh.tets = {{0, 1, 2, 3}};
    const spatial::SpatialIndex index(mesh.vertices, 4);
    const TetNeighborhood nb(mesh, index, 1e-12);
    CHECK(select_tet(0, nb).size() == 4);
  }

  TEST_CASE("two tetrahedra sharing a face") {
    geometry::TetMesh mesh;
    mesh.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {-1, -1, -1}};
    mesh.tets = {{0, 1, 2, 3}, {0, 1, 2, 4}};
    const spatial::SpatialIndex index(mesh.vertices, 5);
    const TetNeighborhood nb(mesh, index, 1e-12);
    CHECK(select_tet(0, nb).size() == 5);
    CHECK(select_tet(3, nb).size() == 4);
  }

  TEST_CASE("adjacency matches edge enumeration") {
    geometry::TetMesh mesh;
    mesh.vertices = random_points(80, 3);
    std::mt19937_64 rng(6);
    std::uniform_int_distribution<std::uint32_t> pick(0, 79);
    std::set<std::pair<std::size_t, std::size_t>> edges;
    while (mesh.tets.size() < 150) {
      std::array<std::uint32_t, 4> t{pick(rng), pick(rng), pick(rng), pick(rng)};
      if (std::set<std::uint32_t>(t.begin(), t.end()).size() < 4) continue;
      mesh.tets.push_back(t);
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
          if (a != b) edges.insert({t[std::size_t(a)], t[std::size_t(b)]});
    }
    // Nodes are the mesh vertices in reverse order, so the node map is exercised.
    std::vector<Point3> nodes(mesh.vertices.rbegin(), mesh.vertices.rend());
    const spatial::SpatialIndex index(nodes, nodes.size());
    const TetNeighborhood nb(mesh, index, 1e-12);
    for (std::size_t v = 0; v < 80; ++v) {
      const std::size_t node = 79 - v;
      std::set<std::size_t> want{node};
      for (const auto &[a, b] : edges)
        if (a == v) want.insert(79 - b);
      if (want.size() == 1) {
        CHECK(select_tet(node, nb).size() == 1);
        continue;
      }
      const auto set = select_tet(node, nb);
      CHECK(set.members.front() == node);
      CHECK(std::set<std::size_t>(set.members.begin(), set.members.end()) == want);
      CHECK(set.size() == want.size());
    }
  }

  TEST_CASE("center outside the mesh") {
    geometry::TetMesh mesh;
    mesh.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    mesh.tets = {{0, 1, 2, 3}};
    std::vector<Point3> nodes = mesh.vertices;
    nodes.push_back({5, 5, 5});
    const spatial::SpatialIndex index(nodes, 5);
    const TetNeighborhood nb(mesh, index, 1e-12);
    CHECK_THROWS_AS(select_tet(4, nb), Error);
  }
}

TEST_SUITE("seven-point star") {
  TEST_CASE("deep interior node") {
    const double h = 0.1;
    const auto pts = cubic_lattice(2, h);
    const spatial::SpatialIndex index(pts, pts.size());
    const auto set = select_grid_7star(0, index, h);
    REQUIRE(set.has_value());
    REQUIRE(set->size() == 7);
    const Point3 offsets[6] = {{h, 0, 0}, {-h, 0, 0}, {0, h, 0}, {0, -h, 0}, {0, 0, h}, {0, 0, -h}};
    for (std::size_t i = 0; i < 6; ++i) CHECK(distance(pts[set->members[i + 1]], offsets[i]) <= 1e-12);
  }

  TEST_CASE("missing or boundary neighbor") {
    const double h = 1.0;
    auto pts = cubic_lattice(1, h);
    const spatial::SpatialIndex full(pts, pts.size());
    // A face-centre node of the 3^3 block lacks its outward neighbor.
    std::size_t face = 0;
    for (std::size_t i = 0; i < pts.size(); ++i)
      if (pts[i] == Point3{1, 0, 0}) face = i;
    CHECK_FALSE(select_grid_7star(face, full, h).has_value());
    // Boundary nodes do not count: mark the last node (a lattice neighbor) as boundary.
    std::vector<Point3> reordered{{0, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}, {1, 0, 0}};
    const spatial::SpatialIndex partial(reordered, 6);
    CHECK_FALSE(select_grid_7star(0, partial, h).has_value());
    const spatial::SpatialIndex all(reordered, 7);
    CHECK(select_grid_7star(0, all, h).has_value());
  }

  TEST_CASE("scattered nodes have no star") {
    std::vector<Point3> pts;
    for (std::uint64_t i = 1; i <= 500; ++i) pts.push_back(geometry::halton_point(i));
    const spatial::SpatialIndex index(pts, pts.size());
    for (std::size_t c = 0; c < 500; c += 25) CHECK_FALSE(select_grid_7star(c, index, 0.1).has_value());
  }
}

TEST_SUITE("pqr") {
  TEST_CASE("lattice neighborhood, order 3") {
    const auto pts = cubic_lattice(2, 0.1);
    const spatial::SpatialIndex index(pts, pts.size());
    const auto r = select_pqr(0, index, 3);
    REQUIRE_MESSAGE(r.ok(), r.failure);
    check_influence_set(r.set, pts.size(), 10);
    const weights::PolyBasis basis(3);
    for (std::size_t i = 0; i < 10; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < r.set.size(); ++j) s += r.weights[j] * basis.eval(pts[r.set.members[j]])[i];
      CHECK(std::abs(s - basis.laplacian({0, 0, 0})[i]) <= 1e-10 * 600.0);
    }
  }

  TEST_CASE("coplanar candidates fail") {
    std::vector<Point3> pts{{0, 0, 0}};
    for (const auto &p : random_points(120, 8)) pts.push_back({p.x, p.y, 0.0});
    const spatial::SpatialIndex index(pts, pts.size());
    const auto r = select_pqr(0, index, 3);
    CHECK_FALSE(r.ok());
    CHECK(r.weights.empty());
  }

  TEST_CASE("order 4 on random candidates satisfies exactness") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      auto pts = random_points(101, 200 + seed);
      pts[0] = {0.05, -0.02, 0.01};
      const spatial::SpatialIndex index(pts, pts.size());
      const auto r = select_pqr(0, index, 4);
      REQUIRE_MESSAGE(r.ok(), r.failure);
      CHECK(r.set.size() <= 20);
      check_influence_set(r.set, pts.size(), 20);
      // Residual of P w = b in coordinates scaled by the mean member distance.
      std::vector<Point3> members;
      for (std::size_t m : r.set.members) members.push_back(pts[m]);
      const double s = weights::mean_member_distance(pts[0], members);
      const weights::PolyBasis basis(4);
      const auto b = basis.laplacian({0, 0, 0});
      double res = 0.0, bn = 0.0;
      for (std::size_t i = 0; i < basis.size(); ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < members.size(); ++j)
          sum += r.weights[j] * s * s * basis.eval((members[j] - pts[0]) * (1.0 / s))[i];
        res += (sum - b[i]) * (sum - b[i]);
        bn += b[i] * b[i];
      }
      CHECK(std::sqrt(res) <= 1e-9 * std::sqrt(bn));
    }
  }

  TEST_CASE("size bounds on Halton nodes") {
    geometry::NodeSet nodes;
    for (std::uint64_t i = 1; nodes.interior.size() < 3000; ++i) {
      const Point3 p = geometry::halton_point(i) * 2.0 - Point3{1, 1, 1};
      if (norm(p) < 1.0) nodes.interior.push_back(p);
    }
    const spatial::SpatialIndex index(nodes);
    for (std::size_t c = 0; c < 3000; c += 29) {
      for (int order : {3, 4}) {
        const auto r = select_pqr(c, index, order);
        if (!r.ok()) continue;
        check_influence_set(r.set, index.size(), weights::poly_dimension(order));
        CHECK(r.weights.size() == r.set.size());
        double sum = 0.0;
        for (double w : r.weights) sum += w;
        CHECK(std::abs(sum) <= 1e-9 * std::abs(r.weights[0]));
      }
    }
  }

  TEST_CASE("invalid order") {
    const auto pts = cubic_lattice(1);
    const spatial::SpatialIndex index(pts, pts.size());
    CHECK_THROWS_AS(select_pqr(0, index, 5), Error);
  }
}

TEST_CASE("influence set checks") {
  CHECK_NOTHROW(check_influence_set({0, {0, 1, 2}}, 3, 3));
  CHECK_THROWS_AS(check_influence_set({0, {1, 0}}, 3, 3), Error);
  CHECK_THROWS_AS(check_influence_set({0, {0, 1, 1}}, 3, 3), Error);
  CHECK_THROWS_AS(check_influence_set({0, {0, 1, 2}}, 3, 2), Error);
  CHECK_THROWS_AS(check_influence_set({0, {0, 5}}, 3, 3), Error);
  CHECK_THROWS_AS(check_influence_set({0, {}}, 3, 3), Error);
}
