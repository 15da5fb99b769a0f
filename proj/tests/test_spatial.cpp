#include "mfd3d/spatial.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace mfd3d;
using namespace mfd3d::spatial;
using namespace testing_support;

namespace {

void check_against_brute_force(const std::vector<Point3> &pts, const std::vector<Point3> &queries, std::size_t k) {
  const SpatialIndex index(pts, pts.size());
  for (const auto &q : queries) {
    const auto got = index.k_nearest(q, k);
    const auto want = brute_force_sorted(pts, q);
    REQUIRE(got.size() == std::min(k, pts.size()));
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i].index == want[i].index);
      CHECK(got[i].distance == want[i].distance);
    }
  }
}

} // namespace

TEST_CASE("single node") {
  geometry::NodeSet nodes;
  nodes.interior = {{1, 2, 3}};
  const auto index = build_index(nodes);
  const auto nn = index.k_nearest({0, 0, 0}, 1);
  REQUIRE(nn.size() == 1);
  CHECK(nn[0].index == 0);
}

TEST_CASE("empty node set") { CHECK_THROWS_AS(build_index(geometry::NodeSet{}), Error); }

TEST_CASE("cube corners tie by index") {
  std::vector<Point3> corners;
  for (int i = 0; i < 8; ++i) corners.push_back({double(i & 1), double((i >> 1) & 1), double((i >> 2) & 1)});
  const SpatialIndex index(corners, 8);
  const auto nn = index.k_nearest({0.5, 0.5, 0.5}, 8);
  REQUIRE(nn.size() == 8);
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(nn[i].index == i);
    CHECK(nn[i].distance == doctest::Approx(std::sqrt(0.75)));
  }
}

TEST_CASE("matches brute force on random clouds") {
  check_against_brute_force(random_points(1000, 1), random_points(50, 2), 10);
  check_against_brute_force(random_points(1000, 3), random_points(50, 4), 100);
  for (std::uint64_t seed = 10; seed < 20; ++seed) {
    const std::size_t n = 1 + seed * 190;
    check_against_brute_force(random_points(n, seed), random_points(10, seed + 100), 1 + seed % 40);
  }
}

TEST_CASE("matches brute force on a lattice with many ties") {
  check_against_brute_force(cubic_lattice(4, 0.5), random_points(30, 8), 30);
  check_against_brute_force(cubic_lattice(4, 0.5), {{0, 0, 0}, {0.25, 0.25, 0.25}, {0.5, 0, 0}}, 60);
}

TEST_CASE("halton nodes, k = 100") {
  std::vector<Point3> pts;
  for (std::uint64_t i = 1; i <= 500; ++i) pts.push_back(geometry::halton_point(i));
  check_against_brute_force(pts, {pts[0], pts[17], {0.5, 0.5, 0.5}}, 100);
}

TEST_CASE("k beyond the node count returns everything") {
  const auto pts = random_points(30, 5);
  const SpatialIndex index(pts, 30);
  CHECK(index.k_nearest({0, 0, 0}, 100).size() == 30);
}

TEST_CASE("self exclusion") {
  const auto pts = random_points(200, 6);
  const SpatialIndex index(pts, 200);
  const auto nn = index.k_nearest(pts[42], 10, true);
  REQUIRE(nn.size() == 10);
  for (const auto &n : nn) CHECK(n.index != 42);
  CHECK(index.k_nearest(pts[42], 10, false).front().index == 42);
}

TEST_CASE("interior nodes come first") {
  geometry::NodeSet nodes;
  nodes.interior = {{0, 0, 0}, {1, 0, 0}};
  nodes.boundary = {{0.1, 0, 0}};
  const auto index = build_index(nodes);
  CHECK(index.interior_count() == 2);
  CHECK_FALSE(index.is_interior(2));
  CHECK(index.k_nearest({0.2, 0, 0}, 1).front().index == 2);
}

TEST_CASE("lattice neighbors") {
  const double h = 0.1;
  const auto pts = cubic_lattice(2, h);
  const SpatialIndex index(pts, pts.size());
  for (const Point3 off : {Point3{h, 0, 0}, Point3{-h, 0, 0}, Point3{0, h, 0}, Point3{0, -h, 0}, Point3{0, 0, h},
                           Point3{0, 0, -h}}) {
    const auto n = index.lattice_neighbor(pts[0], off, h);
    REQUIRE(n.has_value());
    CHECK(distance(pts[*n], off) <= 1e-12);
  }
  // Corner of the block: outward neighbors are missing.
  const Point3 corner{2 * h, 2 * h, 2 * h};
  CHECK_FALSE(index.lattice_neighbor(corner, {h, 0, 0}, h).has_value());
}

TEST_CASE("lattice neighbor tolerance") {
  const double h = 1.0;
  std::vector<Point3> pts{{0, 0, 0}, {1 + 1e-6, 0, 0}, {0, 1 + 1e-10, 0}};
  const SpatialIndex index(pts, 3);
  CHECK_FALSE(index.lattice_neighbor(pts[0], {h, 0, 0}, h).has_value());
  CHECK(index.lattice_neighbor(pts[0], {0, h, 0}, h) == std::optional<std::size_t>(2));
}

TEST_CASE("queries are deterministic") {
  const auto pts = cubic_lattice(3);
  const SpatialIndex a(pts, pts.size()), b(pts, pts.size());
  for (const auto &q : random_points(20, 9, -3, 3)) {
    const auto x = a.k_nearest(q, 27), y = b.k_nearest(q, 27);
    REQUIRE(x.size() == y.size());
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(x[i].index == y[i].index);
  }
}
