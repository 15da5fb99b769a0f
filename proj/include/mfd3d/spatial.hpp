#pragma once

#include "mfd3d/common.hpp"
#include "mfd3d/geometry.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace mfd3d::spatial {

struct Neighbor {
  std::size_t index;
  double distance;
};

/// Exact k-nearest-neighbor index over interior followed by boundary nodes.
///
/// Global node indices are those of the NodeSet: interior nodes first. Results
/// are sorted by distance, exact ties by ascending index. Median-split kd-tree
/// with leaves of at most 16 points.
class SpatialIndex {
public:
  static constexpr std::size_t kLeafSize = 16;
  static constexpr double kSelfTolerance = 1e-14;

  explicit SpatialIndex(const geometry::NodeSet &nodes);
  SpatialIndex(std::span<const Point3> points, std::size_t interior_count);

  std::size_t size() const { return points_.size(); }
  std::size_t interior_count() const { return interior_count_; }
  bool is_interior(std::size_t index) const { return index < interior_count_; }
  const Point3 &point(std::size_t index) const { return points_[index]; }
  std::span<const Point3> points() const { return points_; }

  /// min(k, available) nearest nodes. With `exclude_self`, nodes closer than
  /// 1e-14 to the query are skipped.
  std::vector<Neighbor> k_nearest(const Point3 &query, std::size_t k, bool exclude_self = false) const;

  /// Node within 1e-9 h of p + offset, if any.
  std::optional<std::size_t> lattice_neighbor(const Point3 &p, const Point3 &offset, double h) const;

private:
  struct Node {
    Point3 lo;
    Point3 hi;
    std::uint32_t begin;
    std::uint32_t end;
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::uint8_t axis = 0;
    double split = 0.0;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);
  template <class Heap> void search(std::int32_t node, const Point3 &q, std::size_t k, bool exclude_self,
                                    Heap &heap) const;

  std::vector<Point3> points_;
  std::size_t interior_count_ = 0;
  std::vector<std::uint32_t> order_;
  std::vector<double> xs_, ys_, zs_;
  std::vector<Node> nodes_;
};

/// Builds the index; throws when the node set is empty.
SpatialIndex build_index(const geometry::NodeSet &nodes);

} // namespace mfd3d::spatial
