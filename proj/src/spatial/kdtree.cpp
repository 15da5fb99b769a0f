#include "mfd3d/spatial.hpp"
#include "mfd3d/simd.hpp"

#include <algorithm>
#include <array>
#include <limits>

namespace mfd3d::spatial {
namespace {

struct Candidate {
  double d2;
  std::uint32_t index;
  friend bool operator<(const Candidate &a, const Candidate &b) {
    return a.d2 < b.d2 || (a.d2 == b.d2 && a.index < b.index);
  }
};

// Bounded max-heap keeping the k smallest candidates.
class KBest {
public:
  explicit KBest(std::size_t k) : k_(k) { items_.reserve(k); }
  bool full() const { return items_.size() == k_; }
  double worst() const { return items_.front().d2; }
  void offer(Candidate c) {
    if (items_.size() < k_) {
      items_.push_back(c);
      std::push_heap(items_.begin(), items_.end());
    } else if (c < items_.front()) {
      std::pop_heap(items_.begin(), items_.end());
      items_.back() = c;
      std::push_heap(items_.begin(), items_.end());
    }
  }
  std::vector<Candidate> take_sorted() {
    std::sort_heap(items_.begin(), items_.end());
    return std::move(items_);
  }

private:
  std::size_t k_;
  std::vector<Candidate> items_;
};

double box_distance2(const Point3 &q, const Point3 &lo, const Point3 &hi) {
  double d2 = 0.0;
  for (std::size_t a = 0; a < 3; ++a) {
    const double v = q[a];
    const double gap = v < lo[a] ? lo[a] - v : (v > hi[a] ? v - hi[a] : 0.0);
    d2 += gap * gap;
  }
  return d2;
}

} // namespace

SpatialIndex::SpatialIndex(const geometry::NodeSet &nodes) : interior_count_(nodes.interior.size()) {
  points_.reserve(nodes.size());
  points_.insert(points_.end(), nodes.interior.begin(), nodes.interior.end());
  points_.insert(points_.end(), nodes.boundary.begin(), nodes.boundary.end());
  if (points_.empty()) throw Error("spatial index needs at least one node");
  order_.resize(points_.size());
  for (std::uint32_t i = 0; i < order_.size(); ++i) order_[i] = i;
  nodes_.reserve(2 * points_.size() / kLeafSize + 2);
  build(0, static_cast<std::uint32_t>(points_.size()));
  xs_.resize(order_.size());
  ys_.resize(order_.size());
  zs_.resize(order_.size());
  for (std::size_t i = 0; i < order_.size(); ++i) {
    const Point3 &p = points_[order_[i]];
    xs_[i] = p.x;
    ys_[i] = p.y;
    zs_[i] = p.z;
  }
}

SpatialIndex::SpatialIndex(std::span<const Point3> points, std::size_t interior_count)
    : SpatialIndex(geometry::NodeSet{
          std::vector<Point3>(points.begin(), points.begin() + static_cast<std::ptrdiff_t>(std::min(interior_count, points.size()))),
          std::vector<Point3>(points.begin() + static_cast<std::ptrdiff_t>(std::min(interior_count, points.size())), points.end())}) {}

std::int32_t SpatialIndex::build(std::uint32_t begin, std::uint32_t end) {
  Node node;
  node.begin = begin;
  node.end = end;
  node.lo = node.hi = points_[order_[begin]];
  for (std::uint32_t i = begin; i < end; ++i) {
    const Point3 &p = points_[order_[i]];
    node.lo = {std::min(node.lo.x, p.x), std::min(node.lo.y, p.y), std::min(node.lo.z, p.z)};
    node.hi = {std::max(node.hi.x, p.x), std::max(node.hi.y, p.y), std::max(node.hi.z, p.z)};
  }
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(node);
  if (end - begin <= kLeafSize) return id;

  const Point3 extent = node.hi - node.lo;
  const std::uint8_t axis = extent.x >= extent.y && extent.x >= extent.z ? 0 : (extent.y >= extent.z ? 1 : 2);
  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     const double va = points_[a][axis];
                     const double vb = points_[b][axis];
                     return va < vb || (va == vb && a < b);
                   });
  nodes_[id].axis = axis;
  nodes_[id].split = points_[order_[mid]][axis];
  const std::int32_t left = build(begin, mid);
  const std::int32_t right = build(mid, end);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

template <class Heap>
void SpatialIndex::search(std::int32_t id, const Point3 &q, std::size_t k, bool exclude_self, Heap &heap) const {
  const Node &node = nodes_[id];
  if (node.left < 0) {
    std::array<double, kLeafSize> d2{};
    const std::size_t n = node.end - node.begin;
    simd::active().squared_distances(xs_.data() + node.begin, ys_.data() + node.begin, zs_.data() + node.begin, n,
                                     q.x, q.y, q.z, d2.data());
    constexpr double self2 = kSelfTolerance * kSelfTolerance;
    for (std::size_t i = 0; i < n; ++i) {
      if (exclude_self && d2[i] < self2) continue;
      heap.offer({d2[i], order_[node.begin + i]});
    }
    return;
  }
  const bool go_left = q[node.axis] < node.split;
  const std::int32_t first = go_left ? node.left : node.right;
  const std::int32_t second = go_left ? node.right : node.left;
  for (std::int32_t child : {first, second}) {
    const Node &c = nodes_[child];
    // `<=` keeps equidistant nodes with smaller indices reachable.
    if (!heap.full() || box_distance2(q, c.lo, c.hi) <= heap.worst()) search(child, q, k, exclude_self, heap);
  }
}

std::vector<Neighbor> SpatialIndex::k_nearest(const Point3 &query, std::size_t k, bool exclude_self) const {
  k = std::min(k, points_.size());
  if (k == 0) return {};
  KBest heap(k);
  search(0, query, k, exclude_self, heap);
  std::vector<Neighbor> out;
  auto best = heap.take_sorted();
  out.reserve(best.size());
  for (const Candidate &c : best) out.push_back({c.index, std::sqrt(c.d2)});
  return out;
}

std::optional<std::size_t> SpatialIndex::lattice_neighbor(const Point3 &p, const Point3 &offset, double h) const {
  const Point3 target = p + offset;
  const auto nearest = k_nearest(target, 1, false);
  if (nearest.empty() || nearest.front().distance > 1e-9 * h) return std::nullopt;
  return nearest.front().index;
}

SpatialIndex build_index(const geometry::NodeSet &nodes) { return SpatialIndex(nodes); }

} // namespace mfd3d::spatial
