#include "mfd3d/geometry.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

namespace mfd3d::geometry {
namespace {

constexpr double kClearance = 0.25;
constexpr std::size_t kPilotPoints = 10000;

void require_spacing(double h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw Error("node spacing h must be positive and finite");
}

bool accept(const Domain &domain, const Point3 &p, double h) {
  return domain.contains(p) && domain.distance_to_boundary(p) >= kClearance * h;
}

Point3 map_to_box(const Aabb &box, const Point3 &u) {
  const Point3 e = box.extent();
  return {box.min.x + u.x * e.x, box.min.y + u.y * e.y, box.min.z + u.z * e.z};
}

// Sparse hash of cells of width `cell` used to merge near-coincident points.
class PointMerger {
public:
  explicit PointMerger(double tol) : tol_(tol) {}

  bool insert_if_new(const Point3 &p) {
    const Key k = key(p);
    for (long dx = -1; dx <= 1; ++dx)
      for (long dy = -1; dy <= 1; ++dy)
        for (long dz = -1; dz <= 1; ++dz) {
          auto it = cells_.find({k[0] + dx, k[1] + dy, k[2] + dz});
          if (it == cells_.end()) continue;
          for (const Point3 &q : it->second)
            if (distance(p, q) < tol_) return false;
        }
    cells_[k].push_back(p);
    return true;
  }

private:
  using Key = std::array<long long, 3>;
  struct KeyHash {
    std::size_t operator()(const Key &k) const noexcept {
      std::size_t h = 1469598103934665603ULL;
      for (long long v : k) h = (h ^ static_cast<std::size_t>(v)) * 1099511628211ULL;
      return h;
    }
  };
  Key key(const Point3 &p) const {
    return {static_cast<long long>(std::floor(p.x / tol_)), static_cast<long long>(std::floor(p.y / tol_)),
            static_cast<long long>(std::floor(p.z / tol_))};
  }

  double tol_;
  std::unordered_map<Key, std::vector<Point3>, KeyHash> cells_;
};

bool read_data_line(std::istream &in, std::string &line, std::size_t &line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
  }
  return false;
}

template <class T> std::vector<T> split_numbers(const std::string &line, std::size_t line_no) {
  std::vector<T> out;
  const char *p = line.data();
  const char *end = p + line.size();
  while (p < end) {
    while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
    if (p == end) break;
    if (*p == '+') ++p;
    T value{};
    auto [next, ec] = std::from_chars(p, end, value);
    if (ec != std::errc() || (next < end && *next != ' ' && *next != '\t' && *next != '\r'))
      throw ParseError("malformed number", line_no);
    out.push_back(value);
    p = next;
  }
  return out;
}

void write_double(std::ostream &out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.write(buf, ptr - buf);
}

} // namespace

std::vector<Point3> generate_grid_nodes(const Domain &domain, double h) {
  require_spacing(h);
  const Aabb box = domain.bounds();
  const Point3 origin = box.min + Point3{h / 2, h / 2, h / 2};
  auto count_along = [&](double lo, double hi) {
    return lo > hi ? 0L : static_cast<long>(std::floor((hi - lo) / h)) + 1;
  };
  const long nx = count_along(origin.x, box.max.x);
  const long ny = count_along(origin.y, box.max.y);
  const long nz = count_along(origin.z, box.max.z);
  std::vector<Point3> nodes;
  for (long k = 0; k < nz; ++k)
    for (long j = 0; j < ny; ++j)
      for (long i = 0; i < nx; ++i) {
        const Point3 p{origin.x + h * static_cast<double>(i), origin.y + h * static_cast<double>(j),
                       origin.z + h * static_cast<double>(k)};
        if (accept(domain, p, h)) nodes.push_back(p);
      }
  if (nodes.empty()) throw Error("grid spacing h=" + std::to_string(h) + " leaves no interior nodes");
  return nodes;
}

double radical_inverse(std::uint64_t index, unsigned base) {
  const double inv_base = 1.0 / static_cast<double>(base);
  double factor = inv_base;
  double result = 0.0;
  while (index > 0) {
    result += static_cast<double>(index % base) * factor;
    index /= base;
    factor *= inv_base;
  }
  return result;
}

Point3 halton_point(std::uint64_t index) {
  return {radical_inverse(index, 2), radical_inverse(index, 3), radical_inverse(index, 5)};
}

std::size_t halton_target_count(const Domain &domain, double h) {
  require_spacing(h);
  const Aabb box = domain.bounds();
  std::size_t inside = 0;
  for (std::uint64_t i = 1; i <= kPilotPoints; ++i)
    if (domain.contains(map_to_box(box, halton_point(i)))) ++inside;
  const double volume = static_cast<double>(inside) / static_cast<double>(kPilotPoints) * box.volume();
  const auto target = static_cast<std::size_t>(std::llround(volume / (h * h * h)));
  if (target == 0) throw Error("Halton target count is zero for h=" + std::to_string(h));
  return target;
}

std::vector<Point3> generate_halton_nodes(const Domain &domain, double h) {
  return generate_halton_nodes(domain, h, halton_target_count(domain, h));
}

std::vector<Point3> generate_halton_nodes(const Domain &domain, double h, std::size_t target) {
  require_spacing(h);
  if (target == 0) throw Error("Halton target count is zero");
  const Aabb box = domain.bounds();
  const std::uint64_t hard_cap = 1000ULL * target + kPilotPoints;
  std::vector<Point3> nodes;
  nodes.reserve(target);
  for (std::uint64_t i = 1; nodes.size() < target; ++i) {
    if (i > 10ULL * target && nodes.empty())
      throw Error("no Halton point accepted after " + std::to_string(10 * target) + " draws");
    if (i > hard_cap)
      throw Error("Halton generation reached only " + std::to_string(nodes.size()) + " of " +
                  std::to_string(target) + " nodes");
    const Point3 p = map_to_box(box, halton_point(i));
    if (accept(domain, p, h)) nodes.push_back(p);
  }
  return nodes;
}

std::vector<Point3> project_boundary_nodes(const Domain &domain, std::span<const Point3> interior, double h) {
  require_spacing(h);
  if (interior.empty()) throw Error("cannot project an empty interior node set");
  PointMerger merger(1e-6 * h);
  std::vector<Point3> out;
  for (const Point3 &p : interior) {
    if (domain.distance_to_boundary(p) >= h) continue;
    const Point3 q = domain.project_to_boundary(p);
    if (merger.insert_if_new(q)) out.push_back(q);
  }
  return out;
}

void write_nodes(std::ostream &out, const NodeSet &nodes) {
  out << nodes.interior.size() << ' ' << nodes.boundary.size() << '\n';
  for (const auto *list : {&nodes.interior, &nodes.boundary})
    for (const Point3 &p : *list) {
      write_double(out, p.x);
      out << ' ';
      write_double(out, p.y);
      out << ' ';
      write_double(out, p.z);
      out << '\n';
    }
}

NodeSet read_nodes(std::istream &in) {
  std::string line;
  std::size_t line_no = 0;
  if (!read_data_line(in, line, line_no)) throw ParseError("empty node file", 1);
  const auto header = split_numbers<std::size_t>(line, line_no);
  if (header.size() != 2) throw ParseError("header must be 'N_int N_bnd'", line_no);
  NodeSet nodes;
  nodes.interior.reserve(header[0]);
  nodes.boundary.reserve(header[1]);
  const std::size_t total = header[0] + header[1];
  for (std::size_t i = 0; i < total; ++i) {
    if (!read_data_line(in, line, line_no))
      throw ParseError("header declares " + std::to_string(total) + " points but file ends after " +
                           std::to_string(i),
                       line_no + 1);
    const auto xyz = split_numbers<double>(line, line_no);
    if (xyz.size() != 3) throw ParseError("expected 'x y z'", line_no);
    const Point3 p{xyz[0], xyz[1], xyz[2]};
    if (!is_finite(p)) throw ParseError("non-finite coordinate", line_no);
    (i < header[0] ? nodes.interior : nodes.boundary).push_back(p);
  }
  if (read_data_line(in, line, line_no))
    throw ParseError("more points than the header declares (" + std::to_string(total) + ")", line_no);
  return nodes;
}

void save_nodes(const std::filesystem::path &path, const NodeSet &nodes) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write node file '" + path.string() + "'");
  write_nodes(out, nodes);
}

NodeSet load_nodes(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open node file '" + path.string() + "'");
  try {
    return read_nodes(in);
  } catch (const ParseError &e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

} // namespace mfd3d::geometry
