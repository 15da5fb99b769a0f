#include "mfd3d/geometry.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <string_view>

namespace mfd3d::geometry {
namespace {

constexpr std::size_t kHeaderBytes = 80;
constexpr std::size_t kRecordBytes = 50;

std::uint32_t read_u32_le(const std::byte *p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

float read_f32_le(const std::byte *p) { return std::bit_cast<float>(read_u32_le(p)); }

void write_u32_le(std::vector<std::byte> &out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xffU));
}

void write_f32_le(std::vector<std::byte> &out, float v) { write_u32_le(out, std::bit_cast<std::uint32_t>(v)); }

// Accumulates raw triangles, merges bitwise-equal vertices and drops slivers.
class MeshBuilder {
public:
  void add(const std::array<Point3, 3> &tri) { raw_.push_back(tri); }
  std::size_t size() const { return raw_.size(); }

  SurfaceMesh finish() {
    if (raw_.empty()) throw ParseError("STL contains zero triangles");
    Aabb box{raw_[0][0], raw_[0][0]};
    for (const auto &tri : raw_)
      for (const Point3 &p : tri) {
        box.min = {std::min(box.min.x, p.x), std::min(box.min.y, p.y), std::min(box.min.z, p.z)};
        box.max = {std::max(box.max.x, p.x), std::max(box.max.y, p.y), std::max(box.max.z, p.z)};
      }
    const double diag = box.diagonal();
    const double min_area = 1e-12 * diag * diag;

    SurfaceMesh mesh;
    std::map<std::array<double, 3>, std::uint32_t> lookup;
    auto vertex_id = [&](const Point3 &p) {
      const std::array<double, 3> key{p.x, p.y, p.z};
      auto [it, inserted] = lookup.emplace(key, static_cast<std::uint32_t>(mesh.vertices.size()));
      if (inserted) mesh.vertices.push_back(p);
      return it->second;
    };
    for (const auto &tri : raw_) {
      const Point3 n = cross(tri[1] - tri[0], tri[2] - tri[0]);
      const double twice_area = norm(n);
      if (!(0.5 * twice_area > min_area)) {
        ++mesh.dropped_degenerate;
        continue;
      }
      mesh.triangles.push_back({vertex_id(tri[0]), vertex_id(tri[1]), vertex_id(tri[2])});
      mesh.normals.push_back(n * (1.0 / twice_area));
    }
    if (mesh.triangles.empty()) throw ParseError("STL contains only degenerate triangles");
    return mesh;
  }

private:
  std::vector<std::array<Point3, 3>> raw_;
};

SurfaceMesh parse_binary(std::span<const std::byte> bytes, std::uint32_t count) {
  MeshBuilder builder;
  const std::byte *rec = bytes.data() + kHeaderBytes + 4;
  for (std::uint32_t t = 0; t < count; ++t, rec += kRecordBytes) {
    std::array<Point3, 3> tri;
    for (int v = 0; v < 3; ++v) {
      const std::byte *q = rec + 12 + 12 * v;
      tri[v] = {read_f32_le(q), read_f32_le(q + 4), read_f32_le(q + 8)};
      if (!is_finite(tri[v])) throw ParseError("non-finite vertex in binary STL triangle " + std::to_string(t));
    }
    builder.add(tri);
  }
  return builder.finish();
}

struct Token {
  std::string_view text;
  std::size_t line;
};

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  std::size_t line = 1;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (c == '\n') {
      ++line;
      ++i;
    } else if (c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v') {
      ++i;
    } else {
      const std::size_t start = i;
      while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
      tokens.push_back({text.substr(start, i - start), line});
    }
  }
  return tokens;
}

class AsciiParser {
public:
  explicit AsciiParser(std::string_view text) : tokens_(tokenize(text)) {}

  SurfaceMesh parse() {
    MeshBuilder builder;
    expect("solid");
    skip_name();
    while (true) {
      if (at_end()) throw ParseError("missing 'endsolid'", last_line());
      if (peek() == "endsolid") {
        ++pos_;
        skip_name();
        if (at_end()) break;
        expect("solid");
        skip_name();
        continue;
      }
      expect("facet");
      expect("normal");
      for (int i = 0; i < 3; ++i) number();
      expect("outer");
      expect("loop");
      std::array<Point3, 3> tri;
      for (auto &v : tri) {
        expect("vertex");
        v.x = number();
        v.y = number();
        v.z = number();
      }
      expect("endloop");
      expect("endfacet");
      builder.add(tri);
    }
    return builder.finish();
  }

private:
  bool at_end() const { return pos_ >= tokens_.size(); }
  std::string_view peek() const { return tokens_[pos_].text; }
  std::size_t last_line() const { return tokens_.empty() ? 1 : tokens_.back().line; }

  void expect(std::string_view keyword) {
    if (at_end()) throw ParseError("unexpected end of file, expected '" + std::string(keyword) + "'", last_line());
    if (peek() != keyword)
      throw ParseError("expected '" + std::string(keyword) + "', found '" + std::string(peek()) + "'",
                       tokens_[pos_].line);
    ++pos_;
  }

  // Optional solid name: everything on the keyword's line.
  void skip_name() {
    if (pos_ == 0) return;
    const std::size_t line = tokens_[pos_ - 1].line;
    while (!at_end() && tokens_[pos_].line == line) ++pos_;
  }

  double number() {
    if (at_end()) throw ParseError("unexpected end of file, expected a number", last_line());
    const Token &tok = tokens_[pos_++];
    double value = 0.0;
    const char *first = tok.text.data();
    const char *last = first + tok.text.size();
    if (*first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || !std::isfinite(value))
      throw ParseError("invalid number '" + std::string(tok.text) + "'", tok.line);
    return value;
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

bool starts_with_solid(std::span<const std::byte> bytes) {
  std::size_t i = 0;
  while (i < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[i]))) ++i;
  constexpr std::string_view kw = "solid";
  if (bytes.size() - i < kw.size()) return false;
  return std::memcmp(bytes.data() + i, kw.data(), kw.size()) == 0;
}

} // namespace

Aabb SurfaceMesh::bounds() const {
  if (vertices.empty()) return {};
  Aabb box{vertices[0], vertices[0]};
  for (const Point3 &p : vertices) {
    box.min = {std::min(box.min.x, p.x), std::min(box.min.y, p.y), std::min(box.min.z, p.z)};
    box.max = {std::max(box.max.x, p.x), std::max(box.max.y, p.y), std::max(box.max.z, p.z)};
  }
  return box;
}

SurfaceMesh parse_stl(std::span<const std::byte> bytes) {
  const bool solid = starts_with_solid(bytes);
  if (bytes.size() >= kHeaderBytes + 4) {
    const std::uint32_t count = read_u32_le(bytes.data() + kHeaderBytes);
    const std::uint64_t expected = kHeaderBytes + 4 + std::uint64_t{kRecordBytes} * count;
    if (expected == bytes.size()) {
      if (count == 0) throw ParseError("STL contains zero triangles");
      return parse_binary(bytes, count);
    }
    if (!solid) {
      if (expected > bytes.size())
        throw ParseError("truncated binary STL: header declares " + std::to_string(count) + " triangles (" +
                         std::to_string(expected) + " bytes) but file has " + std::to_string(bytes.size()) +
                         " bytes");
      if (count == 0) throw ParseError("STL contains zero triangles");
      return parse_binary(bytes, count);
    }
  } else if (!solid) {
    throw ParseError("file too short to be a binary STL and does not start with 'solid'");
  }
  const std::string_view text(reinterpret_cast<const char *>(bytes.data()), bytes.size());
  return AsciiParser(text).parse();
}

SurfaceMesh read_stl(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open STL file '" + path.string() + "'");
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_stl(std::as_bytes(std::span<const char>(raw)));
}

std::vector<std::byte> write_stl_binary(const SurfaceMesh &mesh) {
  std::vector<std::byte> out(kHeaderBytes, std::byte{0});
  constexpr std::string_view banner = "binary STL written by mfd3d";
  std::memcpy(out.data(), banner.data(), banner.size());
  write_u32_le(out, static_cast<std::uint32_t>(mesh.triangles.size()));
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const Point3 n = t < mesh.normals.size() ? mesh.normals[t] : Point3{};
    for (double c : {n.x, n.y, n.z}) write_f32_le(out, static_cast<float>(c));
    for (std::uint32_t v : mesh.triangles[t]) {
      const Point3 &p = mesh.vertices[v];
      for (double c : {p.x, p.y, p.z}) write_f32_le(out, static_cast<float>(c));
    }
    out.push_back(std::byte{0});
    out.push_back(std::byte{0});
  }
  return out;
}

} // namespace mfd3d::geometry
