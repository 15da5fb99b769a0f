#include "mfd3d/experiment.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace mfd3d::experiment {
namespace {

namespace pt = boost::property_tree;

std::vector<std::string> split(const std::string &text, const std::string &separators) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (separators.find(c) != std::string::npos) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::string trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T> T parse_value(const std::string &text, const std::string &what) {
  T value{};
  const std::string t = trim(text);
  const auto res = std::from_chars(t.data(), t.data() + t.size(), value);
  if (res.ec != std::errc{} || res.ptr != t.data() + t.size() || t.empty())
    throw Error("invalid " + what + ": '" + text + "'");
  return value;
}

bool parse_bool(const std::string &text, const std::string &what) {
  const std::string t = trim(text);
  if (t == "true" || t == "yes" || t == "1" || t == "on") return true;
  if (t == "false" || t == "no" || t == "0" || t == "off") return false;
  throw Error("invalid " + what + ": '" + text + "'");
}

std::filesystem::path resolve(const std::filesystem::path &base, const std::string &p) {
  std::filesystem::path path(trim(p));
  if (path.is_relative() && !base.empty()) path = base / path;
  return path;
}

std::optional<std::string> get(const pt::ptree &tree, const std::string &key) {
  auto v = tree.get_optional<std::string>(pt::ptree::path_type(key, '.'));
  if (!v) return std::nullopt;
  // Trailing comments: whitespace then ';' or '#'.
  std::string s = *v;
  for (std::size_t i = 1; i < s.size(); ++i)
    if ((s[i] == ';' || s[i] == '#') && (s[i - 1] == ' ' || s[i - 1] == '\t')) {
      s.resize(i);
      break;
    }
  return trim(s);
}

} // namespace

MethodSpec parse_method(const std::string &token) {
  MethodSpec m;
  m.label = token;
  const auto colon = token.find(':');
  const std::string head = token.substr(0, colon);
  const std::string tail = colon == std::string::npos ? std::string{} : token.substr(colon + 1);
  if (head == "oct-dist") {
    m.kind = MethodSpec::Kind::OctDist;
    for (const std::string &kv : split(tail, ":")) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw Error("oct-dist option '" + kv + "' is not key=value");
      const std::string key = kv.substr(0, eq), value = kv.substr(eq + 1);
      if (key == "k")
        m.params.k = parse_value<std::size_t>(value, "oct-dist k");
      else if (key == "m")
        m.params.m = parse_value<std::size_t>(value, "oct-dist m");
      else if (key == "s")
        m.params.s = parse_value<int>(value, "oct-dist s");
      else if (key == "n")
        m.params.n = parse_value<int>(value, "oct-dist n");
      else if (key == "delta")
        m.params.delta = parse_value<double>(value, "oct-dist delta");
      else
        throw Error("unknown oct-dist option '" + key + "'");
    }
    m.params.validate();
  } else if (head == "oct" && tail.empty()) {
    m.kind = MethodSpec::Kind::Oct;
  } else if (head == "knear") {
    m.kind = MethodSpec::Kind::Knear;
    m.k = parse_value<std::size_t>(tail, "knear size");
    if (m.k < 1) throw Error("knear size must be at least 1");
  } else if (head == "tet") {
    m.kind = MethodSpec::Kind::Tet;
    for (const std::string &p : split(tail, "|")) m.meshes.emplace_back(p);
    if (m.meshes.empty()) throw Error("tet needs a mesh file: tet:FILE");
  } else if (head == "pqr3" && tail.empty()) {
    m.kind = MethodSpec::Kind::Pqr3;
  } else if (head == "pqr4" && tail.empty()) {
    m.kind = MethodSpec::Kind::Pqr4;
  } else if (head == "pqr4sel" && tail.empty()) {
    m.kind = MethodSpec::Kind::Pqr4Sel;
  } else {
    throw Error("unknown method '" + token + "'");
  }
  return m;
}

ProblemSpec parse_problem(const std::string &text) {
  const std::string t = trim(text);
  if (t == "ball-exp") return {ProblemSpec::Kind::BallExp, 0.0};
  if (t.rfind("const:", 0) == 0) return {ProblemSpec::Kind::Const, parse_value<double>(t.substr(6), "constant")};
  throw Error("unknown problem '" + text + "' (expected ball-exp or const:C)");
}

std::size_t ExperimentConfig::level_count() const {
  if (source == NodeSource::File) return node_files.size();
  if (!spacings.empty()) return spacings.size();
  return static_cast<std::size_t>(level_max - level_min + 1);
}

std::optional<double> ExperimentConfig::spacing(std::size_t i) const {
  if (source == NodeSource::File) return std::nullopt;
  if (!spacings.empty()) return spacings.at(i);
  const int level = level_min + static_cast<int>(i);
  return 0.9 * h0 * std::exp2(-level / 3.0);
}

void ExperimentConfig::validate() const {
  if (methods.empty()) throw Error("config lists no methods");
  if (source == NodeSource::File) {
    if (node_files.empty()) throw Error("node source 'file' needs [nodes] files");
  } else if (spacings.empty()) {
    if (!(h0 > 0.0)) throw Error("H0 must be positive");
    if (level_min < 0 || level_max < level_min) throw Error("levels must be a range i0-i1 with 0 <= i0 <= i1");
  } else {
    for (std::size_t i = 0; i < spacings.size(); ++i) {
      if (!(spacings[i] > 0.0)) throw Error("spacings must be positive");
      if (i > 0 && !(spacings[i] < spacings[i - 1])) throw Error("spacings must be decreasing");
    }
  }
  if (domain.kind == DomainSpec::Kind::Ball && !(domain.radius > 0.0)) throw Error("ball radius must be positive");
  if (domain.kind == DomainSpec::Kind::Stl && domain.stl.empty()) throw Error("stl domain needs a file");
  if (!(bicgstab.tol > 0.0) || bicgstab.maxit < 1) throw Error("bicgstab needs tol > 0 and maxit >= 1");
  for (const auto &m : methods)
    if (m.kind == MethodSpec::Kind::Tet && m.meshes.size() != 1 && m.meshes.size() != level_count())
      throw Error("tet needs one mesh or one per level");
}

ExperimentConfig parse_config(std::istream &in, const std::filesystem::path &base_dir) {
  pt::ptree tree;
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error &e) {
    throw ParseError(e.message(), e.line());
  }
  static const std::map<std::string, std::vector<std::string>> kKnown = {
      {"experiment", {"name", "seed"}},
      {"domain", {"type", "center", "radius", "file"}},
      {"nodes", {"source", "H0", "levels", "spacing", "files"}},
      {"methods", {"list", "seven_star"}},
      {"problem", {"type"}},
      {"solver", {"type", "tol", "maxit", "sigma"}},
      {"output", {"csv", "plot", "stencils", "nodes", "timings"}},
  };
  for (const auto &[section, body] : tree) {
    const auto it = kKnown.find(section);
    if (it == kKnown.end()) throw Error("unknown config section [" + section + "]");
    if (body.empty() && !body.data().empty()) throw Error("config key '" + section + "' outside a section");
    for (const auto &[key, value] : body)
      if (std::find(it->second.begin(), it->second.end(), key) == it->second.end())
        throw Error("unknown key '" + key + "' in [" + section + "]");
  }

  ExperimentConfig c;
  if (auto v = get(tree, "experiment.name")) c.name = *v;
  if (auto v = get(tree, "experiment.seed")) c.seed = parse_value<std::uint64_t>(*v, "seed");

  const std::string domain = get(tree, "domain.type").value_or("ball");
  if (domain == "ball") {
    c.domain.kind = DomainSpec::Kind::Ball;
    if (auto v = get(tree, "domain.center")) {
      const auto parts = split(*v, " \t,");
      if (parts.size() != 3) throw Error("domain center needs three coordinates");
      c.domain.center = {parse_value<double>(parts[0], "center"), parse_value<double>(parts[1], "center"),
                         parse_value<double>(parts[2], "center")};
    }
    if (auto v = get(tree, "domain.radius")) c.domain.radius = parse_value<double>(*v, "radius");
  } else if (domain == "stl") {
    c.domain.kind = DomainSpec::Kind::Stl;
    if (auto v = get(tree, "domain.file")) c.domain.stl = resolve(base_dir, *v);
  } else {
    throw Error("unknown domain type '" + domain + "'");
  }

  const std::string source = get(tree, "nodes.source").value_or("grid");
  if (source == "grid")
    c.source = NodeSource::Grid;
  else if (source == "halton")
    c.source = NodeSource::Halton;
  else if (source == "file")
    c.source = NodeSource::File;
  else
    throw Error("unknown node source '" + source + "'");
  if (auto v = get(tree, "nodes.H0")) c.h0 = parse_value<double>(*v, "H0");
  if (auto v = get(tree, "nodes.levels")) {
    const auto dash = v->find('-');
    if (dash == std::string::npos) {
      c.level_min = c.level_max = parse_value<int>(*v, "levels");
    } else {
      c.level_min = parse_value<int>(v->substr(0, dash), "levels");
      c.level_max = parse_value<int>(v->substr(dash + 1), "levels");
    }
  }
  if (auto v = get(tree, "nodes.spacing"))
    for (const auto &s : split(*v, " \t,")) c.spacings.push_back(parse_value<double>(s, "spacing"));
  if (auto v = get(tree, "nodes.files"))
    for (const auto &s : split(*v, " \t,")) c.node_files.push_back(resolve(base_dir, s));

  if (auto v = get(tree, "methods.list"))
    for (const auto &tok : split(*v, " \t,")) {
      MethodSpec m = parse_method(tok);
      for (auto &mesh : m.meshes) mesh = resolve(base_dir, mesh.string());
      c.methods.push_back(std::move(m));
    }
  if (auto v = get(tree, "methods.seven_star")) c.seven_star = parse_bool(*v, "seven_star");

  if (auto v = get(tree, "problem.type")) c.problem = parse_problem(*v);

  const std::string solver = get(tree, "solver.type").value_or("direct");
  if (solver == "direct")
    c.solver = SolverKind::Direct;
  else if (solver == "bicgstab")
    c.solver = SolverKind::Bicgstab;
  else
    throw Error("unknown solver '" + solver + "'");
  if (auto v = get(tree, "solver.tol")) c.bicgstab.tol = parse_value<double>(*v, "tol");
  if (auto v = get(tree, "solver.maxit")) c.bicgstab.maxit = parse_value<int>(*v, "maxit");
  if (auto v = get(tree, "solver.sigma")) c.sigma = parse_bool(*v, "sigma");

  if (auto v = get(tree, "output.csv")) c.csv = resolve(base_dir, *v);
  if (auto v = get(tree, "output.plot")) c.plot = resolve(base_dir, *v);
  if (auto v = get(tree, "output.stencils")) c.stencils = resolve(base_dir, *v);
  if (auto v = get(tree, "output.nodes")) c.nodes_out = resolve(base_dir, *v);
  if (auto v = get(tree, "output.timings")) c.timings = parse_bool(*v, "timings");

  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path.string());
  try {
    return parse_config(in, path.parent_path());
  } catch (const Error &e) {
    throw Error(path.string() + ": " + e.what());
  }
}

} // namespace mfd3d::experiment
