#include "mfd3d/experiment.hpp"
#include "mfd3d/spatial.hpp"
#include "mfd3d/weights.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <thread>

namespace mfd3d::experiment {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Calls fn(i) for i in [0, n) on `threads` workers. Each index is handled by
// exactly one worker, so writes to per-index slots need no synchronization.
template <class Fn> void parallel_for(std::size_t n, unsigned threads, Fn &&fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n / 64, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  constexpr std::size_t kChunk = 64;
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (;;) {
      const std::size_t begin = next.fetch_add(kChunk);
      if (begin >= n) return;
      const std::size_t end = std::min(n, begin + kChunk);
      for (std::size_t i = begin; i < end; ++i) fn(i);
    }
  };
  std::vector<std::jthread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(work);
  work();
}

std::filesystem::path variant_path(const std::filesystem::path &base, std::size_t level, const std::string &label,
                                   bool unique) {
  if (unique) return base;
  std::string tag;
  for (char c : label) tag += std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' ? c : '_';
  std::filesystem::path p = base;
  p.replace_filename(base.stem().string() + "_L" + std::to_string(level) + "_" + tag + base.extension().string());
  return p;
}

std::ofstream open_output(const std::filesystem::path &path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

void write_double(std::ostream &out, double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.write(buf, res.ptr - buf);
}

} // namespace

std::optional<linsys::ScalarField> exact_solution(const ExperimentConfig &config) {
  if (config.problem.kind == ProblemSpec::Kind::BallExp)
    return linsys::ScalarField([](const Point3 &p) { return std::exp(p.x + p.y + p.z); });
  if (config.domain.kind == DomainSpec::Kind::Ball && config.source != NodeSource::File) {
    const double c = config.problem.c, r = config.domain.radius;
    const Point3 x0 = config.domain.center;
    return linsys::ScalarField(
        [c, r, x0](const Point3 &p) { return c / 6.0 * (squared_distance(p, x0) - r * r); });
  }
  return std::nullopt;
}

linsys::ScalarField source_term(const ExperimentConfig &config) {
  if (config.problem.kind == ProblemSpec::Kind::BallExp)
    return [](const Point3 &p) { return 3.0 * std::exp(p.x + p.y + p.z); };
  const double c = config.problem.c;
  return [c](const Point3 &) { return c; };
}

linsys::ScalarField boundary_values(const ExperimentConfig &config) {
  if (config.problem.kind == ProblemSpec::Kind::BallExp)
    return [](const Point3 &p) { return std::exp(p.x + p.y + p.z); };
  return [](const Point3 &) { return 0.0; };
}

geometry::Domain make_domain(const ExperimentConfig &config) {
  geometry::Domain d = config.domain.kind == DomainSpec::Kind::Ball
                           ? geometry::Domain::ball(config.domain.center, config.domain.radius)
                           : geometry::Domain::mesh(geometry::read_stl(config.domain.stl));
  d.set_seed(config.seed);
  return d;
}

geometry::NodeSet make_nodes(const ExperimentConfig &config, const geometry::Domain *domain, std::size_t level) {
  if (config.source == NodeSource::File) return geometry::load_nodes(config.node_files.at(level));
  if (!domain) throw Error("node generation needs a domain");
  const double h = *config.spacing(level);
  geometry::NodeSet nodes;
  nodes.interior = config.source == NodeSource::Grid ? geometry::generate_grid_nodes(*domain, h)
                                                     : geometry::generate_halton_nodes(*domain, h);
  if (nodes.interior.empty()) throw Error("no interior nodes at spacing " + std::to_string(h));
  nodes.boundary = geometry::project_boundary_nodes(*domain, nodes.interior, h);
  return nodes;
}

StencilBuild build_stencils(const geometry::NodeSet &nodes, const spatial::SpatialIndex &index, const MethodSpec &method,
                            std::optional<double> grid_spacing, bool seven_star, std::size_t level, unsigned threads) {
  const std::size_t n = nodes.interior.size();
  StencilBuild out;
  out.stencils.resize(n);
  std::vector<char> is_star(n, 0);

  auto t0 = Clock::now();
  std::optional<selection::TetNeighborhood> tet;
  if (method.kind == MethodSpec::Kind::Tet) {
    const auto &path = method.meshes.size() == 1 ? method.meshes.front() : method.meshes.at(level);
    const auto mesh = geometry::load_tetmesh(path);
    const auto box = index.points();
    double scale = 1.0;
    for (const Point3 &p : box) scale = std::max({scale, std::abs(p.x), std::abs(p.y), std::abs(p.z)});
    tet.emplace(mesh, index, 1e-9 * scale);
  }
  parallel_for(n, threads, [&](std::size_t i) {
    auto &st = out.stencils[i];
    st.set = {i, {i}};
    try {
      if (seven_star && grid_spacing) {
        if (auto star = selection::select_grid_7star(i, index, *grid_spacing)) {
          st.set = std::move(*star);
          is_star[i] = 1;
          return;
        }
      }
      switch (method.kind) {
      case MethodSpec::Kind::OctDist:
        st.set = selection::select_oct_dist(i, index, method.params);
        break;
      case MethodSpec::Kind::Oct:
        st.set = selection::select_oct(i, index);
        break;
      case MethodSpec::Kind::Knear:
        st.set = selection::select_knear(i, index, method.k);
        break;
      case MethodSpec::Kind::Tet:
        st.set = selection::select_tet(i, *tet);
        break;
      case MethodSpec::Kind::Pqr3:
      case MethodSpec::Kind::Pqr4:
      case MethodSpec::Kind::Pqr4Sel: {
        auto res = selection::select_pqr(i, index, method.kind == MethodSpec::Kind::Pqr3 ? 3 : 4);
        st.set = std::move(res.set);
        st.failure = std::move(res.failure);
        if (method.kind != MethodSpec::Kind::Pqr4Sel) st.weights = std::move(res.weights);
        break;
      }
      }
    } catch (const Error &e) {
      st.failure = e.what();
    }
  });
  out.t_select = seconds_since(t0);

  t0 = Clock::now();
  const bool own_weights = method.kind == MethodSpec::Kind::Pqr3 || method.kind == MethodSpec::Kind::Pqr4;
  const weights::PolyharmonicRbf phi(5);
  parallel_for(n, threads, [&](std::size_t i) {
    auto &st = out.stencils[i];
    if (!st.ok()) return;
    if (is_star[i]) {
      st.weights = weights::classical_7star_weights(*grid_spacing);
      return;
    }
    if (own_weights) return;
    std::vector<Point3> pts(st.set.members.size());
    for (std::size_t j = 0; j < pts.size(); ++j) pts[j] = nodes[st.set.members[j]];
    auto w = weights::compute_rbffd_weights(nodes.interior[i], pts, phi, 3);
    if (w.ok())
      st.weights = std::move(w.values);
    else
      st.failure = std::move(w.failure);
  });
  out.t_weights = seconds_since(t0);
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig &base_config, const RunOptions &options) {
  ExperimentConfig config = base_config;
  if (options.seed) config.seed = *options.seed;
  config.validate();
  for (const auto &f : config.node_files)
    if (!std::filesystem::exists(f)) throw Error("node file not found: " + f.string());
  for (const auto &m : config.methods)
    for (const auto &f : m.meshes)
      if (!std::filesystem::exists(f)) throw Error("tet mesh not found: " + f.string());

  std::optional<geometry::Domain> domain;
  if (config.source != NodeSource::File) domain.emplace(make_domain(config));
  const auto exact = exact_solution(config);
  const auto f = source_term(config);
  const auto g = boundary_values(config);
  const std::size_t levels = config.level_count();
  const std::size_t methods = config.methods.size();
  const bool single = levels * methods == 1;
  const auto log = [&](const std::string &line) {
    if (options.log) *options.log << line << '\n';
  };

  ExperimentResult result;
  result.rows.resize(levels * methods);
  // Solutions extended by boundary values, kept for self-convergence when no
  // exact solution is known.
  std::vector<std::optional<std::vector<double>>> fields(levels * methods);
  std::vector<geometry::NodeSet> level_nodes(exact ? 0 : levels);

  for (std::size_t lv = 0; lv < levels; ++lv) {
    geometry::NodeSet nodes;
    std::string node_failure;
    try {
      nodes = make_nodes(config, domain ? &*domain : nullptr, lv);
    } catch (const ParseError &) {
      throw;
    } catch (const Error &e) {
      if (config.source == NodeSource::File) throw;
      node_failure = e.what();
    }
    std::optional<spatial::SpatialIndex> index;
    if (node_failure.empty()) index.emplace(nodes);
    if (!exact) level_nodes[lv] = nodes;

    for (std::size_t mi = 0; mi < methods; ++mi) {
      const MethodSpec &method = config.methods[mi];
      auto &row = result.rows[lv * methods + mi];
      row.method = method.label;
      row.n_int = nodes.interior.size();
      row.n_bnd = nodes.boundary.size();
      const auto nan = std::numeric_limits<double>::quiet_NaN();
      const auto inf = std::numeric_limits<double>::infinity();
      const auto fail = [&](double sentinel, const std::string &why) {
        row.e_ref = sentinel;
        row.sigma = sentinel;
        log("level " + std::to_string(lv) + " " + method.label + ": " + why);
      };
      row.density = nan;
      if (!node_failure.empty()) {
        fail(nan, node_failure);
        continue;
      }

      const auto spacing = config.source == NodeSource::Grid ? config.spacing(lv) : std::nullopt;
      StencilBuild build;
      try {
        build = build_stencils(nodes, *index, method, spacing, config.seven_star, lv, options.threads);
      } catch (const ParseError &) {
        throw;
      } catch (const Error &e) {
        fail(nan, e.what());
        continue;
      }
      row.k = diagnostics::stencil_stats(build.stencils);
      row.t_select = build.t_select;
      row.t_weights = build.t_weights;
      if (!config.stencils.empty()) {
        auto out = open_output(variant_path(config.stencils, lv, method.label, single));
        write_stencils(out, build.stencils);
      }
      const auto failed = std::find_if(build.stencils.begin(), build.stencils.end(),
                                       [](const auto &st) { return !st.ok(); });
      if (failed != build.stencils.end()) {
        const auto count = std::count_if(build.stencils.begin(), build.stencils.end(),
                                         [](const auto &st) { return !st.ok(); });
        fail(nan, std::to_string(count) + " stencils without weights, first at node " +
                      std::to_string(failed->set.center) + ": " + failed->failure);
        continue;
      }

      auto t0 = Clock::now();
      linsys::LinearProblem problem;
      try {
        problem = linsys::assemble(nodes, build.stencils, f, g);
      } catch (const linsys::AssemblyError &e) {
        fail(nan, e.what());
        continue;
      }
      row.t_assemble = seconds_since(t0);
      row.density = diagnostics::density(problem.A);
      if (!options.export_matrix.empty())
        linsys::save_matrix_market(variant_path(options.export_matrix, lv, method.label, single), problem.A);

      std::vector<double> x;
      t0 = Clock::now();
      try {
        if (config.solver == SolverKind::Direct) {
          const linsys::SparseLuSolver lu(problem.A);
          x = linsys::sparse_lu_solve(problem.A, problem.rhs, &lu);
          row.t_solve = seconds_since(t0);
          row.sigma = config.sigma ? linsys::stability_constant(lu) : nan;
        } else {
          auto it = linsys::solve_bicgstab_ilu_rcm(problem.A, problem.rhs, config.bicgstab);
          row.t_solve = seconds_since(t0);
          row.iterations = it.report.iterations;
          if (!it.preconditioned) log("level " + std::to_string(lv) + " " + method.label + ": ILU(0) failed, unpreconditioned");
          if (!it.report.converged)
            log("level " + std::to_string(lv) + " " + method.label + ": BiCGSTAB stopped at relative residual " +
                diagnostics::format_number(it.report.relative_residual));
          x = std::move(it.x);
          row.sigma = nan;
          if (config.sigma) {
            try {
              row.sigma = linsys::stability_constant(linsys::SparseLuSolver(problem.A));
            } catch (const SingularMatrixError &) {
              row.sigma = inf;
            }
          }
        }
      } catch (const SingularMatrixError &e) {
        fail(inf, e.what());
        continue;
      }

      if (exact) {
        row.e_ref = diagnostics::evaluate_solution(nodes, x, *exact);
      } else {
        std::vector<double> field = x;
        for (const Point3 &p : nodes.boundary) field.push_back(g(p));
        fields[lv * methods + mi] = std::move(field);
      }
      log("level " + std::to_string(lv) + " " + method.label + ": N_int=" + std::to_string(row.n_int) +
          " E_ref=" + (exact ? diagnostics::format_number(row.e_ref) : std::string("pending")));
    }
  }

  if (!exact) {
    // E_ref against the finest level of the same method.
    const std::size_t fine = levels - 1;
    for (std::size_t mi = 0; mi < methods; ++mi) {
      const auto &ref = fields[fine * methods + mi];
      for (std::size_t lv = 0; lv < levels; ++lv) {
        auto &row = result.rows[lv * methods + mi];
        const auto &sol = fields[lv * methods + mi];
        if (!sol) continue; // keeps its NaN/Inf sentinel
        if (lv == fine || !ref) {
          row.has_reference = false;
          continue;
        }
        const auto &nodes = level_nodes[lv];
        row.e_ref = diagnostics::self_convergence_error(
            nodes, std::span<const double>(*sol).first(nodes.interior.size()), level_nodes[fine], *ref);
      }
    }
  }

  if (!config.timings)
    for (auto &row : result.rows) row.t_select = row.t_weights = row.t_assemble = row.t_solve = 0.0;

  const std::size_t fine = levels - 1;
  for (std::size_t mi = 0; mi < methods; ++mi) {
    const double fine_density = result.rows[fine * methods + mi].density;
    for (std::size_t lv = 0; lv < levels; ++lv) {
      const auto &row = result.rows[lv * methods + mi];
      if (!row.has_reference) continue;
      result.plot.push_back({row.method, static_cast<double>(row.n_int) * fine_density, row.e_ref});
    }
  }

  if (!config.csv.empty()) {
    auto out = open_output(config.csv);
    write_csv(out, result);
  }
  if (!config.plot.empty()) {
    auto out = open_output(config.plot);
    write_plot(out, result);
  }
  return result;
}

void write_csv(std::ostream &out, const ExperimentResult &result) {
  out << diagnostics::csv_header() << '\n';
  for (const auto &row : result.rows) out << diagnostics::csv_row(row) << '\n';
}

void write_plot(std::ostream &out, const ExperimentResult &result) {
  out << "method,nominal_nnz,E_ref\n";
  for (const auto &p : result.plot)
    out << p.method << ',' << diagnostics::format_number(p.nominal_nnz) << ','
        << diagnostics::format_number(p.e_ref) << '\n';
}

void write_stencils(std::ostream &out, std::span<const linsys::WeightedStencil> stencils) {
  for (const auto &st : stencils) {
    out << st.set.center << ' ' << st.set.size();
    for (std::size_t m : st.set.members) out << ' ' << m;
    for (std::size_t j = 0; j < st.set.size(); ++j) {
      out << ' ';
      if (j < st.weights.size())
        write_double(out, st.weights[j]);
      else
        out << "NaN";
    }
    out << '\n';
  }
}

} // namespace mfd3d::experiment
