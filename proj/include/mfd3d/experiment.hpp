#pragma once

#include "mfd3d/diagnostics.hpp"
#include "mfd3d/geometry.hpp"
#include "mfd3d/linsys.hpp"
#include "mfd3d/selection.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace mfd3d::experiment {

struct DomainSpec {
  enum class Kind { Ball, Stl };
  Kind kind = Kind::Ball;
  Point3 center{0, 0, 0};
  double radius = 1.0;
  std::filesystem::path stl;
};

enum class NodeSource { Grid, Halton, File };

struct MethodSpec {
  enum class Kind { OctDist, Oct, Knear, Tet, Pqr3, Pqr4, Pqr4Sel };
  Kind kind = Kind::OctDist;
  /// Token as written in the config, e.g. "oct-dist:k=18:delta=0.7".
  std::string label;
  selection::SelectionParams params;
  std::size_t k = 20;
  /// TetMesh file per level for `tet` (one entry reused for every level).
  std::vector<std::filesystem::path> meshes;
};

/// Parses one method token: oct-dist[:key=value...], oct, knear:K, tet:FILE[|FILE...], pqr3, pqr4, pqr4sel.
MethodSpec parse_method(const std::string &token);

struct ProblemSpec {
  enum class Kind { BallExp, Const };
  Kind kind = Kind::BallExp;
  double c = -10.0;
};

/// Parses `ball-exp` or `const:C`.
ProblemSpec parse_problem(const std::string &text);

enum class SolverKind { Direct, Bicgstab };

struct ExperimentConfig {
  std::string name = "experiment";
  std::uint64_t seed = 1;
  DomainSpec domain;

  NodeSource source = NodeSource::Grid;
  /// Spacing schedule h_i = 0.9 H0 2^(-i/3), i = level_min..level_max, unless
  /// `spacings` lists the values explicitly.
  double h0 = 0.25;
  int level_min = 0;
  int level_max = 0;
  std::vector<double> spacings;
  std::vector<std::filesystem::path> node_files;

  std::vector<MethodSpec> methods;
  /// Use the classical 7-point star wherever all six grid neighbors are interior.
  bool seven_star = true;

  ProblemSpec problem;

  SolverKind solver = SolverKind::Direct;
  linsys::BicgstabOptions bicgstab;
  bool sigma = true;

  std::filesystem::path csv;
  std::filesystem::path plot;
  std::filesystem::path stencils;
  /// Prefix for node files written by `mfd3d nodes`.
  std::filesystem::path nodes_out;
  bool timings = true;

  std::size_t level_count() const;
  /// Spacing of level position `i` (0-based within the sweep); node files have none.
  std::optional<double> spacing(std::size_t i) const;
  /// Throws Error on inconsistent settings.
  void validate() const;
};

/// Reads the INI config; relative paths resolve against the config's directory.
ExperimentConfig load_config(const std::filesystem::path &path);
ExperimentConfig parse_config(std::istream &in, const std::filesystem::path &base_dir = {});

struct RunOptions {
  unsigned threads = 1;
  std::optional<std::uint64_t> seed;
  std::filesystem::path export_matrix;
  std::ostream *log = nullptr;
};

struct PlotPoint {
  std::string method;
  double nominal_nnz;
  double e_ref;
};

struct ExperimentResult {
  std::vector<diagnostics::SolveReport> rows;
  std::vector<PlotPoint> plot;
};

/// Exact solution of the configured problem, when one is known.
std::optional<linsys::ScalarField> exact_solution(const ExperimentConfig &config);
linsys::ScalarField source_term(const ExperimentConfig &config);
linsys::ScalarField boundary_values(const ExperimentConfig &config);

geometry::Domain make_domain(const ExperimentConfig &config);
/// Interior and projected boundary nodes of sweep position `level`.
geometry::NodeSet make_nodes(const ExperimentConfig &config, const geometry::Domain *domain, std::size_t level);

/// Stencils and weights for every interior node, computed on `threads` workers.
struct StencilBuild {
  std::vector<linsys::WeightedStencil> stencils;
  double t_select = 0.0;
  double t_weights = 0.0;
};
StencilBuild build_stencils(const geometry::NodeSet &nodes, const spatial::SpatialIndex &index, const MethodSpec &method,
                            std::optional<double> grid_spacing, bool seven_star, std::size_t level, unsigned threads);

/// Runs every level and method. Numerical failures become NaN (weights) or
/// Inf (singular system) rows; configuration and file errors throw.
ExperimentResult run_experiment(const ExperimentConfig &config, const RunOptions &options = {});

void write_csv(std::ostream &out, const ExperimentResult &result);
void write_plot(std::ostream &out, const ExperimentResult &result);
/// `center k members... weights...` per stencil.
void write_stencils(std::ostream &out, std::span<const linsys::WeightedStencil> stencils);

} // namespace mfd3d::experiment
