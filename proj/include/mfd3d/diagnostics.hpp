#pragma once

#include "mfd3d/geometry.hpp"
#include "mfd3d/linsys.hpp"

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace mfd3d::diagnostics {

/// ||ref - approx||_2 / ||ref||_2. NaN or Inf entries in `approx` propagate.
double rrms(std::span<const double> reference, std::span<const double> approx);

/// Stored nonzeros per row.
double density(const linsys::SparseMatrix &A);

/// Least-squares slope of log E against log N^(-1/3) over (N_int, E) pairs.
double convergence_order(std::span<const std::pair<double, double>> levels);

/// RRMS of exact(interior node) versus the solution.
double evaluate_solution(const geometry::NodeSet &nodes, std::span<const double> solution,
                         const linsys::ScalarField &exact);

/// RRMS between a solution and a reference solution on another node set.
/// Each interior node of `nodes` takes the value at the nearest node of
/// `reference_nodes`; `reference_values` covers all of them, interior first.
double self_convergence_error(const geometry::NodeSet &nodes, std::span<const double> solution,
                              const geometry::NodeSet &reference_nodes, std::span<const double> reference_values);

struct StencilStats {
  std::size_t min = 0;
  double mean = 0.0;
  std::size_t max = 0;
};

StencilStats stencil_stats(std::span<const linsys::WeightedStencil> stencils);

struct SolveReport {
  std::string method;
  std::size_t n_int = 0;
  std::size_t n_bnd = 0;
  /// NaN when weights failed, Inf when the system was singular.
  double e_ref = 0.0;
  /// False when no reference solution exists; E_ref is then written as NA.
  bool has_reference = true;
  double density = 0.0;
  double sigma = 0.0;
  std::optional<double> iterations;
  StencilStats k;
  double t_select = 0.0;
  double t_weights = 0.0;
  double t_assemble = 0.0;
  double t_solve = 0.0;
};

std::string csv_header();
std::string csv_row(const SolveReport &report);

/// Shortest round-tripping decimal, or the literals NaN, Inf, -Inf.
std::string format_number(double v);

} // namespace mfd3d::diagnostics
