#include "mfd3d/diagnostics.hpp"
#include "mfd3d/spatial.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

namespace mfd3d::diagnostics {

double rrms(std::span<const double> reference, std::span<const double> approx) {
  if (reference.size() != approx.size()) throw Error("rrms: vectors differ in length");
  if (reference.empty()) throw Error("rrms: empty vectors");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double d = reference[i] - approx[i];
    num += d * d;
    den += reference[i] * reference[i];
  }
  if (den == 0.0) throw Error("rrms: reference has zero norm");
  return std::sqrt(num / den);
}

double density(const linsys::SparseMatrix &A) {
  if (A.n == 0) throw Error("density of an empty matrix");
  return static_cast<double>(A.nnz()) / static_cast<double>(A.n);
}

double convergence_order(std::span<const std::pair<double, double>> levels) {
  if (levels.size() < 3) throw Error("convergence order needs at least 3 levels");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto &[n, e] : levels) {
    if (!(n > 0.0) || !(e > 0.0) || !std::isfinite(e)) throw Error("convergence order needs positive finite errors");
    const double x = -std::log(n) / 3.0;
    const double y = std::log(e);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double m = static_cast<double>(levels.size());
  const double den = m * sxx - sx * sx;
  if (den == 0.0) throw Error("convergence order needs distinct node counts");
  return (m * sxy - sx * sy) / den;
}

double evaluate_solution(const geometry::NodeSet &nodes, std::span<const double> solution,
                         const linsys::ScalarField &exact) {
  if (solution.size() != nodes.interior.size()) throw Error("solution length does not match the interior nodes");
  std::vector<double> ref(nodes.interior.size());
  for (std::size_t i = 0; i < ref.size(); ++i) ref[i] = exact(nodes.interior[i]);
  return rrms(ref, solution);
}

double self_convergence_error(const geometry::NodeSet &nodes, std::span<const double> solution,
                              const geometry::NodeSet &reference_nodes, std::span<const double> reference_values) {
  if (solution.size() != nodes.interior.size()) throw Error("solution length does not match the interior nodes");
  if (reference_values.size() != reference_nodes.size())
    throw Error("reference values do not match the reference nodes");
  const spatial::SpatialIndex index(reference_nodes);
  std::vector<double> ref(solution.size());
  for (std::size_t i = 0; i < ref.size(); ++i)
    ref[i] = reference_values[index.k_nearest(nodes.interior[i], 1).front().index];
  return rrms(ref, solution);
}

StencilStats stencil_stats(std::span<const linsys::WeightedStencil> stencils) {
  StencilStats s;
  if (stencils.empty()) return s;
  s.min = std::numeric_limits<std::size_t>::max();
  double sum = 0.0;
  for (const auto &st : stencils) {
    const std::size_t k = st.set.size();
    s.min = std::min(s.min, k);
    s.max = std::max(s.max, k);
    sum += static_cast<double>(k);
  }
  s.mean = sum / static_cast<double>(stencils.size());
  return s;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "NaN";
  if (std::isinf(v)) return v > 0 ? "Inf" : "-Inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

std::string csv_header() {
  return "method,N_int,N_bnd,E_ref,density,sigma,iters,k_min,k_mean,k_max,t_select,t_weights,t_assemble,t_solve";
}

std::string csv_row(const SolveReport &r) {
  std::string out = r.method;
  const auto field = [&](const std::string &s) {
    out += ',';
    out += s;
  };
  field(std::to_string(r.n_int));
  field(std::to_string(r.n_bnd));
  field(r.has_reference ? format_number(r.e_ref) : std::string("NA"));
  field(format_number(r.density));
  field(format_number(r.sigma));
  field(r.iterations ? format_number(*r.iterations) : std::string{});
  field(std::to_string(r.k.min));
  field(format_number(r.k.mean));
  field(std::to_string(r.k.max));
  field(format_number(r.t_select));
  field(format_number(r.t_weights));
  field(format_number(r.t_assemble));
  field(format_number(r.t_solve));
  return out;
}

} // namespace mfd3d::diagnostics
