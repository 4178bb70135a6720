#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "kirchhoff/constants.hpp"
#include "kirchhoff/energy.hpp"
#include "kirchhoff/radial.hpp"

namespace kirchhoff {

enum class SolveMethod { descent, fixed_point, multistart };
enum class SolveStatus { converged, max_iterations, unbounded_below, diverged, stalled };

std::string to_string(SolveMethod method);
std::string to_string(SolveStatus status);
SolveMethod parse_solve_method(const std::string& name);

struct ArmijoParams {
  double c1 = 1e-4;
  double backtrack = 0.5;
};

struct SolverConfig {
  double tol = 1e-8;  ///< tolerance on the dual norm of the gradient
  std::size_t max_iter = 10000;
  ArmijoParams line_search;
  std::size_t starts = 10;
  std::uint64_t seed = 1234567;
  /// Descent aborts once the energy falls below this value.
  double unbounded_threshold = -1e12;

  friend bool operator==(const SolverConfig& x, const SolverConfig& y) {
    return x.tol == y.tol && x.max_iter == y.max_iter && x.line_search.c1 == y.line_search.c1 &&
           x.line_search.backtrack == y.line_search.backtrack && x.starts == y.starts &&
           x.seed == y.seed && x.unbounded_threshold == y.unbounded_threshold;
  }
};

/// Throws ValidationError unless tol > 0, 0 < c1 < 1 and 0 < backtrack < 1.
void validate(const SolverConfig& cfg);

struct SolveResult {
  RadialField field;
  double residual = 0.0;  ///< dual norm of dE(field)
  EnergyBreakdown energy;
  std::size_t iterations = 0;
  bool converged = false;
  SolveMethod method = SolveMethod::descent;
  SolveStatus status = SolveStatus::max_iterations;
  /// Energy after every step accepted by the Armijo test (first entry is
  /// the initial energy).
  std::vector<double> energy_history;
  std::vector<std::string> diagnostics;
};

/// Armijo descent along the H^1_0 Riesz gradient of the energy.
///
/// Once the predicted Armijo decrease drops below the rounding level of the
/// energy, the remaining digits of the residual are removed by Newton
/// steps accepted on residual decrease. The descent aborts with status
/// unbounded_below when the energy drops below cfg.unbounded_threshold.
SolveResult minimize(const KirchhoffParams& params, const PerturbationSpec& pert,
                     const GridPtr& grid, const SolverConfig& cfg,
                     std::optional<RadialField> initial = std::nullopt);

/// Kirchhoff fixed-point iteration for the source problem:
///   (a + b ||u_k||^2) K u_{k+1} = |u_k|^{2*-2} u_k + h.
/// Stops when ||u_{k+1} - u_k|| <= tol; converged iff the nonlinear residual
/// is then <= 10 tol. Oscillation triggers one restart with damping 0.5.
/// Throws ValidationError if pert carries lambda or mu terms.
SolveResult fixed_point_solve(const KirchhoffParams& params, const PerturbationSpec& pert,
                              const GridPtr& grid, const SolverConfig& cfg,
                              std::optional<RadialField> initial = std::nullopt);

struct UniquenessReport {
  std::vector<SolveResult> solutions;  ///< one per start, in start order
  double spread = 0.0;                 ///< max pairwise H^1 distance
  double max_norm = 0.0;
  bool asserted = false;  ///< true iff the regime is strictly convex
  bool unique = false;    ///< spread <= 1e-5 (1 + max_norm)
};

/// Minimizes from cfg.starts Gaussian random fields (magnitudes cycling
/// through 0.1, 1, 10). Throws SolverError if any start fails to converge.
UniquenessReport uniqueness_probe(const KirchhoffParams& params, const PerturbationSpec& pert,
                                  const GridPtr& grid, const SolverConfig& cfg);

/// a-priori radius (lambda S_4^{2-p/2} |Omega|^{1-p/4} / (b S_4^2 - 1))^{1/(4-p)}
/// of the solutions at d = 4 on a ball of the given radius.
double apriori_bound(const KirchhoffParams& params, double lambda, double p, double radius);

struct AprioriCheck {
  double bound = 0.0;
  double norm = 0.0;
  bool satisfied = false;  ///< norm <= bound (1 + 1e-6)
};

/// Throws DomainError unless d = 4, b S_4^2 > 1, p in (2, 4) and the
/// solution converged.
AprioriCheck apriori_check(const SolveResult& solution, const KirchhoffParams& params,
                           double lambda, double p);

struct ContinuationRow {
  double lambda = 0.0;
  double bound = 0.0;
  double norm = 0.0;
  bool converged = false;
};

/// Follows a solution branch of the power problem through the given lambda
/// values, warm-starting each solve from the previous one.
std::vector<ContinuationRow> apriori_continuation(const KirchhoffParams& params, double p,
                                                  const std::vector<double>& lambdas,
                                                  const GridPtr& grid, const SolverConfig& cfg,
                                                  RadialField start);

/// Descent from diverse starts plus deflated Newton iterations that are
/// repelled from the critical points already found. Every returned field
/// has residual <= cfg.tol; fields closer than 1e-3 in H^1 are merged.
std::vector<SolveResult> multistart_search(const KirchhoffParams& params,
                                           const PerturbationSpec& pert, const GridPtr& grid,
                                           const SolverConfig& cfg);

/// Field with independent N(0, scale^2) nodal values.
RadialField gaussian_field(const GridPtr& grid, std::mt19937_64& rng, double scale);

/// Random combination of the first few radial modes cos((k + 1/2) pi r / R).
RadialField smooth_random_field(const GridPtr& grid, std::mt19937_64& rng, double scale);

/// height * ((w^2 + r^2)^{-(d-2)/2} - (w^2 + R^2)^{-(d-2)/2}) w^{d-2}.
RadialField scaled_bubble(const GridPtr& grid, double width, double height);

struct EnergyWitness {
  RadialField field;
  double width = 0.0;
  double height = 0.0;
  double energy = 0.0;
};

/// Scans bubble widths and heights for a field with negative pure
/// Kirchhoff energy. Empty if none is found.
std::optional<EnergyWitness> find_negative_energy_witness(const KirchhoffParams& params,
                                                          const GridPtr& grid);

}  // namespace kirchhoff
