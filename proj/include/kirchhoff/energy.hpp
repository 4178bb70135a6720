#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kirchhoff/constants.hpp"
#include "kirchhoff/radial.hpp"

namespace kirchhoff {

/// A subcritical perturbation g with the declared growth bound
/// |g(t)| <= M (1 + |t|^{q-1}), 1 < q < 2*.
struct GTerm {
  std::string name;
  std::function<double(double)> fn;
  double growth = 2.0;  ///< q
  double bound = 1.0;   ///< M
};

/// Built-in g selectors: "sin", "atan", "power" (|t|^{q-2} t) and
/// "tanh". Throws ValidationError for an unknown name.
GTerm make_g_term(const std::string& name, double growth = 2.0, double bound = 1.0);

/// Perturbations of the pure Kirchhoff energy:
///   - integral h u                     (source h > 0)
///   - lambda integral |u|^p / p        (power nonlinearity f = |t|^{p-2} t)
///   - mu integral G(u), G' = g         (class-A perturbation)
struct PerturbationSpec {
  std::optional<RadialProfile> source;
  double lambda = 0.0;
  double power = 3.0;
  double mu = 0.0;
  std::optional<GTerm> g;
};

/// Throws ValidationError on hard violations (nonpositive h, p outside
/// (2, 2*), negative lambda or mu, ...). Returns best-effort warnings from
/// sampling the declared class-A bound of g.
std::vector<std::string> validate(const PerturbationSpec& pert, Dimension d);

struct EnergyBreakdown {
  double quad = 0.0;     ///< a/2 ||u||^2
  double quart = 0.0;    ///< b/4 ||u||^4
  double crit = 0.0;     ///< ||u||_{2*}^{2*} / 2*
  double poisson = 0.0;  ///< integral h u
  double subcrit = 0.0;  ///< lambda integral |u|^p / p
  double pert = 0.0;     ///< mu integral G(u)
  double total = 0.0;

  friend bool operator==(const EnergyBreakdown&, const EnergyBreakdown&) = default;
};

EnergyBreakdown energy(const RadialField& u, const KirchhoffParams& params,
                       const PerturbationSpec& pert = {});

/// G(t) = integral_0^t g(s) ds by adaptive Gauss-Kronrod quadrature
/// (relative tolerance 1e-10). Throws SolverError if the result is not finite.
double g_primitive(const GTerm& g, double t);

/// dE(u)[phi_i] on the free hat functions.
std::vector<double> dual_gradient(const RadialField& u, const KirchhoffParams& params,
                                  const PerturbationSpec& pert = {});

struct Gradient {
  std::vector<double> dual;  ///< dE(u)[phi_i]
  RadialField riesz;         ///< H^1_0 Riesz representative
  double residual = 0.0;     ///< dual norm = ||riesz||
};

Gradient gradient(const RadialField& u, const KirchhoffParams& params,
                  const PerturbationSpec& pert = {});

/// dE(u)[v]
double directional_derivative(const RadialField& u, const RadialField& v,
                              const KirchhoffParams& params, const PerturbationSpec& pert = {});

/// <E''(u) v, v>. The source term is linear and drops out; the power and
/// g terms are included (g' by central differences).
double second_form(const RadialField& u, const RadialField& v, const KirchhoffParams& params,
                   const PerturbationSpec& pert = {});

/// Discrete Hessian E''(u) on the free nodes: a tridiagonal part plus the
/// rank-one Kirchhoff coupling 2b (Ku)(Ku)^T.
class Hessian {
 public:
  Hessian(const RadialField& u, const KirchhoffParams& params, const PerturbationSpec& pert = {});

  std::vector<double> apply(std::span<const double> v) const;
  /// Sherman-Morrison on top of a pivoted tridiagonal solve. Throws
  /// SolverError when the matrix is (numerically) singular.
  std::vector<double> solve(std::span<const double> rhs) const;

 private:
  Tridiagonal base_;
  std::vector<double> coupling_;  // K u
  double coupling_weight_ = 0.0;  // 2b
};

}  // namespace kirchhoff
