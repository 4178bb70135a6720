#include "kirchhoff/energy.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

#include "kirchhoff/errors.hpp"

namespace kirchhoff {

namespace {

double signed_power(double t, double exponent) {
  // |t|^{exponent-1} t
  return t == 0.0 ? 0.0 : std::pow(std::abs(t), exponent) * (t > 0.0 ? 1.0 : -1.0);
}

double g_derivative(const GTerm& g, double t) {
  const double h = 1e-6 * std::max(1.0, std::abs(t));
  return (g.fn(t + h) - g.fn(t - h)) / (2.0 * h);
}

// Visits every quadrature point with (element, weight, left shape, u, h).
template <class Visit>
void for_each_point(const RadialField& u, const PerturbationSpec& pert, Visit&& visit) {
  const auto& grid = u.grid();
  const auto w = grid.quadrature_weights();
  const auto shape = grid.quadrature_left_shape();
  const auto vals = u.values();
  const RadialProfile* src = pert.source ? &*pert.source : nullptr;
  for (std::size_t e = 0; e < grid.elements(); ++e) {
    for (std::size_t q = 0; q < RadialGrid::kGaussPoints; ++q) {
      const std::size_t k = e * RadialGrid::kGaussPoints + q;
      const double s = shape[k];
      const double uq = s * vals[e] + (1.0 - s) * vals[e + 1];
      const double hq = src ? src->at_quadrature(e, q) : 0.0;
      visit(e, w[k], s, uq, hq);
    }
  }
}

void require_source_grid(const RadialField& u, const PerturbationSpec& pert) {
  if (pert.source && pert.source->grid != u.grid_ptr() && !(*pert.source->grid == u.grid())) {
    throw ValidationError("source term h lives on a different grid than the field");
  }
}

}  // namespace

GTerm make_g_term(const std::string& name, double growth, double bound) {
  if (name == "sin") return {name, [](double t) { return std::sin(t); }, growth, bound};
  if (name == "atan") return {name, [](double t) { return std::atan(t); }, growth, bound};
  if (name == "tanh") return {name, [](double t) { return std::tanh(t); }, growth, bound};
  if (name == "power") {
    return {name, [growth](double t) { return signed_power(t, growth - 1.0); }, growth, bound};
  }
  throw ValidationError("unknown g selector '" + name + "' (expected sin, atan, tanh or power)");
}

std::vector<std::string> validate(const PerturbationSpec& pert, Dimension d) {
  const double crit = d.critical_exponent();
  if (!(pert.lambda >= 0.0) || !std::isfinite(pert.lambda)) {
    throw ValidationError("lambda must be a finite nonnegative number");
  }
  if (!(pert.mu >= 0.0) || !std::isfinite(pert.mu)) {
    throw ValidationError("mu must be a finite nonnegative number");
  }
  if (pert.lambda > 0.0 && !(pert.power > 2.0 && pert.power < crit)) {
    throw ValidationError(fmt::format("power p must lie in (2, 2*) = (2, {:.6g})", crit));
  }
  if (pert.source) {
    if (!pert.source->grid || pert.source->values.size() != pert.source->grid->nodes_count()) {
      throw ValidationError("source term h does not match its grid");
    }
    for (double v : pert.source->values) {
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw ValidationError("source term h must be positive at every node");
      }
    }
  }
  std::vector<std::string> warnings;
  if (pert.g) {
    const auto& g = *pert.g;
    if (!g.fn) throw ValidationError("g term has no function");
    if (!(g.growth > 1.0 && g.growth < crit)) {
      throw ValidationError(fmt::format("g growth exponent q must lie in (1, 2*) = (1, {:.6g})", crit));
    }
    if (!(g.bound > 0.0)) throw ValidationError("g bound M must be positive");
    for (int i = -300; i <= 300; ++i) {
      const double t = (i < 0 ? -1.0 : 1.0) * std::pow(10.0, std::abs(i) / 100.0 - 3.0);
      const double envelope = g.bound * (1.0 + std::pow(std::abs(t), g.growth - 1.0));
      if (std::abs(g.fn(t)) > envelope * (1.0 + 1e-12)) {
        warnings.push_back(fmt::format("g '{}' exceeds its declared bound M(1+|t|^(q-1)) at t = {:.6g}",
                                       g.name, t));
        break;
      }
    }
  }
  return warnings;
}

double g_primitive(const GTerm& g, double t) {
  if (t == 0.0) return 0.0;
  using Integrator = boost::math::quadrature::gauss_kronrod<double, 15>;
  const double value = Integrator::integrate(g.fn, 0.0, t, 15, 1e-10);
  if (!std::isfinite(value)) throw SolverError("quadrature of g failed at t = " + std::to_string(t));
  return value;
}

EnergyBreakdown energy(const RadialField& u, const KirchhoffParams& params,
                       const PerturbationSpec& pert) {
  require_source_grid(u, pert);
  const double crit = u.grid().dimension().critical_exponent();
  const double n2 = h1_inner(u, u);
  double crit_sum = 0.0, source_sum = 0.0, power_sum = 0.0, g_sum = 0.0;
  const bool with_power = pert.lambda != 0.0;
  const bool with_g = pert.mu != 0.0 && pert.g;
  for_each_point(u, pert, [&](std::size_t, double w, double, double uq, double hq) {
    const double au = std::abs(uq);
    crit_sum += w * std::pow(au, crit);
    source_sum += w * hq * uq;
    if (with_power) power_sum += w * std::pow(au, pert.power);
    if (with_g) g_sum += w * g_primitive(*pert.g, uq);
  });
  EnergyBreakdown e;
  e.quad = 0.5 * params.a * n2;
  e.quart = 0.25 * params.b * n2 * n2;
  e.crit = crit_sum / crit;
  e.poisson = source_sum;
  e.subcrit = with_power ? pert.lambda * power_sum / pert.power : 0.0;
  e.pert = with_g ? pert.mu * g_sum : 0.0;
  e.total = e.quad + e.quart - e.crit - e.poisson - e.subcrit - e.pert;
  return e;
}

std::vector<double> dual_gradient(const RadialField& u, const KirchhoffParams& params,
                                  const PerturbationSpec& pert) {
  require_source_grid(u, pert);
  const auto& grid = u.grid();
  const double crit = grid.dimension().critical_exponent();
  const double coeff = params.a + params.b * h1_inner(u, u);
  std::vector<double> out = grid.stiffness().apply(u.free_values());
  for (double& v : out) v *= coeff;
  const bool with_power = pert.lambda != 0.0;
  const bool with_g = pert.mu != 0.0 && pert.g;
  const std::size_t n = grid.elements();
  for_each_point(u, pert, [&](std::size_t e, double w, double s, double uq, double hq) {
    double f = signed_power(uq, crit - 1.0) + hq;
    if (with_power) f += pert.lambda * signed_power(uq, pert.power - 1.0);
    if (with_g) f += pert.mu * pert.g->fn(uq);
    const double val = w * f;
    out[e] -= val * s;
    if (e + 1 < n) out[e + 1] -= val * (1.0 - s);
  });
  return out;
}

Gradient gradient(const RadialField& u, const KirchhoffParams& params, const PerturbationSpec& pert) {
  auto dual = dual_gradient(u, params, pert);
  auto riesz = riesz_representative(u.grid_ptr(), dual);
  double s = 0.0;
  for (std::size_t i = 0; i < dual.size(); ++i) s += dual[i] * riesz[i];
  return Gradient{std::move(dual), std::move(riesz), std::sqrt(std::max(0.0, s))};
}

double directional_derivative(const RadialField& u, const RadialField& v,
                              const KirchhoffParams& params, const PerturbationSpec& pert) {
  require_same_grid(u, v);
  const auto dual = dual_gradient(u, params, pert);
  const auto vals = v.free_values();
  double s = 0.0;
  for (std::size_t i = 0; i < dual.size(); ++i) s += dual[i] * vals[i];
  return s;
}

double second_form(const RadialField& u, const RadialField& v, const KirchhoffParams& params,
                   const PerturbationSpec& pert) {
  require_same_grid(u, v);
  const double crit = u.grid().dimension().critical_exponent();
  const double uu = h1_inner(u, u);
  const double vv = h1_inner(v, v);
  const double uv = h1_inner(u, v);
  const bool with_power = pert.lambda != 0.0;
  const bool with_g = pert.mu != 0.0 && pert.g;
  const auto vvals = v.values();
  double curvature = 0.0;
  for_each_point(u, pert, [&](std::size_t e, double w, double s, double uq, double) {
    const double vq = s * vvals[e] + (1.0 - s) * vvals[e + 1];
    const double au = std::abs(uq);
    double c = (crit - 1.0) * std::pow(au, crit - 2.0);
    if (with_power) c += pert.lambda * (pert.power - 1.0) * std::pow(au, pert.power - 2.0);
    if (with_g) c += pert.mu * g_derivative(*pert.g, uq);
    curvature += w * c * vq * vq;
  });
  return params.a * vv + params.b * uu * vv + 2.0 * params.b * uv * uv - curvature;
}

Hessian::Hessian(const RadialField& u, const KirchhoffParams& params, const PerturbationSpec& pert) {
  require_source_grid(u, pert);
  const auto& grid = u.grid();
  const double crit = grid.dimension().critical_exponent();
  const double coeff = params.a + params.b * h1_inner(u, u);
  const bool with_power = pert.lambda != 0.0;
  const bool with_g = pert.mu != 0.0 && pert.g;
  const Tridiagonal curvature = weighted_mass(u, [&](double t) {
    const double at = std::abs(t);
    double c = (crit - 1.0) * std::pow(at, crit - 2.0);
    if (with_power) c += pert.lambda * (pert.power - 1.0) * std::pow(at, pert.power - 2.0);
    if (with_g) c += pert.mu * g_derivative(*pert.g, t);
    return c;
  });
  const Tridiagonal& k = grid.stiffness();
  base_ = Tridiagonal(k.size());
  for (std::size_t i = 0; i < k.size(); ++i) base_.diag[i] = coeff * k.diag[i] - curvature.diag[i];
  for (std::size_t i = 0; i + 1 < k.size(); ++i) {
    base_.upper[i] = coeff * k.upper[i] - curvature.upper[i];
    base_.lower[i] = coeff * k.lower[i] - curvature.lower[i];
  }
  coupling_ = k.apply(u.free_values());
  coupling_weight_ = 2.0 * params.b;
}

std::vector<double> Hessian::apply(std::span<const double> v) const {
  auto out = base_.apply(v);
  double dot = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) dot += coupling_[i] * v[i];
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += coupling_weight_ * dot * coupling_[i];
  return out;
}

std::vector<double> Hessian::solve(std::span<const double> rhs) const {
  auto x = base_.solve(rhs);
  const auto y = base_.solve(coupling_);
  double wx = 0.0, wy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    wx += coupling_[i] * x[i];
    wy += coupling_[i] * y[i];
  }
  const double denom = 1.0 + coupling_weight_ * wy;
  if (!(std::abs(denom) > 1e-14) || !std::isfinite(denom)) {
    throw SolverError("Hessian is singular along the Kirchhoff coupling direction");
  }
  const double factor = coupling_weight_ * wx / denom;
  for (std::size_t i = 0; i < x.size(); ++i) x[i] -= factor * y[i];
  for (double v : x) {
    if (!std::isfinite(v)) throw SolverError("Hessian solve produced non-finite values");
  }
  return x;
}

}  // namespace kirchhoff
