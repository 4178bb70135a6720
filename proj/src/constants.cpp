#include "kirchhoff/constants.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "kirchhoff/errors.hpp"

namespace kirchhoff {

namespace {

void require_real_dimension(double d_real) {
  if (!(d_real >= 4.0) || !std::isfinite(d_real)) {
    throw DomainError("dimension must be >= 4, got " + std::to_string(d_real));
  }
}

// The d > 4 branch, evaluated in log space so that d up to a few hundred
// stays finite.
SharpConstants higher_dimensional(double d, double omega, double sobolev) {
  const double log_s = std::log(sobolev);
  const double common = 0.5 * (d - 4.0) * std::log(d - 4.0) - 0.5 * d * log_s;
  SharpConstants c;
  c.omega = omega;
  c.sobolev = sobolev;
  c.lsc = std::exp(std::log(4.0) + common - 0.5 * (d - 2.0) * std::log(d));
  c.ps = std::exp(std::log(2.0) + common - 0.5 * (d - 2.0) * std::log(d - 2.0));
  c.convex = std::exp(std::log(2.0) + common + 0.5 * (d - 2.0) * std::log(d + 2.0) -
                      (d - 2.0) * std::log(d - 2.0));
  return c;
}

}  // namespace

Dimension::Dimension(int d) : d_(d) {
  if (d < 4) {
    throw DomainError("dimension must be an integer >= 4, got " + std::to_string(d));
  }
}

void validate(const KirchhoffParams& params) {
  if (!(params.a > 0.0) || !std::isfinite(params.a)) {
    throw DomainError("coefficient a must be positive and finite");
  }
  if (!(params.b > 0.0) || !std::isfinite(params.b)) {
    throw DomainError("coefficient b must be positive and finite");
  }
}

double unit_ball_volume_real(double d_real) {
  require_real_dimension(d_real);
  return std::pow(std::numbers::pi, 0.5 * d_real) / std::tgamma(0.5 * d_real + 1.0);
}

double sobolev_constant_real(double d_real) {
  require_real_dimension(d_real);
  return 0.25 * d_real * (d_real - 2.0) * std::pow(unit_ball_volume_real(d_real), 2.0 / d_real);
}

SharpConstants sharp_constants_real(double d_real) {
  require_real_dimension(d_real);
  if (!(d_real > 4.0)) {
    throw DomainError("real-dimension constants need d > 4; use the integer d = 4 branch");
  }
  return higher_dimensional(d_real, unit_ball_volume_real(d_real), sobolev_constant_real(d_real));
}

double unit_ball_volume(Dimension d) { return unit_ball_volume_real(d.value()); }

double sobolev_constant(Dimension d) { return sobolev_constant_real(d.value()); }

SharpConstants sharp_constants(Dimension d) {
  const double omega = unit_ball_volume(d);
  const double s = sobolev_constant(d);
  if (d.value() == 4) {
    const double inv_s2 = 1.0 / (s * s);
    return SharpConstants{omega, s, inv_s2, inv_s2, 3.0 * inv_s2};
  }
  return higher_dimensional(d.value(), omega, s);
}

double regime_key(Dimension d, const KirchhoffParams& params) {
  validate(params);
  // a^0 = 1 exactly for d = 4
  if (d.value() == 4) return params.b;
  return std::pow(params.a, 0.5 * (d.value() - 4)) * params.b;
}

RegimeReport classify(Dimension d, const KirchhoffParams& params, double tolerance) {
  if (!(tolerance >= 0.0) || !std::isfinite(tolerance)) {
    throw DomainError("classification tolerance must be a finite nonnegative number");
  }
  RegimeReport r;
  r.dimension = d.value();
  r.key = regime_key(d, params);
  r.tolerance = tolerance;
  r.thresholds = sharp_constants(d);
  const auto at_least = [&](double t) { return r.key >= t * (1.0 - tolerance); };
  const auto above = [&](double t) { return r.key > t * (1.0 + tolerance); };
  r.swlsc = at_least(r.thresholds.lsc);
  r.palais_smale = above(r.thresholds.ps);
  r.convex = at_least(r.thresholds.convex);
  r.strictly_convex = above(r.thresholds.convex);
  return r;
}

std::vector<LimitRow> limit_check_d_to_4(std::span<const double> eps_sequence) {
  std::vector<LimitRow> rows;
  rows.reserve(eps_sequence.size());
  for (double eps : eps_sequence) {
    if (!(eps > 0.0)) {
      throw DomainError("limit study needs eps > 0 (eps = 0 is the d = 4 branch)");
    }
    const auto c = sharp_constants_real(4.0 + eps);
    rows.push_back({4.0 + eps, c.lsc, c.ps, c.convex});
  }
  return rows;
}

}  // namespace kirchhoff
