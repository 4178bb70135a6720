#include "kirchhoff/scalar_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "kirchhoff/errors.hpp"

namespace kirchhoff {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double residual_tolerance(const KirchhoffParams& p) { return 1e-9 * std::max(1.0, p.a); }

}  // namespace

ProfileKind parse_profile_kind(std::string_view name) {
  if (name == "f") return ProfileKind::lsc;
  if (name == "ft") return ProfileKind::ps;
  if (name == "fb") return ProfileKind::convexity;
  throw ValidationError("unknown profile kind '" + std::string(name) + "' (expected f, ft or fb)");
}

std::string_view to_string(ProfileKind kind) {
  switch (kind) {
    case ProfileKind::lsc: return "f";
    case ProfileKind::ps: return "ft";
    case ProfileKind::convexity: return "fb";
  }
  return "?";
}

ScalarProfile::ScalarProfile(ProfileKind kind, Dimension d, KirchhoffParams params)
    : kind_(kind), d_(d), params_(params), crit_(d.critical_exponent()) {
  validate(params_);
  coeff_ = std::pow(sobolev_constant(d_), -0.5 * crit_);
}

double ScalarProfile::operator()(double x) const {
  if (!(x >= 0.0)) throw DomainError("scalar profiles are defined on x >= 0");
  const double a = params_.a;
  const double b = params_.b;
  switch (kind_) {
    case ProfileKind::lsc:
      return 0.5 * a + 0.25 * b * x * x - coeff_ / crit_ * std::pow(x, crit_ - 2.0);
    case ProfileKind::ps:
      return a + b * x - coeff_ * std::pow(x, 0.5 * crit_ - 1.0);
    case ProfileKind::convexity:
      return a + b * x * x - (crit_ - 1.0) * coeff_ * std::pow(x, crit_ - 2.0);
  }
  return 0.0;
}

double ScalarProfile::derivative(double x) const {
  if (!(x >= 0.0)) throw DomainError("scalar profiles are defined on x >= 0");
  const double b = params_.b;
  switch (kind_) {
    case ProfileKind::lsc:
      return 0.5 * b * x - coeff_ * (crit_ - 2.0) / crit_ * std::pow(x, crit_ - 3.0);
    case ProfileKind::ps:
      return b - coeff_ * (0.5 * crit_ - 1.0) * std::pow(x, 0.5 * crit_ - 2.0);
    case ProfileKind::convexity:
      return 2.0 * b * x - (crit_ - 1.0) * (crit_ - 2.0) * coeff_ * std::pow(x, crit_ - 3.0);
  }
  return 0.0;
}

double ScalarProfile::leading_coefficient_d4() const {
  if (d_.value() != 4) throw DomainError("leading coefficient test applies to d = 4 only");
  // S_4^{-2*/2} = S_4^{-2}
  switch (kind_) {
    case ProfileKind::lsc: return 0.25 * (params_.b - coeff_);
    case ProfileKind::ps: return params_.b - coeff_;
    case ProfileKind::convexity: return params_.b - 3.0 * coeff_;
  }
  return 0.0;
}

std::optional<double> minimizer(const ScalarProfile& profile) {
  const Dimension d = profile.dimension();
  if (d.value() == 4) return std::nullopt;
  const double crit = d.critical_exponent();
  const double b = profile.params().b;
  const double s_pow = std::pow(sobolev_constant(d), 0.5 * crit);  // S^{2*/2}
  switch (profile.kind()) {
    case ProfileKind::lsc:
      return std::pow(crit * b / (2.0 * (crit - 2.0)) * s_pow, 1.0 / (crit - 4.0));
    case ProfileKind::convexity:
      return std::pow(2.0 * b * s_pow / ((crit - 1.0) * (crit - 2.0)), 1.0 / (crit - 4.0));
    case ProfileKind::ps: {
      // b = S^{-2*/2} e x^{e-1} with e = 2*/2 - 1 in (0, 1)
      const double e = 0.5 * crit - 1.0;
      return std::pow(e / (b * s_pow), 1.0 / (1.0 - e));
    }
  }
  return std::nullopt;
}

LscEquivalence lsc_equivalence_check(Dimension d, const KirchhoffParams& params) {
  if (d.value() == 4) {
    throw DomainError("at d = 4 the equivalence reduces to b S_4^2 >= 1; use the d = 4 test");
  }
  const ScalarProfile f(ProfileKind::lsc, d, params);
  const double m = *minimizer(f);
  const double crit = d.critical_exponent();
  const double coeff = std::pow(sobolev_constant(d), -0.5 * crit);
  const auto c = sharp_constants(d);
  const double k = 2.0 / (d.value() - 4.0);

  LscEquivalence out;
  out.lhs = regime_key(d, params) >= c.lsc;
  out.value_at_min = f(m);
  out.closed_form = 0.5 * (params.a - std::pow(params.b, -k) * std::pow(c.lsc, k));
  // Values within rounding of the summed term magnitudes are treated as 0.
  const double magnitude = 0.5 * params.a + 0.25 * params.b * m * m +
                           coeff / crit * std::pow(m, crit - 2.0);
  const double zero_band = 64.0 * kEps * magnitude;
  out.rhs = out.value_at_min >= -zero_band;
  const double scale = std::max({std::abs(out.value_at_min), std::abs(out.closed_form), magnitude});
  out.identity_holds = std::abs(out.value_at_min - out.closed_form) <= 1e-10 * scale;
  return out;
}

double root_x0(const KirchhoffParams& params) {
  validate(params);
  const double s2 = std::pow(sobolev_constant(Dimension(4)), 2.0);
  const double gap = 1.0 - s2 * params.b;
  if (!(gap > 0.0)) {
    throw DomainError("f_4 has no positive root unless b S_4^2 < 1");
  }
  return std::sqrt(2.0 * params.a * s2 / gap);
}

PositivityCertificate positivity_certificate(const ScalarProfile& profile) {
  PositivityCertificate cert;
  const double tol = residual_tolerance(profile.params());
  const double a = profile.params().a;
  const double at_zero = profile.kind() == ProfileKind::lsc ? 0.5 * a : a;

  if (profile.dimension().value() == 4) {
    const double lead = profile.leading_coefficient_d4();
    if (lead >= 0.0) {
      cert.minimum = at_zero;
      cert.scale = 1.0;
    } else {
      cert.minimum = -std::numeric_limits<double>::infinity();
      // zero crossing of the affine-in-power profile
      const double crossing = at_zero / -lead;
      cert.scale = profile.kind() == ProfileKind::ps ? crossing : std::sqrt(crossing);
    }
  } else {
    const double m = *minimizer(profile);
    cert.minimum = std::min(profile(m), at_zero);
    cert.scale = m;
  }
  cert.positive = cert.minimum >= 0.0;

  // Geometric sampling on (0, 10 * scale] plus the origin.
  constexpr int kSamples = 10000;
  const double hi = 10.0 * cert.scale;
  const double lo = hi * 1e-8;
  const double ratio = std::pow(hi / lo, 1.0 / (kSamples - 1));
  double sampled = profile(0.0);
  double x = lo;
  for (int i = 0; i < kSamples; ++i, x *= ratio) sampled = std::min(sampled, profile(x));
  cert.sampled_minimum = sampled;

  const bool above_analytic = sampled >= cert.minimum - tol;
  cert.sampling_agrees =
      above_analytic && (cert.positive ? sampled >= -tol : (sampled < 0.0 || cert.minimum > -tol));
  return cert;
}

}  // namespace kirchhoff
