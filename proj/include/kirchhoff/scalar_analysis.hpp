#pragma once

#include <optional>
#include <string_view>

#include "kirchhoff/constants.hpp"

namespace kirchhoff {

/// The three one-dimensional profiles behind the regime thresholds:
///   lsc:       f(x)  = a/2 + (b/4) x^2 - S^{-2*/2}/2* x^{2*-2}
///   ps:        ft(x) = a + b x - S^{-2*/2} x^{2*/2-1}
///   convexity: fb(x) = a + b x^2 - (2*-1) S^{-2*/2} x^{2*-2}
enum class ProfileKind { lsc, ps, convexity };

/// Parses "f", "ft", "fb" (the CLI spelling).
ProfileKind parse_profile_kind(std::string_view name);
std::string_view to_string(ProfileKind kind);

class ScalarProfile {
 public:
  ScalarProfile(ProfileKind kind, Dimension d, KirchhoffParams params);

  ProfileKind kind() const noexcept { return kind_; }
  Dimension dimension() const noexcept { return d_; }
  const KirchhoffParams& params() const noexcept { return params_; }

  /// Throws DomainError for x < 0.
  double operator()(double x) const;
  double derivative(double x) const;

  /// Coefficient of the x^2 (f, fb) or x (ft) term when d = 4, where the
  /// profile is affine in that power.
  double leading_coefficient_d4() const;

 private:
  ProfileKind kind_;
  Dimension d_;
  KirchhoffParams params_;
  double crit_;   // 2*
  double coeff_;  // S^{-2*/2}
};

/// Closed-form interior stationary point, which is the global minimum on
/// [0, inf). Empty for d = 4, where every profile is affine in x^2 (or x).
std::optional<double> minimizer(const ScalarProfile& profile);

struct LscEquivalence {
  bool lhs = false;           ///< key >= L_d
  bool rhs = false;           ///< f(m_d) >= 0 (rounding-level values count as zero)
  double value_at_min = 0.0;  ///< f(m_d) by direct evaluation
  double closed_form = 0.0;   ///< (a - b^{-2/(d-4)} L_d^{2/(d-4)}) / 2
  bool identity_holds = false;
};

/// Throws DomainError for d = 4.
LscEquivalence lsc_equivalence_check(Dimension d, const KirchhoffParams& params);

/// Unique positive zero of f at d = 4 in the sub-threshold regime b S_4^2 < 1.
double root_x0(const KirchhoffParams& params);

struct PositivityCertificate {
  bool positive = false;      ///< min over [0, inf) >= 0
  double minimum = 0.0;       ///< analytic minimum (-inf when unbounded below)
  double sampled_minimum = 0.0;
  double scale = 1.0;         ///< sampling window is [0, 10 * scale]
  bool sampling_agrees = false;
};

PositivityCertificate positivity_certificate(const ScalarProfile& profile);

}  // namespace kirchhoff
