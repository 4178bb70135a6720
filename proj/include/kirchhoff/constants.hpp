#pragma once

#include <span>
#include <vector>

namespace kirchhoff {

/// Spatial dimension d >= 4 of the ambient space R^d.
class Dimension {
 public:
  /// Throws DomainError if d < 4.
  explicit Dimension(int d);

  int value() const noexcept { return d_; }

  /// Critical Sobolev exponent 2* = 2d/(d-2).
  double critical_exponent() const noexcept { return 2.0 * d_ / (d_ - 2.0); }

  friend bool operator==(Dimension, Dimension) = default;

 private:
  int d_;
};

/// Coefficients of the Kirchhoff term (a + b ||u||^2).
struct KirchhoffParams {
  double a = 1.0;  ///< initial tension, > 0
  double b = 1.0;  ///< nonlocal stiffness, > 0

  friend bool operator==(const KirchhoffParams&, const KirchhoffParams&) = default;
};

/// Throws DomainError unless a > 0 and b > 0 (both finite).
void validate(const KirchhoffParams& params);

struct SharpConstants {
  double omega = 0.0;    ///< volume of the unit ball
  double sobolev = 0.0;  ///< best Sobolev constant S_d
  double lsc = 0.0;      ///< L_d
  double ps = 0.0;       ///< PS_d
  double convex = 0.0;   ///< C_d

  friend bool operator==(const SharpConstants&, const SharpConstants&) = default;
};

struct RegimeReport {
  int dimension = 4;
  double key = 0.0;  ///< a^{(d-4)/2} b
  bool swlsc = false;
  bool palais_smale = false;
  bool convex = false;
  bool strictly_convex = false;
  double tolerance = 0.0;
  SharpConstants thresholds;

  friend bool operator==(const RegimeReport&, const RegimeReport&) = default;
};

double unit_ball_volume(Dimension d);
double sobolev_constant(Dimension d);
SharpConstants sharp_constants(Dimension d);

// Real-valued dimension extension used only for limit studies. Both
// entry points require d_real >= 4; the constant formulas additionally
// require d_real > 4 (the d = 4 values come from their own branch).
double unit_ball_volume_real(double d_real);
double sobolev_constant_real(double d_real);
SharpConstants sharp_constants_real(double d_real);

/// The regime key a^{(d-4)/2} b.
double regime_key(Dimension d, const KirchhoffParams& params);

/// Compares the regime key against L_d, PS_d, C_d.
///
/// With tolerance == 0 the comparisons are exact: swlsc is key >= L_d,
/// palais_smale is key > PS_d, convex is key >= C_d, strictly_convex is
/// key > C_d. A positive tolerance widens the boundary band relatively:
/// ">= T" becomes "key >= T(1 - tol)" and "> T" becomes "key > T(1 + tol)".
RegimeReport classify(Dimension d, const KirchhoffParams& params, double tolerance = 0.0);

struct LimitRow {
  double d_real = 0.0;
  double lsc = 0.0;
  double ps = 0.0;
  double convex = 0.0;
};

/// Evaluates the d > 4 formulas at d_real = 4 + eps for each eps.
/// Throws DomainError if any eps <= 0.
std::vector<LimitRow> limit_check_d_to_4(std::span<const double> eps_sequence);

}  // namespace kirchhoff
