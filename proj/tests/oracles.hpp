#pragma once

// Reference values computed independently of the library: factorial forms
// of Gamma at integer and half-integer points, the threshold formulas
// evaluated directly in long double, and closed-form integrals.

#include <cmath>
#include <numbers>

namespace oracle {

inline long double factorial(int n) {
  long double f = 1.0L;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

/// Gamma(n / 2) for a positive integer n.
inline long double gamma_half(int n) {
  const long double sqrt_pi = std::sqrt(std::numbers::pi_v<long double>);
  if (n % 2 == 0) return factorial(n / 2 - 1);
  // Gamma(k + 1/2) = (2k)! / (4^k k!) sqrt(pi)
  const int k = (n - 1) / 2;
  return factorial(2 * k) / (std::pow(4.0L, k) * factorial(k)) * sqrt_pi;
}

inline long double omega(int d) {
  return std::pow(std::numbers::pi_v<long double>, d / 2.0L) / gamma_half(d + 2);
}

inline long double sobolev(int d) {
  return d * (d - 2) / 4.0L * std::pow(omega(d), 2.0L / d);
}

/// Sharp Sobolev constant pi d (d-2) (Gamma(d/2) / Gamma(d))^{2/d} of the
/// whole space. It is larger than sobolev(d) above.
inline long double sharp_sobolev(int d) {
  return std::numbers::pi_v<long double> * d * (d - 2) *
         std::pow(gamma_half(d) / factorial(d - 1), 2.0L / d);
}

inline long double lsc(int d) {
  const long double s = sobolev(d);
  if (d == 4) return 1.0L / (s * s);
  return 4.0L * std::pow(d - 4.0L, (d - 4) / 2.0L) /
         (std::pow(static_cast<long double>(d), (d - 2) / 2.0L) * std::pow(s, d / 2.0L));
}

inline long double ps(int d) {
  const long double s = sobolev(d);
  if (d == 4) return 1.0L / (s * s);
  return 2.0L * std::pow(d - 4.0L, (d - 4) / 2.0L) /
         (std::pow(d - 2.0L, (d - 2) / 2.0L) * std::pow(s, d / 2.0L));
}

inline long double convex(int d) {
  const long double s = sobolev(d);
  if (d == 4) return 3.0L / (s * s);
  return 2.0L * std::pow(d - 4.0L, (d - 4) / 2.0L) * std::pow(d + 2.0L, (d - 2) / 2.0L) /
         (std::pow(d - 2.0L, d - 2.0L) * std::pow(s, d / 2.0L));
}

/// f(x) = a/2 + b/4 x^2 - S^{-2*/2} / 2* x^{2*-2}, straight from the definition.
inline long double f_lsc(int d, long double a, long double b, long double x) {
  const long double crit = 2.0L * d / (d - 2.0L);
  return a / 2 + b / 4 * x * x -
         std::pow(sobolev(d), -crit / 2) / crit * std::pow(x, crit - 2);
}

/// Closed-form minimizer m_d of f for d > 4.
inline long double m_lsc(int d, long double b) {
  const long double crit = 2.0L * d / (d - 2.0L);
  return std::pow(crit * b / (2 * (crit - 2)) * std::pow(sobolev(d), crit / 2), 1 / (crit - 4));
}

/// a-priori radius at d = 4 straight from its formula.
inline long double apriori(long double b, long double lambda, long double p, long double radius) {
  const long double s = sobolev(4);
  const long double vol = omega(4) * std::pow(radius, 4.0L);
  return std::pow(lambda * std::pow(s, 2 - p / 2) * std::pow(vol, 1 - p / 4) / (b * s * s - 1),
                  1 / (4 - p));
}

/// ||u_sigma||^2 for the plateau cutoff.
inline long double cutoff_norm2(int d, long double t0, long double sigma, long double radius) {
  return t0 * t0 / ((1 - sigma) * (1 - sigma)) * (1 - std::pow(sigma, d)) *
         std::pow(radius, d - 2.0L) * omega(d);
}

inline bool close(double x, long double ref, double rel) {
  return std::abs(x - static_cast<double>(ref)) <= rel * std::abs(static_cast<double>(ref));
}

}  // namespace oracle
