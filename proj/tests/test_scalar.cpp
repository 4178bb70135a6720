#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "kirchhoff/constants.hpp"
#include "kirchhoff/errors.hpp"
#include "kirchhoff/scalar_analysis.hpp"
#include "oracles.hpp"

using namespace kirchhoff;

namespace {
const double kPi2 = std::numbers::pi * std::numbers::pi;

double central_difference(const ScalarProfile& f, double x) {
  const double h = 1e-5 * x;
  return (f(x + h) - f(x - h)) / (2.0 * h);
}
}  // namespace

TEST_CASE("profile values at the origin and cancellations at d = 4") {
  const Dimension d4(4);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> coef(0.1, 5.0);
  for (int i = 0; i < 20; ++i) {
    const KirchhoffParams p{coef(rng), coef(rng)};
    const Dimension d(4 + i % 6);
    CHECK(ScalarProfile(ProfileKind::lsc, d, p)(0.0) == p.a / 2);
    CHECK(ScalarProfile(ProfileKind::ps, d, p)(0.0) == p.a);
    CHECK(ScalarProfile(ProfileKind::convexity, d, p)(0.0) == p.a);
  }
  const ScalarProfile f(ProfileKind::lsc, d4, {1.0, 1.0 / (2.0 * kPi2)});
  const ScalarProfile fb(ProfileKind::convexity, d4, {1.0, 3.0 / (2.0 * kPi2)});
  for (double x : {0.0, 1.0, 10.0}) {
    CHECK(f(x) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(fb(x) == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(f(-1.0), DomainError);
}

TEST_CASE("profiles agree with the direct formula") {
  for (int d = 4; d <= 10; ++d) {
    const ScalarProfile f(ProfileKind::lsc, Dimension(d), {1.3, 0.7});
    for (double x : {0.01, 0.3, 2.0, 17.0}) {
      CHECK(oracle::close(f(x), oracle::f_lsc(d, 1.3L, 0.7L, x), 1e-12));
    }
  }
}

TEST_CASE("closed-form minimizers") {
  const Dimension d6(6);
  const double s6 = sobolev_constant(d6);
  const ScalarProfile f6(ProfileKind::lsc, d6, {1.0, 1.0});
  const auto m6 = minimizer(f6);
  REQUIRE(m6);
  CHECK(*m6 == doctest::Approx(2.0 / (3.0 * std::pow(s6, 1.5))).epsilon(1e-12));
  CHECK(*m6 == doctest::Approx(0.01995).epsilon(1e-3));

  for (int d = 5; d <= 12; ++d) {
    for (auto kind : {ProfileKind::lsc, ProfileKind::ps, ProfileKind::convexity}) {
      const ScalarProfile f(kind, Dimension(d), {0.8, 1.7});
      const auto m = minimizer(f);
      REQUIRE(m);
      if (kind == ProfileKind::lsc) CHECK(oracle::close(*m, oracle::m_lsc(d, 1.7L), 1e-12));
      // stationary: analytic derivative vs. central differences, both ~0
      const double scale = std::abs(f(*m)) + std::abs(f(0.0));
      CHECK(std::abs(f.derivative(*m)) * *m <= 1e-8 * scale);
      CHECK(std::abs(central_difference(f, *m)) * *m <= 1e-8 * scale);
      // global minimum on a sample grid
      for (double t : {0.1, 0.5, 0.9, 1.1, 2.0, 10.0}) CHECK(f(t * *m) >= f(*m));
    }
  }
  CHECK_FALSE(minimizer(ScalarProfile(ProfileKind::lsc, Dimension(4), {1.0, 1.0})));
}

TEST_CASE("derivative matches finite differences") {
  for (int d = 4; d <= 9; ++d) {
    for (auto kind : {ProfileKind::lsc, ProfileKind::ps, ProfileKind::convexity}) {
      const ScalarProfile f(kind, Dimension(d), {1.1, 0.05});
      for (double x : {0.2, 1.0, 5.0}) {
        CHECK(f.derivative(x) == doctest::Approx(central_difference(f, x)).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("lsc equivalence examples") {
  const Dimension d5(5);
  const double l5 = sharp_constants(d5).lsc;
  auto r = lsc_equivalence_check(d5, {1.0, l5});
  CHECK(r.lhs);
  CHECK(r.rhs);
  CHECK(std::abs(r.value_at_min) <= 1e-10);
  CHECK(r.identity_holds);

  r = lsc_equivalence_check(d5, {1.0, 2.0 * l5});
  CHECK(r.lhs);
  CHECK(r.rhs);
  r = lsc_equivalence_check(d5, {1.0, 0.5 * l5});
  CHECK_FALSE(r.lhs);
  CHECK_FALSE(r.rhs);
  CHECK_THROWS_AS(lsc_equivalence_check(Dimension(4), {1.0, 1.0}), DomainError);
}

TEST_CASE("lsc identity on random parameters") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> dim(5, 12);
  std::uniform_real_distribution<double> loga(-2.0, 2.0);
  for (int i = 0; i < 300; ++i) {
    const Dimension d(dim(rng));
    const double a = std::exp(loga(rng));
    const double b = sharp_constants(d).lsc * std::pow(a, -0.5 * (d.value() - 4)) * std::exp(loga(rng));
    const auto r = lsc_equivalence_check(d, {a, b});
    CHECK(r.identity_holds);
    CHECK(r.lhs == r.rhs);
    // f(m) = a/2 - b m^2 (d-4)/8, an independent rearrangement
    const double m = *minimizer(ScalarProfile(ProfileKind::lsc, d, {a, b}));
    CHECK(r.value_at_min ==
          doctest::Approx(a / 2 - b * m * m * (d.value() - 4) / 8.0).epsilon(1e-9).scale(a));
  }
}

TEST_CASE("root x0 at d = 4") {
  const KirchhoffParams p{1.0, 0.025};
  const double x0 = root_x0(p);
  const double s2 = 2.0 * kPi2;
  CHECK(x0 == doctest::Approx(std::sqrt(2.0 * s2 / (1.0 - s2 * 0.025))).epsilon(1e-13));
  CHECK(x0 == doctest::Approx(8.83).epsilon(1e-3));
  const ScalarProfile f(ProfileKind::lsc, Dimension(4), p);
  CHECK(std::abs(f(x0)) < 1e-9);
  CHECK(f(1.5 * x0) < 0.0);
  for (double delta : {0.01, 0.5, 3.0, 40.0}) {
    CHECK(f(x0 + delta) < 0.0);
    CHECK(f(x0 + delta) > f(x0 + 2.0 * delta));
  }
  CHECK_THROWS_AS(root_x0({1.0, 1.0 / s2}), DomainError);
}

TEST_CASE("positivity certificates") {
  const Dimension d5(5);
  const double ps5 = sharp_constants(d5).ps;
  auto c = positivity_certificate(ScalarProfile(ProfileKind::ps, d5, {1.0, 1.01 * ps5}));
  CHECK(c.positive);
  CHECK(c.sampling_agrees);

  c = positivity_certificate(ScalarProfile(ProfileKind::lsc, Dimension(4), {1.0, 0.01}));
  CHECK_FALSE(c.positive);
  CHECK(c.sampling_agrees);

  c = positivity_certificate(ScalarProfile(ProfileKind::convexity, Dimension(4), {1.0, 3.0 / (2.0 * kPi2)}));
  CHECK(c.positive);
  CHECK(c.minimum == doctest::Approx(1.0));
}

TEST_CASE("hypotheses imply positivity on a random sweep") {
  std::mt19937_64 rng(13);
  std::uniform_int_distribution<int> dim(4, 12);
  std::uniform_real_distribution<double> loga(-2.0, 2.0);
  std::uniform_real_distribution<double> above(1.0 + 1e-6, 4.0);
  for (int i = 0; i < 1000; ++i) {
    const Dimension d(dim(rng));
    const double a = std::exp(loga(rng));
    const double scale = std::pow(a, -0.5 * (d.value() - 4));
    const auto c = sharp_constants(d);
    const double b_ps = c.ps * scale * above(rng);
    const double b_c = c.convex * scale * above(rng);
    const auto ct = positivity_certificate(ScalarProfile(ProfileKind::ps, d, {a, b_ps}));
    const auto cb = positivity_certificate(ScalarProfile(ProfileKind::convexity, d, {a, b_c}));
    CHECK(ct.positive);
    CHECK(ct.sampling_agrees);
    CHECK(cb.positive);
    CHECK(cb.sampling_agrees);
  }
}

TEST_CASE("profile kind names") {
  CHECK(parse_profile_kind("f") == ProfileKind::lsc);
  CHECK(parse_profile_kind("ft") == ProfileKind::ps);
  CHECK(parse_profile_kind("fb") == ProfileKind::convexity);
  CHECK(to_string(ProfileKind::ps) == "ft");
  CHECK_THROWS(parse_profile_kind("g"));
}
