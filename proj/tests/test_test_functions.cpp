#include <doctest.h>

#include <cmath>
#include <random>

#include "kirchhoff/errors.hpp"
#include "kirchhoff/test_functions.hpp"
#include "oracles.hpp"

using namespace kirchhoff;

TEST_CASE("cutoff construction") {
  const Dimension d(4);
  const auto g = make_grid(d, 1.0, 100);
  const auto u = build_cutoff(CutoffSpec{d, 1.0, 2.5, 0.5}, g);
  CHECK(u[0] == 2.5);
  CHECK(u[50] == 2.5);
  CHECK(u[75] == doctest::Approx(1.25).epsilon(1e-12));
  CHECK(u[100] == 0.0);

  const auto small = build_cutoff(CutoffSpec{d, 0.5, 1.0, 0.5}, g);
  CHECK(small[60] == 0.0);
  CHECK_THROWS_AS(build_cutoff(CutoffSpec{d, 2.0, 1.0, 0.5}, g), ValidationError);
  CHECK_THROWS_AS(build_cutoff(CutoffSpec{d, 1.0, 1.0, 1.0}, g), ValidationError);
  CHECK_THROWS_AS(build_cutoff(CutoffSpec{Dimension(5), 1.0, 1.0, 0.5}, g), ValidationError);
}

TEST_CASE("closed-form cutoff pieces") {
  for (int dv : {4, 5, 6}) {
    const Dimension d(dv);
    for (double sigma : {0.3, 0.5, 0.9}) {
      const CutoffSpec spec{d, 1.3, 0.8, sigma};
      CHECK(cutoff_h1_norm_squared(spec) ==
            doctest::Approx(static_cast<double>(oracle::cutoff_norm2(dv, 0.8L, sigma, 1.3L))).epsilon(1e-13));
      const auto g = make_grid(d, 1.3, 400);
      const auto u = build_cutoff(spec, g);
      CHECK(power_integral(u, d.critical_exponent()) > cutoff_critical_lower_bound(spec));
      const auto h = [](double t) { return std::pow(std::abs(t), 3.0) / 3.0; };
      const double hmax = sampled_primitive_max(h, spec.t0);
      CHECK(integrate(u, h) >= cutoff_primitive_lower_bound(spec, h(spec.t0), hmax));
    }
  }
}

TEST_CASE("admissible sigma and lambda tilde") {
  const Dimension d(4);
  const KirchhoffParams k{1.0, 0.2};
  const double q = 3.0;
  const auto h = [q](double t) { return std::pow(std::abs(t), q) / q; };
  const double h1 = h(1.0);
  const double sigma0 = std::pow(0.75, 0.25);
  // H(1) sigma^4 - Hmax (1 - sigma^4) = H(1) / 2
  const CutoffSpec spec{d, 1.0, 1.0, sigma0};
  CHECK(cutoff_primitive_lower_bound(spec, h1, h1) ==
        doctest::Approx(0.5 * h1 * static_cast<double>(oracle::omega(4))).epsilon(1e-13));
  const double lt = lambda_tilde(spec, k, h1, h1);
  CHECK(std::isfinite(lt));
  CHECK(lt > 0.0);

  // direct assembly of the bound
  const double n2 = static_cast<double>(oracle::cutoff_norm2(4, 1.0L, sigma0, 1.0L));
  const double om = static_cast<double>(oracle::omega(4));
  const double expect = (0.5 * n2 + 0.05 * n2 * n2 - 0.75 * om / 4.0) / (0.5 * h1 * om);
  CHECK(lt == doctest::Approx(expect).epsilon(1e-12));

  // monotone in H(t0)
  CHECK(lambda_tilde(spec, k, 2.0 * h1, h1) < lt);

  // sigma too small
  const double sigma_min = std::pow(0.5, 0.25);
  CHECK_THROWS_AS(lambda_tilde(CutoffSpec{d, 1.0, 1.0, 0.9 * sigma_min}, k, h1, h1), DomainError);
  const double chosen = admissible_sigma(d, h1, h1);
  CHECK(chosen == doctest::Approx(sigma_min + 0.1 * (1.0 - sigma_min)).epsilon(1e-14));
  CHECK(cutoff_primitive_lower_bound(CutoffSpec{d, 1.0, 1.0, chosen}, h1, h1) > 0.0);
  CHECK_THROWS_AS(admissible_sigma(d, -1.0, 1.0), DomainError);

  const auto auto_sigma = lambda_tilde(d, 1.0, k, PrimitiveSpec{h, 1.0});
  CHECK(auto_sigma.cutoff.sigma == doctest::Approx(chosen));
  CHECK(auto_sigma.h_max == doctest::Approx(h1).epsilon(1e-12));
}

TEST_CASE("lambda quotient and its minimization") {
  const Dimension d(4);
  const auto g = make_grid(d, 1.0, 100);
  const KirchhoffParams k{1.0, 0.2};
  const auto f = power_nonlinearity(3.0);
  CHECK(f.fn(-2.0) == doctest::Approx(-4.0));
  CHECK(f.primitive(-2.0) == doctest::Approx(8.0 / 3.0));
  CHECK_THROWS_AS(lambda_quotient(RadialField(g), k, f), DomainError);

  SolverConfig cfg;
  cfg.starts = 4;
  const auto est = lambda_star_estimate(k, f, g, cfg);
  CHECK(est.estimate > 0.0);
  CHECK(lambda_quotient(est.argmin, k, f) == doctest::Approx(est.estimate).epsilon(1e-12));

  const double sigma0 = std::pow(0.75, 0.25);
  const double h1 = 1.0 / 3.0;
  CHECK(est.estimate <= lambda_tilde(CutoffSpec{d, 1.0, 1.0, sigma0}, k, h1, h1));

  // any trial field is above the estimate
  std::mt19937_64 rng(61);
  for (int i = 0; i < 20; ++i) {
    const auto u = smooth_random_field(g, rng, 1.0);
    CHECK(lambda_quotient(u, k, f) >= est.estimate * (1.0 - 1e-9));
  }

  // insensitive to the scale of the starts
  const auto base = build_cutoff(CutoffSpec{d, 1.0, 1.0, 0.5}, g);
  SolverConfig one;
  one.starts = 1;
  const auto s1 = lambda_star_estimate(k, f, g, one, {1e-3 * base});
  const auto s2 = lambda_star_estimate(k, f, g, one, {1e3 * base});
  CHECK(s1.estimate == doctest::Approx(s2.estimate).epsilon(1e-6));

  // nested grids: refinement does not raise the estimate (warm start from the coarse argmin)
  const auto fine = refine(*g);
  const auto est_fine = lambda_star_estimate(k, f, fine, cfg, {prolongate(est.argmin, fine)});
  CHECK(est_fine.estimate <= est.estimate * (1.0 + 1e-9));
}

TEST_CASE("hypothesis checks") {
  const auto g = make_grid(Dimension(4), 1.0, 100);
  const auto r = hypothesis_check(power_nonlinearity(3.0), g);
  CHECK(r.h1_ok);
  CHECK(r.h2_ok);
  CHECK(r.witness);
  CHECK(r.witness_integral > 0.0);
  CHECK(r.h1_ratios.size() == 7);
  CHECK_FALSE(r.note.empty());

  const Nonlinearity quadratic{"t^2", [](double t) { return 2.0 * t; }, [](double t) { return t * t; }};
  const auto q = hypothesis_check(quadratic, g);
  CHECK_FALSE(q.h1_ok);
  CHECK(q.h2_ok);

  const Nonlinearity negative{"-t^4", [](double t) { return -4.0 * t * t * t; },
                              [](double t) { return -t * t * t * t; }};
  const auto n = hypothesis_check(negative, g);
  CHECK(n.h1_ok);
  CHECK_FALSE(n.h2_ok);
}
