#include "kirchhoff/test_functions.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>

#include "kirchhoff/energy.hpp"
#include "kirchhoff/errors.hpp"
#include "kirchhoff/parallel.hpp"

namespace kirchhoff {

void validate(const CutoffSpec& spec) {
  if (!(spec.radius > 0.0)) throw ValidationError("cutoff radius must be positive");
  if (!(spec.t0 > 0.0)) throw ValidationError("cutoff height t0 must be positive");
  if (!(spec.sigma > 0.0 && spec.sigma < 1.0)) {
    throw ValidationError("cutoff plateau fraction sigma must lie in (0, 1)");
  }
}

RadialField build_cutoff(const CutoffSpec& spec, const GridPtr& grid) {
  validate(spec);
  if (grid->dimension() != spec.d) throw ValidationError("cutoff and grid dimensions differ");
  if (grid->radius() < spec.radius) {
    throw ValidationError(fmt::format("grid radius {} is smaller than the cutoff radius {}",
                                      grid->radius(), spec.radius));
  }
  const double plateau = spec.sigma * spec.radius;
  return RadialField::interpolate(grid, [&](double r) {
    if (r <= plateau) return spec.t0;
    if (r >= spec.radius) return 0.0;
    return spec.t0 * (spec.radius - r) / (spec.radius * (1.0 - spec.sigma));
  });
}

double cutoff_h1_norm_squared(const CutoffSpec& spec) {
  validate(spec);
  const int d = spec.d.value();
  return spec.t0 * spec.t0 / ((1.0 - spec.sigma) * (1.0 - spec.sigma)) *
         (1.0 - std::pow(spec.sigma, d)) * std::pow(spec.radius, d - 2) * unit_ball_volume(spec.d);
}

double cutoff_critical_lower_bound(const CutoffSpec& spec) {
  validate(spec);
  const int d = spec.d.value();
  return std::pow(spec.t0, spec.d.critical_exponent()) * std::pow(spec.sigma, d) *
         std::pow(spec.radius, d) * unit_ball_volume(spec.d);
}

double cutoff_primitive_lower_bound(const CutoffSpec& spec, double h_at_t0, double h_max) {
  validate(spec);
  const int d = spec.d.value();
  const double sd = std::pow(spec.sigma, d);
  return (h_at_t0 * sd - h_max * (1.0 - sd)) * std::pow(spec.radius, d) * unit_ball_volume(spec.d);
}

double sampled_primitive_max(const std::function<double(double)>& primitive, double t0) {
  constexpr int kSamples = 10000;
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < kSamples; ++i) {
    const double t = -t0 + 2.0 * t0 * i / (kSamples - 1);
    best = std::max(best, primitive(t));
  }
  return best;
}

double admissible_sigma(Dimension d, double h_at_t0, double h_max) {
  if (!(h_at_t0 > 0.0)) throw DomainError("need H(t0) > 0 for a positive cutoff bound");
  const double hmax = std::max(h_max, 0.0);
  const double lowest = std::pow(hmax / (h_at_t0 + hmax), 1.0 / d.value());
  return lowest + 0.1 * (1.0 - lowest);
}

double lambda_tilde(const CutoffSpec& spec, const KirchhoffParams& params, double h_at_t0,
                    double h_max, double alpha0) {
  validate(spec);
  validate(params);
  if (!(alpha0 > 0.0)) throw DomainError("alpha0 must be positive");
  const double denominator = alpha0 * cutoff_primitive_lower_bound(spec, h_at_t0, h_max);
  if (!(denominator > 0.0)) {
    throw DomainError(fmt::format("sigma = {} is not admissible: H(t0) sigma^d - Hmax (1 - sigma^d) "
                                  "<= 0, raise sigma", spec.sigma));
  }
  const double n2 = cutoff_h1_norm_squared(spec);
  const double numerator = 0.5 * params.a * n2 + 0.25 * params.b * n2 * n2 -
                           cutoff_critical_lower_bound(spec) / spec.d.critical_exponent();
  return numerator / denominator;
}

LambdaTildeResult lambda_tilde(Dimension d, double radius, const KirchhoffParams& params,
                               const PrimitiveSpec& h, std::optional<double> sigma) {
  if (!h.primitive) throw ValidationError("lambda-tilde needs the primitive H");
  LambdaTildeResult out;
  out.h_at_t0 = h.primitive(h.t0);
  out.h_max = h.h_max ? *h.h_max : sampled_primitive_max(h.primitive, h.t0);
  out.cutoff = CutoffSpec{d, radius, h.t0,
                          sigma ? *sigma : admissible_sigma(d, out.h_at_t0, out.h_max)};
  out.value = lambda_tilde(out.cutoff, params, out.h_at_t0, out.h_max, h.alpha0);
  return out;
}

Nonlinearity power_nonlinearity(double p) {
  if (!(p > 1.0)) throw DomainError("power nonlinearity needs p > 1");
  return Nonlinearity{
      fmt::format("power(p={})", p),
      [p](double t) { return t == 0.0 ? 0.0 : std::pow(std::abs(t), p - 2.0) * t; },
      [p](double t) { return std::pow(std::abs(t), p) / p; }};
}

namespace {

double pure_energy(const RadialField& u, const KirchhoffParams& params) {
  return energy(u, params).total;
}

double primitive_integral(const RadialField& u, const Nonlinearity& f) {
  return integrate(u, [&](double t) { return f.primitive(t); });
}

double quotient_or_inf(const RadialField& u, const KirchhoffParams& params, const Nonlinearity& f) {
  const double j = primitive_integral(u, f);
  if (!(j > 0.0)) return std::numeric_limits<double>::infinity();
  return pure_energy(u, params) / j;
}

struct QuotientRun {
  double value = std::numeric_limits<double>::infinity();
  std::optional<RadialField> field;
  std::size_t iterations = 0;
  double relative_residual = 0.0;
};

QuotientRun descend_quotient(RadialField u, const KirchhoffParams& params, const Nonlinearity& f,
                             const SolverConfig& cfg) {
  QuotientRun run;
  if (!std::isfinite(quotient_or_inf(u, params, f))) return run;

  // Best multiple t u, searched over log t.
  const auto along_ray = [&](double s) { return quotient_or_inf(std::exp(s) * u, params, f); };
  const auto [s_best, q_best] = boost::math::tools::brent_find_minima(along_ray, -20.0, 20.0, 40);
  if (std::isfinite(q_best) && q_best < quotient_or_inf(u, params, f)) u *= std::exp(s_best);

  const auto& grid = u.grid_ptr();
  double q = quotient_or_inf(u, params, f);
  double step = 0.0;
  for (std::size_t it = 0; it < cfg.max_iter; ++it) {
    const double j = primitive_integral(u, f);
    auto dual = dual_gradient(u, params);
    const auto dj = load_vector(u, [&](double t) { return f.fn(t); });
    for (std::size_t i = 0; i < dual.size(); ++i) dual[i] = (dual[i] - q * dj[i]) / j;
    const auto z = riesz_representative(grid, dual);
    double res2 = 0.0;
    for (std::size_t i = 0; i < dual.size(); ++i) res2 += dual[i] * z[i];
    const double res = std::sqrt(std::max(res2, 0.0));
    const double norm = h1_norm(u);
    run.relative_residual = res * norm / std::max(std::abs(q), 1e-300);
    run.iterations = it;
    if (run.relative_residual <= 1e-9) break;

    if (step == 0.0) step = 0.1 * norm / res;
    double trial = 2.0 * step;
    bool accepted = false;
    while (cfg.line_search.c1 * trial * res2 >= 1e-15 * std::abs(q)) {
      RadialField cand = u;
      cand.axpy(-trial, z);
      const double qc = quotient_or_inf(cand, params, f);
      if (qc <= q - cfg.line_search.c1 * trial * res2) {
        u = std::move(cand);
        q = qc;
        step = trial;
        accepted = true;
        break;
      }
      trial *= cfg.line_search.backtrack;
    }
    if (!accepted) break;
  }
  run.value = q;
  run.field = std::move(u);
  return run;
}

}  // namespace

double lambda_quotient(const RadialField& u, const KirchhoffParams& params, const Nonlinearity& f) {
  const double j = primitive_integral(u, f);
  if (!(j > 0.0)) throw DomainError("lambda quotient needs integral F(u) > 0");
  return pure_energy(u, params) / j;
}

LambdaStarResult lambda_star_estimate(const KirchhoffParams& params, const Nonlinearity& f,
                                      const GridPtr& grid, const SolverConfig& cfg,
                                      const std::vector<RadialField>& extra_starts) {
  validate(params);
  validate(cfg);
  const Dimension d = grid->dimension();
  const double radius = grid->radius();

  std::vector<RadialField> starts(extra_starts.begin(), extra_starts.end());
  for (double sigma : {0.5, std::pow(0.75, 1.0 / d.value()), 0.9}) {
    starts.push_back(build_cutoff(CutoffSpec{d, radius, 1.0, sigma}, grid));
  }
  for (double width : {1.0, 0.5, 0.25}) starts.push_back(scaled_bubble(grid, width * radius, 1.0));
  for (std::size_t i = 0; i < std::max<std::size_t>(cfg.starts, 1); ++i) {
    std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                      static_cast<std::uint32_t>(i), 4u};
    std::mt19937_64 rng(seq);
    starts.push_back(smooth_random_field(grid, rng, 1.0));
  }

  std::vector<QuotientRun> runs(starts.size());
  parallel_for(starts.size(), [&](std::size_t i) {
    require_same_grid(starts[i], RadialField(grid));
    runs[i] = descend_quotient(starts[i], params, f, cfg);
  });

  const QuotientRun* best = nullptr;
  for (const auto& r : runs) {
    if (r.field && (!best || r.value < best->value)) best = &r;
  }
  if (!best) {
    throw SolverError("no discrete field with positive integral F(u) was found");
  }
  return LambdaStarResult{best->value, *best->field, starts.size(), best->iterations,
                          best->relative_residual};
}

HypothesisReport hypothesis_check(const Nonlinearity& f, const GridPtr& grid) {
  HypothesisReport report;
  for (int k = 2; k <= 8; ++k) {
    const double t = std::pow(10.0, -k);
    const double ratio = std::max(f.primitive(t), f.primitive(-t)) / (t * t);
    report.h1_ratios.emplace_back(t, ratio);
  }
  const double last = report.h1_ratios.back().second;
  bool decaying = true;
  for (std::size_t i = 1; i < report.h1_ratios.size(); ++i) {
    if (!(report.h1_ratios[i].second < report.h1_ratios[i - 1].second)) decaying = false;
  }
  const double prev = report.h1_ratios[report.h1_ratios.size() - 2].second;
  // Positive ratios decaying like a power t^s with s >= 0.01 extrapolate to 0.
  const bool power_decay = decaying && last > 0.0 && std::log10(prev / last) >= 0.01;
  report.h1_ok = last <= 1e-3 || power_decay;

  // H2 witness: a cutoff whose primitive bound is positive.
  const Dimension d = grid->dimension();
  for (double t0 : {1.0, 2.0, 0.5, 4.0, 0.25, 10.0, 0.1}) {
    const double h_t0 = f.primitive(t0);
    if (!(h_t0 > 0.0)) continue;
    const double h_max = sampled_primitive_max(f.primitive, t0);
    CutoffSpec spec{d, grid->radius(), t0, admissible_sigma(d, h_t0, h_max)};
    const auto u = build_cutoff(spec, grid);
    report.witness_integral = primitive_integral(u, f);
    report.witness = spec;
    report.h2_ok = report.witness_integral > 0.0;
    if (report.h2_ok) break;
  }
  report.note = "H1 is a limit statement; the sampled ratios are evidence, not a certificate";
  return report;
}

}  // namespace kirchhoff
