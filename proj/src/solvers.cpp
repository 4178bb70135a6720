#include "kirchhoff/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <numbers>

#include "kirchhoff/errors.hpp"
#include "kirchhoff/parallel.hpp"

namespace kirchhoff {

namespace {

constexpr double kDuplicateDistance = 1e-3;

// Rounding level below which energy differences carry no information.
double energy_floor(double e) { return 1e-13 * (1.0 + std::abs(e)); }

RadialField field_from_free(const GridPtr& grid, std::vector<double> free) {
  free.push_back(0.0);
  return RadialField(grid, std::move(free));
}

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t index, std::uint64_t phase) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(phase)};
  return std::mt19937_64(seq);
}

std::string regime_note(Dimension d, const KirchhoffParams& params) {
  const auto r = classify(d, params);
  return fmt::format("regime key a^((d-4)/2) b = {:.6g} (L_d = {:.6g}, PS_d = {:.6g}, C_d = {:.6g})",
                     r.key, r.thresholds.lsc, r.thresholds.ps, r.thresholds.convex);
}

SolveResult finish(SolveResult res, const KirchhoffParams& params, const PerturbationSpec& pert) {
  res.energy = energy(res.field, params, pert);
  res.converged = res.status == SolveStatus::converged;
  return res;
}

// One Newton step accepted on residual decrease (with halving). Returns
// false when no decrease could be achieved.
bool newton_polish_step(RadialField& u, Gradient& grad, const KirchhoffParams& params,
                        const PerturbationSpec& pert) {
  std::vector<double> direction;
  try {
    std::vector<double> rhs(grad.dual);
    for (double& v : rhs) v = -v;
    direction = Hessian(u, params, pert).solve(rhs);
  } catch (const SolverError&) {
    return false;
  }
  const auto delta = field_from_free(u.grid_ptr(), std::move(direction));
  double t = 1.0;
  for (int k = 0; k < 30; ++k, t *= 0.5) {
    RadialField cand = u;
    cand.axpy(t, delta);
    auto g = gradient(cand, params, pert);
    if (std::isfinite(g.residual) && g.residual < grad.residual) {
      u = std::move(cand);
      grad = std::move(g);
      return true;
    }
  }
  return false;
}

bool gradient_residual_step(RadialField& u, Gradient& grad, double step,
                            const KirchhoffParams& params, const PerturbationSpec& pert) {
  double t = step;
  for (int k = 0; k < 30; ++k, t *= 0.5) {
    RadialField cand = u;
    cand.axpy(-t, grad.riesz);
    auto g = gradient(cand, params, pert);
    if (std::isfinite(g.residual) && g.residual < grad.residual) {
      u = std::move(cand);
      grad = std::move(g);
      return true;
    }
  }
  return false;
}

}  // namespace

std::string to_string(SolveMethod method) {
  switch (method) {
    case SolveMethod::descent: return "descent";
    case SolveMethod::fixed_point: return "fixed-point";
    case SolveMethod::multistart: return "multistart";
  }
  return "?";
}

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::max_iterations: return "max_iterations";
    case SolveStatus::unbounded_below: return "unbounded_below";
    case SolveStatus::diverged: return "diverged";
    case SolveStatus::stalled: return "stalled";
  }
  return "?";
}

SolveMethod parse_solve_method(const std::string& name) {
  if (name == "descent") return SolveMethod::descent;
  if (name == "fixed-point" || name == "fixed_point") return SolveMethod::fixed_point;
  if (name == "multistart") return SolveMethod::multistart;
  throw ValidationError("unknown solve method '" + name + "' (expected descent, fixed-point or multistart)");
}

void validate(const SolverConfig& cfg) {
  if (!(cfg.tol > 0.0)) throw ValidationError("solver tol must be positive");
  if (!(cfg.line_search.c1 > 0.0 && cfg.line_search.c1 < 1.0)) {
    throw ValidationError("Armijo c1 must lie in (0, 1)");
  }
  if (!(cfg.line_search.backtrack > 0.0 && cfg.line_search.backtrack < 1.0)) {
    throw ValidationError("Armijo backtracking factor must lie in (0, 1)");
  }
  if (cfg.max_iter == 0) throw ValidationError("max_iter must be positive");
}

SolveResult minimize(const KirchhoffParams& params, const PerturbationSpec& pert,
                     const GridPtr& grid, const SolverConfig& cfg,
                     std::optional<RadialField> initial) {
  validate(params);
  validate(cfg);
  const Dimension d = grid->dimension();
  SolveResult res{initial ? std::move(*initial) : RadialField(grid)};
  require_same_grid(res.field, RadialField(grid));
  res.method = SolveMethod::descent;
  res.diagnostics = validate(pert, d);
  if (!classify(d, params).swlsc) {
    res.diagnostics.push_back("energy is not weakly lower semicontinuous here, minimization may be "
                              "unbounded below: " + regime_note(d, params));
  }

  RadialField& u = res.field;
  Gradient grad = gradient(u, params, pert);
  double e = energy(u, params, pert).total;
  res.energy_history.push_back(e);
  double step = 1.0 / (params.a + params.b * h1_inner(u, u));
  bool polish = false;
  res.status = SolveStatus::max_iterations;

  while (res.iterations < cfg.max_iter) {
    if (grad.residual <= cfg.tol) {
      res.status = SolveStatus::converged;
      break;
    }
    if (e < cfg.unbounded_threshold) {
      res.status = SolveStatus::unbounded_below;
      if (classify(d, params).swlsc) {
        res.diagnostics.push_back(fmt::format("energy {:.6g} fell below {:.3g} although the regime is "
                                              "lower semicontinuous; the minimum lies beyond the detector "
                                              "threshold",
                                              e, cfg.unbounded_threshold));
      } else {
        res.diagnostics.push_back(fmt::format("energy {:.6g} fell below {:.3g}: the functional is "
                                              "unbounded below along this descent path; {}",
                                              e, cfg.unbounded_threshold, regime_note(d, params)));
      }
      break;
    }
    if (!std::isfinite(grad.residual)) {
      res.status = SolveStatus::diverged;
      break;
    }
    ++res.iterations;
    if (polish) {
      if (!newton_polish_step(u, grad, params, pert) &&
          !gradient_residual_step(u, grad, step, params, pert)) {
        res.status = SolveStatus::stalled;
        res.diagnostics.push_back("residual could not be reduced further");
        break;
      }
      e = energy(u, params, pert).total;
      continue;
    }

    const double slope = grad.residual * grad.residual;
    double trial = std::min(2.0 * step, 1e12);
    bool accepted = false;
    RadialField cand = u;
    double e_cand = e;
    while (cfg.line_search.c1 * trial * slope >= energy_floor(e)) {
      cand = u;
      cand.axpy(-trial, grad.riesz);
      e_cand = energy(cand, params, pert).total;
      if (std::isfinite(e_cand) && e_cand <= e - cfg.line_search.c1 * trial * slope) {
        accepted = true;
        break;
      }
      trial *= cfg.line_search.backtrack;
    }
    if (!accepted) {
      // Energy differences are at rounding level: finish with Newton.
      polish = true;
      --res.iterations;
      continue;
    }
    u = std::move(cand);
    e = e_cand;
    step = trial;
    grad = gradient(u, params, pert);
    res.energy_history.push_back(e);
  }

  res.residual = grad.residual;
  return finish(std::move(res), params, pert);
}

SolveResult fixed_point_solve(const KirchhoffParams& params, const PerturbationSpec& pert,
                              const GridPtr& grid, const SolverConfig& cfg,
                              std::optional<RadialField> initial) {
  validate(params);
  validate(cfg);
  if (pert.lambda != 0.0 || (pert.mu != 0.0 && pert.g)) {
    throw ValidationError("fixed-point solver handles the source problem only (lambda = mu = 0)");
  }
  const Dimension d = grid->dimension();
  const double crit = d.critical_exponent();
  const auto start = initial ? std::move(*initial) : RadialField(grid);
  require_same_grid(start, RadialField(grid));

  SolveResult res{start};
  res.method = SolveMethod::fixed_point;
  res.diagnostics = validate(pert, d);

  // integral h phi_i does not depend on the iterate
  std::vector<double> source_load(grid->elements(), 0.0);
  if (pert.source) {
    PerturbationSpec only_source;
    only_source.source = pert.source;
    const auto zero_grad = dual_gradient(RadialField(grid), KirchhoffParams{1.0, 1.0}, only_source);
    for (std::size_t i = 0; i < source_load.size(); ++i) source_load[i] = -zero_grad[i];
  }

  for (double damping : {1.0, 0.5}) {
    RadialField u = start;
    double prev_step = std::numeric_limits<double>::infinity();
    int growth_streak = 0;
    bool oscillating = false;
    res.status = SolveStatus::max_iterations;
    res.iterations = 0;
    while (res.iterations < cfg.max_iter) {
      ++res.iterations;
      const double coeff = params.a + params.b * h1_inner(u, u);
      auto rhs = load_vector(u, [crit](double t) {
        return t == 0.0 ? 0.0 : std::pow(std::abs(t), crit - 2.0) * t;
      });
      for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = (rhs[i] + source_load[i]) / coeff;
      RadialField next = riesz_representative(grid, rhs);
      if (damping != 1.0) {
        next *= damping;
        next.axpy(1.0 - damping, u);
      }
      const double step = h1_norm(next - u);
      u = std::move(next);
      const double norm = h1_norm(u);
      if (!std::isfinite(norm) || norm > 1e6) {
        res.status = SolveStatus::diverged;
        res.diagnostics.push_back(fmt::format("fixed-point iterate norm {:.3g} exceeds 1e6; {}",
                                              norm, regime_note(d, params)));
        break;
      }
      if (step <= cfg.tol) {
        res.status = SolveStatus::converged;
        break;
      }
      growth_streak = step > prev_step ? growth_streak + 1 : 0;
      prev_step = step;
      if (damping == 1.0 && growth_streak >= 5) {
        oscillating = true;
        break;
      }
    }
    res.field = std::move(u);
    if (!oscillating) break;
    res.diagnostics.push_back("fixed-point steps grew five times in a row; retrying with damping 0.5");
  }

  res.residual = gradient(res.field, params, pert).residual;
  if (res.status == SolveStatus::converged && res.residual > 10.0 * cfg.tol) {
    res.status = SolveStatus::stalled;
    res.diagnostics.push_back(fmt::format("steps stalled but residual {:.3g} > 10 tol", res.residual));
  }
  return finish(std::move(res), params, pert);
}

UniquenessReport uniqueness_probe(const KirchhoffParams& params, const PerturbationSpec& pert,
                                  const GridPtr& grid, const SolverConfig& cfg) {
  validate(cfg);
  const std::size_t starts = std::max<std::size_t>(cfg.starts, 1);
  constexpr double kScales[] = {0.1, 1.0, 10.0};
  std::vector<std::optional<SolveResult>> runs(starts);
  parallel_for(starts, [&](std::size_t i) {
    auto rng = stream(cfg.seed, i, 1);
    auto init = gaussian_field(grid, rng, kScales[i % 3]);
    runs[i] = minimize(params, pert, grid, cfg, std::move(init));
  });

  UniquenessReport report;
  report.asserted = classify(grid->dimension(), params).strictly_convex;
  for (std::size_t i = 0; i < starts; ++i) {
    if (!runs[i]->converged) {
      throw SolverError(fmt::format("uniqueness probe: start {} ended with status {} (residual {:.3g})",
                                    i, to_string(runs[i]->status), runs[i]->residual));
    }
    report.max_norm = std::max(report.max_norm, h1_norm(runs[i]->field));
    report.solutions.push_back(std::move(*runs[i]));
  }
  for (std::size_t i = 0; i < starts; ++i) {
    for (std::size_t j = i + 1; j < starts; ++j) {
      report.spread = std::max(report.spread,
                               h1_norm(report.solutions[i].field - report.solutions[j].field));
    }
  }
  report.unique = report.spread <= 1e-5 * (1.0 + report.max_norm);
  return report;
}

double apriori_bound(const KirchhoffParams& params, double lambda, double p, double radius) {
  validate(params);
  const Dimension d4(4);
  const double s = sobolev_constant(d4);
  const double gap = params.b * s * s - 1.0;
  if (!(gap > 0.0)) throw DomainError("a-priori estimate needs b S_4^2 > 1");
  if (!(p > 2.0 && p < 4.0)) throw DomainError("a-priori estimate needs p in (2, 4)");
  if (!(lambda >= 0.0)) throw DomainError("a-priori estimate needs lambda >= 0");
  const double volume = unit_ball_volume(d4) * std::pow(radius, 4);
  const double base = lambda * std::pow(s, 2.0 - 0.5 * p) * std::pow(volume, 1.0 - 0.25 * p) / gap;
  return std::pow(base, 1.0 / (4.0 - p));
}

AprioriCheck apriori_check(const SolveResult& solution, const KirchhoffParams& params,
                           double lambda, double p) {
  if (solution.field.grid().dimension().value() != 4) {
    throw DomainError("a-priori estimate is stated for d = 4");
  }
  if (!solution.converged) throw DomainError("a-priori check needs a converged solution");
  AprioriCheck out;
  out.bound = apriori_bound(params, lambda, p, solution.field.grid().radius());
  out.norm = h1_norm(solution.field);
  out.satisfied = out.norm <= out.bound * (1.0 + 1e-6);
  return out;
}

std::vector<ContinuationRow> apriori_continuation(const KirchhoffParams& params, double p,
                                                  const std::vector<double>& lambdas,
                                                  const GridPtr& grid, const SolverConfig& cfg,
                                                  RadialField start) {
  std::vector<ContinuationRow> rows;
  RadialField current = std::move(start);
  for (double lambda : lambdas) {
    PerturbationSpec pert;
    pert.lambda = lambda;
    pert.power = p;
    auto sol = minimize(params, pert, grid, cfg, current);
    rows.push_back({lambda, apriori_bound(params, lambda, p, grid->radius()),
                    h1_norm(sol.field), sol.converged});
    current = std::move(sol.field);
  }
  return rows;
}

RadialField gaussian_field(const GridPtr& grid, std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> normal(0.0, scale);
  RadialField u(grid);
  for (double& v : u.free_values()) v = normal(rng);
  return u;
}

RadialField smooth_random_field(const GridPtr& grid, std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::array<double, 6> coeff{};
  for (std::size_t k = 0; k < coeff.size(); ++k) coeff[k] = normal(rng) / (k + 1.0);
  const double radius = grid->radius();
  return RadialField::interpolate(grid, [&](double r) {
    double s = 0.0;
    for (std::size_t k = 0; k < coeff.size(); ++k) {
      s += coeff[k] * std::cos((k + 0.5) * std::numbers::pi * r / radius);
    }
    return scale * s;
  });
}

RadialField scaled_bubble(const GridPtr& grid, double width, double height) {
  if (!(width > 0.0)) throw DomainError("bubble width must be positive");
  const double expo = 0.5 * (grid->dimension().value() - 2);
  const double radius = grid->radius();
  const double tail = std::pow(width * width + radius * radius, -expo);
  const double norm = std::pow(width, 2.0 * expo);
  return RadialField::interpolate(grid, [&](double r) {
    return height * (std::pow(width * width + r * r, -expo) - tail) * norm;
  });
}

std::optional<EnergyWitness> find_negative_energy_witness(const KirchhoffParams& params,
                                                          const GridPtr& grid) {
  const double finest = grid->nodes()[1];
  for (double width = 0.5 * grid->radius(); width >= finest; width *= 0.5) {
    const auto shape = scaled_bubble(grid, width, 1.0);
    for (double height = 1.0; height <= 1e8; height *= 2.0) {
      auto field = height * shape;
      const double e = energy(field, params).total;
      if (e < 0.0) return EnergyWitness{std::move(field), width, height, e};
    }
  }
  return std::nullopt;
}

namespace {

// Newton iterations on the deflated residual M(u) dE(u) with
// M(u) = prod_i (||u - u_i||^{-2} + 1). Returns the undeflated
// Newton-polished end point when it is a critical point.
std::optional<RadialField> deflated_newton(RadialField u, const std::vector<RadialField>& known,
                                           const KirchhoffParams& params,
                                           const PerturbationSpec& pert, const SolverConfig& cfg) {
  const auto& grid = u.grid_ptr();
  for (int it = 0; it < 200; ++it) {
    Gradient g = gradient(u, params, pert);
    if (!std::isfinite(g.residual)) return std::nullopt;
    if (g.residual <= cfg.tol) return u;
    std::vector<double> rhs(g.dual);
    for (double& v : rhs) v = -v;
    std::vector<double> step;
    try {
      step = Hessian(u, params, pert).solve(rhs);
    } catch (const SolverError&) {
      return std::nullopt;
    }
    const auto delta = field_from_free(grid, std::move(step));
    double log_derivative = 0.0;  // (grad M . delta) / M
    for (const auto& s : known) {
      const auto diff = u - s;
      const double n2 = h1_inner(diff, diff);
      const double m = 1.0 / n2 + 1.0;
      log_derivative += -2.0 / (n2 * n2) * h1_inner(diff, delta) / m;
    }
    double factor = 1.0 / (1.0 - log_derivative);
    if (!std::isfinite(factor) || factor <= 0.0) factor = 1.0;
    u.axpy(std::min(factor, 1e3), delta);
    if (!(h1_norm(u) < 1e8)) return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace

std::vector<SolveResult> multistart_search(const KirchhoffParams& params,
                                           const PerturbationSpec& pert, const GridPtr& grid,
                                           const SolverConfig& cfg) {
  validate(params);
  validate(cfg);
  const Dimension d = grid->dimension();
  std::vector<std::string> notes = validate(pert, d);
  if (!classify(d, params).palais_smale) {
    notes.push_back("regime key does not exceed PS_d; critical points may fail to exist: " +
                    regime_note(d, params));
  }

  std::vector<SolveResult> found;
  auto admit = [&](SolveResult r) {
    if (!r.converged || r.residual > cfg.tol) return;
    for (const auto& f : found) {
      if (h1_norm(f.field - r.field) <= kDuplicateDistance) return;
    }
    r.method = SolveMethod::multistart;
    r.diagnostics.insert(r.diagnostics.end(), notes.begin(), notes.end());
    found.push_back(std::move(r));
  };

  // Phase 1: plain descent from the origin and from random smooth fields.
  constexpr double kScales[] = {0.1, 1.0, 10.0, 100.0};
  const std::size_t starts = std::max<std::size_t>(cfg.starts, 1);
  std::vector<std::optional<SolveResult>> runs(starts + 1);
  parallel_for(starts + 1, [&](std::size_t i) {
    if (i == 0) {
      runs[i] = minimize(params, pert, grid, cfg);
      return;
    }
    auto rng = stream(cfg.seed, i, 2);
    runs[i] = minimize(params, pert, grid, cfg, smooth_random_field(grid, rng, kScales[i % 4]));
  });
  for (auto& r : runs) admit(std::move(*r));

  // Phase 2: deflated Newton, repelled from everything found so far.
  for (std::size_t i = 0; i < starts; ++i) {
    std::vector<RadialField> known;
    for (const auto& f : found) known.push_back(f.field);
    auto rng = stream(cfg.seed, i, 3);
    auto start = smooth_random_field(grid, rng, kScales[i % 4]);
    auto hit = deflated_newton(std::move(start), known, params, pert, cfg);
    if (!hit) continue;
    SolveResult r{std::move(*hit)};
    Gradient g = gradient(r.field, params, pert);
    for (int k = 0; k < 20 && g.residual > cfg.tol; ++k) {
      if (!newton_polish_step(r.field, g, params, pert)) break;
    }
    r.residual = g.residual;
    r.status = g.residual <= cfg.tol ? SolveStatus::converged : SolveStatus::stalled;
    r.diagnostics.push_back("found by deflated Newton");
    admit(finish(std::move(r), params, pert));
  }
  return found;
}

}  // namespace kirchhoff
