#include "kirchhoff/cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <fmt/format.h>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "kirchhoff/config.hpp"
#include "kirchhoff/errors.hpp"
#include "kirchhoff/io.hpp"
#include "kirchhoff/parallel.hpp"
#include "kirchhoff/scalar_analysis.hpp"
#include "kirchhoff/solvers.hpp"
#include "kirchhoff/test_functions.hpp"

namespace kirchhoff::cli {

namespace {

// Writes to `path` when given, otherwise to `out`.
template <class Fn>
void emit(const std::string& path, std::ostream& out, Fn&& write) {
  if (path.empty()) {
    write(out);
    return;
  }
  std::ofstream file(path);
  if (!file) throw ValidationError(fmt::format("cannot write '{}'", path));
  write(file);
  if (!file) throw ValidationError(fmt::format("failed writing '{}'", path));
}

void emit_json(const std::string& path, std::ostream& out, const Json& j) {
  emit(path, out, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
}

ProblemConfig read_config(const std::string& path) {
  auto cfg = load_config(path);
  apply_environment(cfg);
  return cfg;
}

std::string path_or(const std::string& flag, const std::optional<std::filesystem::path>& fallback) {
  if (!flag.empty()) return flag;
  return fallback ? fallback->string() : std::string();
}

int cmd_constants(int dim, bool json, std::ostream& out) {
  const Dimension d(dim);
  const auto c = sharp_constants(d);
  if (json) {
    Json j = c;
    j["dimension"] = dim;
    out << j.dump(2) << '\n';
    return kExitOk;
  }
  out << fmt::format("d       {}\n", dim) << "omega_d " << format_double(c.omega) << '\n'
      << "S_d     " << format_double(c.sobolev) << '\n'
      << "L_d     " << format_double(c.lsc) << '\n'
      << "PS_d    " << format_double(c.ps) << '\n'
      << "C_d     " << format_double(c.convex) << '\n';
  return kExitOk;
}

int cmd_scalar(const std::string& kind, int dim, double a, double b, std::optional<double> eval,
               bool min, bool certify, std::ostream& out) {
  if (static_cast<int>(eval.has_value()) + min + certify != 1) {
    throw ValidationError("scalar: give exactly one of --eval, --min, --certify");
  }
  const ScalarProfile profile(parse_profile_kind(kind), Dimension(dim), KirchhoffParams{a, b});
  Json j{{"kind", std::string(to_string(profile.kind()))}, {"dimension", dim}, {"a", a}, {"b", b}};
  if (eval) {
    j["x"] = *eval;
    j["value"] = profile(*eval);
    j["derivative"] = profile.derivative(*eval);
  } else if (min) {
    const auto x = minimizer(profile);
    j["minimizer"] = x ? Json(*x) : Json(nullptr);
    j["value"] = x ? Json(profile(*x)) : Json(nullptr);
    if (!x) j["note"] = "d = 4: the profile is affine in its leading power, no interior minimum";
  } else {
    j["certificate"] = positivity_certificate(profile);
  }
  out << j.dump(2) << '\n';
  return kExitOk;
}

int cmd_energy(const std::string& config_path, const std::string& field_path, std::ostream& out) {
  const auto cfg = read_config(config_path);
  std::ifstream in(field_path);
  if (!in) throw ValidationError(fmt::format("cannot read field file '{}'", field_path));
  const auto u = read_field_csv(in, Dimension(cfg.dimension));
  const auto pert = build_perturbation(cfg, u.grid_ptr());
  out << Json(energy(u, cfg.params, pert)).dump(2) << '\n';
  return kExitOk;
}

int cmd_solve(const std::string& config_path, const std::string& method_flag,
              const std::string& out_flag, const std::string& field_flag, std::ostream& out,
              std::ostream& err) {
  const auto cfg = read_config(config_path);
  const auto method = method_flag.empty() ? cfg.method : parse_solve_method(method_flag);
  const auto grid = build_grid(cfg);
  const auto pert = build_perturbation(cfg, grid);
  const auto result_path = path_or(out_flag, cfg.result_path);
  const auto field_path = path_or(field_flag, cfg.field_path);

  if (method == SolveMethod::multistart) {
    const auto found = multistart_search(cfg.params, pert, grid, cfg.solver);
    Json list = Json::array();
    for (const auto& r : found) list.push_back(result_to_json(r));
    emit_json(result_path, out, Json{{"method", "multistart"}, {"count", found.size()}, {"solutions", list}});
    if (!field_path.empty() && !found.empty()) {
      emit(field_path, out, [&](std::ostream& os) { write_field_csv(os, found.front().field); });
    }
    if (found.empty()) {
      err << "error: multistart search found no converged critical point\n";
      return kExitSolver;
    }
    return kExitOk;
  }

  const auto res = method == SolveMethod::fixed_point ? fixed_point_solve(cfg.params, pert, grid, cfg.solver)
                                                      : minimize(cfg.params, pert, grid, cfg.solver);
  emit_json(result_path, out, result_to_json(res));
  if (!field_path.empty()) {
    emit(field_path, out, [&](std::ostream& os) { write_field_csv(os, res.field); });
  }
  if (!res.converged) {
    err << fmt::format("error: {} solver stopped with status {} (residual {:.3g})\n",
                       to_string(res.method), to_string(res.status), res.residual);
    return kExitSolver;
  }
  return kExitOk;
}

int cmd_sweep(const std::string& config_path, const std::string& out_flag, std::ostream& out) {
  const auto cfg = read_config(config_path);
  const auto grid = build_grid(cfg);
  const Dimension d(cfg.dimension);
  const auto as = cfg.sweep_a.empty() ? std::vector<double>{cfg.params.a} : cfg.sweep_a;
  const auto bs = cfg.sweep_b.empty() ? std::vector<double>{cfg.params.b} : cfg.sweep_b;
  const auto ls = cfg.sweep_lambda.empty() ? std::vector<double>{cfg.lambda} : cfg.sweep_lambda;
  if (cfg.method == SolveMethod::multistart) {
    throw ValidationError("solver.method: sweep supports descent and fixed-point");
  }

  struct Triple { double a, b, lambda; };
  std::vector<Triple> triples;
  for (double a : as) {
    for (double b : bs) {
      for (double l : ls) triples.push_back({a, b, l});
    }
  }
  std::vector<PerturbationSpec> perts;
  for (const auto& t : triples) {
    auto c = cfg;
    c.lambda = t.lambda;
    perts.push_back(build_perturbation(c, grid));
  }

  std::vector<SweepRow> rows(triples.size());
  parallel_for(triples.size(), [&](std::size_t i) {
    const KirchhoffParams params{triples[i].a, triples[i].b};
    const auto res = cfg.method == SolveMethod::fixed_point
                         ? fixed_point_solve(params, perts[i], grid, cfg.solver)
                         : minimize(params, perts[i], grid, cfg.solver);
    auto& row = rows[i];
    row.a = params.a;
    row.b = params.b;
    row.lambda = triples[i].lambda;
    row.regime = classify(d, params);
    row.status = res.status;
    row.converged = res.converged;
    row.residual = res.residual;
    row.energy = res.energy.total;
    row.h1_norm = h1_norm(res.field);
    row.iterations = res.iterations;
  });
  emit(path_or(out_flag, cfg.result_path), out, [&](std::ostream& os) { write_sweep_csv(os, rows); });
  return kExitOk;
}

Json lambda_tilde_json(const ProblemConfig& cfg, LambdaTildeResult* keep) {
  const Dimension d(cfg.dimension);
  const double p = cfg.p;
  PrimitiveSpec h{[p](double t) { return std::pow(std::abs(t), p) / p; }, cfg.t0, std::nullopt,
                  cfg.alpha0};
  const auto lt = lambda_tilde(d, cfg.radius, cfg.params, h, cfg.sigma);
  if (keep) *keep = lt;
  return Json{{"lambda_tilde", lt.value},
              {"t0", lt.cutoff.t0},
              {"sigma", lt.cutoff.sigma},
              {"radius", lt.cutoff.radius},
              {"h_at_t0", lt.h_at_t0},
              {"h_max", lt.h_max},
              {"alpha0", cfg.alpha0},
              {"cutoff_norm_squared", cutoff_h1_norm_squared(lt.cutoff)},
              {"critical_lower_bound", cutoff_critical_lower_bound(lt.cutoff)},
              {"primitive_lower_bound", cutoff_primitive_lower_bound(lt.cutoff, lt.h_at_t0, lt.h_max)}};
}

int cmd_lambda(const std::string& config_path, const std::string& out_flag, bool with_field,
               std::ostream& out) {
  const auto cfg = read_config(config_path);
  const auto grid = build_grid(cfg);
  LambdaTildeResult lt;
  Json j{{"dimension", cfg.dimension}, {"params", cfg.params}, {"p", cfg.p}};
  j.update(lambda_tilde_json(cfg, &lt));
  const auto f = build_nonlinearity(cfg);
  const auto star = lambda_star_estimate(cfg.params, f, grid, cfg.solver,
                                         {build_cutoff(lt.cutoff, grid)});
  j["lambda_star"] = star.estimate;
  j["lambda_star_starts"] = star.starts;
  j["lambda_star_iterations"] = star.iterations;
  j["lambda_star_relative_residual"] = star.relative_residual;
  j["gap"] = lt.value - star.estimate;
  j["upper_bound_holds"] = star.estimate <= lt.value;
  j["note"] = "lambda_star is computed over discrete radial fields and bounds the infimum from above";
  if (with_field) j["argmin"] = field_to_json(star.argmin);
  emit_json(path_or(out_flag, cfg.result_path), out, j);
  return kExitOk;
}

int cmd_curves(const std::string& dims, double a_min, double a_max, std::size_t a_count,
               const std::string& out_flag, std::ostream& out) {
  if (!(a_min > 0.0) || !(a_max >= a_min)) {
    throw ValidationError("curves: need 0 < --a-min <= --a-max");
  }
  if (a_count < 1) throw ValidationError("curves: --a-count must be at least 1");
  std::vector<double> a_grid;
  for (std::size_t i = 0; i < a_count; ++i) {
    a_grid.push_back(a_count == 1 ? a_min : a_min + (a_max - a_min) * i / (a_count - 1.0));
  }
  const auto rows = threshold_curves(parse_dimension_list(dims), a_grid);
  emit(out_flag, out, [&](std::ostream& os) { write_curves_csv(os, rows); });
  return kExitOk;
}

}  // namespace

std::vector<int> parse_dimension_list(const std::string& text) {
  const auto to_int = [&](std::string_view s) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
      throw ValidationError(fmt::format("--dims: '{}' is not an integer", s));
    }
    if (v < 4) throw ValidationError(fmt::format("--dims: dimension {} is below 4", v));
    return v;
  };
  std::vector<int> out;
  const std::string_view all(text);
  if (const auto pos = all.find(".."); pos != std::string_view::npos) {
    const int lo = to_int(all.substr(0, pos));
    const int hi = to_int(all.substr(pos + 2));
    if (hi < lo) throw ValidationError(fmt::format("--dims: empty range '{}'", text));
    for (int d = lo; d <= hi; ++d) out.push_back(d);
    return out;
  }
  std::size_t start = 0;
  for (;;) {
    const auto pos = all.find(',', start);
    out.push_back(to_int(all.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Regime constants and radial Dirichlet solvers for the critical Kirchhoff energy",
               "kirchhoff"};
  app.require_subcommand(1);
  app.footer(
      "Exit codes: 0 success, 1 invalid input, 2 solver did not converge.\n"
      "KIRCHHOFF_SEED overrides solver.seed of any config file.");

  int dim = 4;
  double a = 1.0, b = 1.0;

  auto* constants = app.add_subcommand("constants", "Print omega_d, S_d, L_d, PS_d, C_d");
  bool json = false;
  constants->add_option("--dim", dim, "Dimension d >= 4")->required();
  constants->add_flag("--json", json, "JSON output");

  auto* classify_cmd = app.add_subcommand("classify", "Regime report of (a, b) as JSON");
  double tol = 0.0;
  classify_cmd->add_option("--dim", dim, "Dimension d >= 4")->required();
  classify_cmd->add_option("--a", a, "Kirchhoff a > 0")->required();
  classify_cmd->add_option("--b", b, "Kirchhoff b > 0")->required();
  classify_cmd->add_option("--tol", tol, "Relative boundary band");

  auto* scalar = app.add_subcommand("scalar", "Evaluate, minimize or certify f, ft or fb");
  std::string kind;
  std::optional<double> eval;
  bool min = false, certify = false;
  scalar->add_option("--kind", kind, "Profile: f, ft or fb")->required()->check(
      CLI::IsMember({"f", "ft", "fb"}));
  scalar->add_option("--dim", dim, "Dimension d >= 4")->required();
  scalar->add_option("--a", a, "Kirchhoff a > 0")->required();
  scalar->add_option("--b", b, "Kirchhoff b > 0")->required();
  scalar->add_option("--eval", eval, "Evaluate at x >= 0");
  scalar->add_flag("--min", min, "Interior minimizer and minimum");
  scalar->add_flag("--certify", certify, "Positivity certificate");

  std::string config, field, out_path, method, field_out;

  auto* energy_cmd = app.add_subcommand("energy", "Energy breakdown of a field CSV");
  energy_cmd->add_option("--config", config, "Problem TOML")->required();
  energy_cmd->add_option("--field", field, "Field CSV (r,u)")->required();

  auto* solve = app.add_subcommand("solve", "Solve the configured Dirichlet problem");
  solve->add_option("--config", config, "Problem TOML")->required();
  solve->add_option("--method", method, "descent, fixed-point or multistart")
      ->check(CLI::IsMember({"descent", "fixed-point", "multistart"}));
  solve->add_option("--out", out_path, "Result JSON (default: output.result or stdout)");
  solve->add_option("--field-out", field_out, "Field CSV (default: output.field)");

  auto* sweep = app.add_subcommand("sweep", "Solve every (a, b, lambda) of [sweep]; CSV rows");
  sweep->add_option("--config", config, "Problem TOML")->required();
  sweep->add_option("--out", out_path, "CSV path (default: output.result or stdout)");

  auto* star = app.add_subcommand("lambda-star", "Estimate lambda* and compare with lambda-tilde");
  star->add_option("--config", config, "Problem TOML")->required();
  star->add_option("--out", out_path, "JSON path (default: stdout)");

  auto* tilde = app.add_subcommand("lambda-tilde", "Cutoff bound lambda-tilde and the lambda* gap");
  tilde->add_option("--config", config, "Problem TOML")->required();
  tilde->add_option("--out", out_path, "JSON path (default: stdout)");

  auto* curves = app.add_subcommand("curves", "Threshold curves b_X(a) = X_d a^{-(d-4)/2} as CSV");
  std::string dims = "4..12";
  double a_min = 0.1, a_max = 10.0;
  std::size_t a_count = 100;
  curves->add_option("--dims", dims, "Dimensions, e.g. 5..12 or 4,6,8")->capture_default_str();
  curves->add_option("--a-min", a_min, "Smallest a")->capture_default_str();
  curves->add_option("--a-max", a_max, "Largest a")->capture_default_str();
  curves->add_option("--a-count", a_count, "Number of equispaced a values")->capture_default_str();
  curves->add_option("--out", out_path, "CSV path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*constants) return cmd_constants(dim, json, out);
    if (*classify_cmd) {
      out << Json(classify(Dimension(dim), KirchhoffParams{a, b}, tol)).dump(2) << '\n';
      return kExitOk;
    }
    if (*scalar) return cmd_scalar(kind, dim, a, b, eval, min, certify, out);
    if (*energy_cmd) return cmd_energy(config, field, out);
    if (*solve) return cmd_solve(config, method, out_path, field_out, out, err);
    if (*sweep) return cmd_sweep(config, out_path, out);
    if (*star) return cmd_lambda(config, out_path, true, out);
    if (*tilde) return cmd_lambda(config, out_path, false, out);
    if (*curves) return cmd_curves(dims, a_min, a_max, a_count, out_path, out);
  } catch (const SolverError& e) {
    err << "error: " << e.what() << '\n';
    return kExitSolver;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitValidation;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"kirchhoff"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace kirchhoff::cli
