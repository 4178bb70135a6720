#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "kirchhoff/constants.hpp"
#include "kirchhoff/energy.hpp"
#include "kirchhoff/radial.hpp"
#include "kirchhoff/solvers.hpp"
#include "kirchhoff/test_functions.hpp"

namespace kirchhoff {

/// Problem description read from TOML:
///
///   [domain]        dimension = 4, radius = 1.0
///   [grid]          n = 200, spacing = "uniform" | "graded", ratio = 1.05
///   [params]        a = 1.0, b = 0.2
///   [perturbation]  h = 1.0 | h_file = "h.csv", lambda, p, mu,
///                   g = "sin" | "atan" | "tanh" | "power", g_q, g_bound
///   [solver]        tol, max_iter, c1, backtrack, starts, seed,
///                   method = "descent" | "fixed-point" | "multistart"
///   [cutoff]        t0 = 1.0, sigma (optional), alpha0 = 1.0
///   [output]        result = "result.json", field = "field.csv"
///   [sweep]         a = [...], b = [...], lambda = [...]
///
/// Every key is optional; unknown sections and keys are rejected.
struct ProblemConfig {
  int dimension = 4;
  double radius = 1.0;

  std::size_t elements = 200;
  Spacing spacing = Spacing::uniform;
  double ratio = 1.05;

  KirchhoffParams params;

  std::optional<double> h_constant;
  std::optional<std::filesystem::path> h_file;  ///< resolved against the config directory
  double lambda = 0.0;
  double p = 3.0;
  double mu = 0.0;
  std::optional<std::string> g;
  double g_q = 2.0;
  double g_bound = 1.0;

  SolverConfig solver;
  SolveMethod method = SolveMethod::descent;

  double t0 = 1.0;
  std::optional<double> sigma;
  double alpha0 = 1.0;

  std::optional<std::filesystem::path> result_path;
  std::optional<std::filesystem::path> field_path;

  std::vector<double> sweep_a;
  std::vector<double> sweep_b;
  std::vector<double> sweep_lambda;
};

/// Parses TOML text. Relative file names are resolved against `base_dir`.
/// Throws ValidationError whose message starts with the offending key
/// path, e.g. "params.b: must be positive".
ProblemConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
ProblemConfig load_config(const std::filesystem::path& path);

/// Replaces the solver seed with the value of KIRCHHOFF_SEED when set.
void apply_environment(ProblemConfig& cfg);

GridPtr build_grid(const ProblemConfig& cfg);
/// Source, power and g terms on `grid`; h_file samples are interpolated
/// linearly at the grid nodes.
PerturbationSpec build_perturbation(const ProblemConfig& cfg, const GridPtr& grid);
/// alpha0 |t|^p / p with p from [perturbation].
Nonlinearity build_nonlinearity(const ProblemConfig& cfg);

}  // namespace kirchhoff
