#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "kirchhoff/constants.hpp"
#include "kirchhoff/energy.hpp"
#include "kirchhoff/radial.hpp"
#include "kirchhoff/scalar_analysis.hpp"
#include "kirchhoff/solvers.hpp"

namespace kirchhoff {

using Json = nlohmann::ordered_json;

void to_json(Json& j, const KirchhoffParams& p);
void from_json(const Json& j, KirchhoffParams& p);
void to_json(Json& j, const SharpConstants& c);
void from_json(const Json& j, SharpConstants& c);
void to_json(Json& j, const RegimeReport& r);
void from_json(const Json& j, RegimeReport& r);
void to_json(Json& j, const EnergyBreakdown& e);
void from_json(const Json& j, EnergyBreakdown& e);
void to_json(Json& j, const PositivityCertificate& c);

/// {"dimension": d, "r": [...], "u": [...]}
Json field_to_json(const RadialField& u);
RadialField field_from_json(const Json& j);

/// Solver result including the field. Doubles are written with enough
/// digits to re-parse exactly.
Json result_to_json(const SolveResult& res);
SolveResult result_from_json(const Json& j);

/// Two-column CSV "r,u", one row per node.
void write_field_csv(std::ostream& os, const RadialField& u);
/// The r column defines the grid. Throws ValidationError on malformed
/// input or a nonzero boundary value.
RadialField read_field_csv(std::istream& is, Dimension d);

/// Two-column CSV "r,h"; returns the (r, h) samples.
std::vector<std::pair<double, double>> read_profile_csv(std::istream& is);

struct CurveRow {
  int d = 4;
  double a = 0.0;
  double b_lsc = 0.0;
  double b_ps = 0.0;
  double b_convex = 0.0;

  friend bool operator==(const CurveRow&, const CurveRow&) = default;
};

/// b_X = X_d a^{-(d-4)/2} for X in {L, PS, C}, every d and a.
std::vector<CurveRow> threshold_curves(const std::vector<int>& dims, const std::vector<double>& a_grid);
void write_curves_csv(std::ostream& os, const std::vector<CurveRow>& rows);
std::vector<CurveRow> read_curves_csv(std::istream& is);

struct SweepRow {
  double a = 0.0;
  double b = 0.0;
  double lambda = 0.0;
  RegimeReport regime;
  SolveStatus status = SolveStatus::max_iterations;
  bool converged = false;
  double residual = 0.0;
  double energy = 0.0;
  double h1_norm = 0.0;
  std::size_t iterations = 0;

  friend bool operator==(const SweepRow&, const SweepRow&) = default;
};

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);
/// Regime thresholds are not stored in the CSV; they are recomputed from
/// `d` and the flags are checked against the recomputation.
std::vector<SweepRow> read_sweep_csv(std::istream& is, Dimension d);

SolveStatus parse_solve_status(const std::string& name);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double x);

}  // namespace kirchhoff
