#include "kirchhoff/io.hpp"

#include <charconv>
#include <cmath>
#include <fmt/format.h>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "kirchhoff/errors.hpp"

namespace kirchhoff {

namespace {

// JSON has no literal for inf/nan; they travel as strings.
Json number(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

double number(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw ValidationError(fmt::format("expected a number, got {}", j.dump()));
}

double parse_double(std::string_view text, std::size_t line) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
    text.remove_suffix(1);
  }
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ValidationError(fmt::format("line {}: '{}' is not a number", line, text));
  }
  return value;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

// Reads a CSV with the given header. Empty lines are skipped.
std::vector<std::vector<std::string>> read_table(std::istream& is, const std::string& header) {
  std::string line;
  std::size_t lineno = 0;
  bool seen_header = false;
  std::vector<std::vector<std::string>> rows;
  const auto columns = split(header).size();
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!seen_header) {
      if (line != header) {
        throw ValidationError(fmt::format("line {}: expected header '{}', got '{}'", lineno, header, line));
      }
      seen_header = true;
      continue;
    }
    const auto cells = split(line);
    if (cells.size() != columns) {
      throw ValidationError(fmt::format("line {}: expected {} columns, got {}", lineno, columns,
                                        cells.size()));
    }
    rows.emplace_back(cells.begin(), cells.end());
  }
  if (!seen_header) throw ValidationError(fmt::format("missing CSV header '{}'", header));
  return rows;
}

bool parse_bool(const std::string& s) {
  if (s == "true") return true;
  if (s == "false") return false;
  throw ValidationError(fmt::format("'{}' is not a boolean", s));
}

const char* bool_text(bool x) { return x ? "true" : "false"; }

}  // namespace

std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

void to_json(Json& j, const KirchhoffParams& p) { j = Json{{"a", p.a}, {"b", p.b}}; }

void from_json(const Json& j, KirchhoffParams& p) {
  p.a = j.at("a").get<double>();
  p.b = j.at("b").get<double>();
}

void to_json(Json& j, const SharpConstants& c) {
  j = Json{{"omega", c.omega}, {"sobolev", c.sobolev}, {"lsc", c.lsc}, {"ps", c.ps},
           {"convex", c.convex}};
}

void from_json(const Json& j, SharpConstants& c) {
  c.omega = j.at("omega").get<double>();
  c.sobolev = j.at("sobolev").get<double>();
  c.lsc = j.at("lsc").get<double>();
  c.ps = j.at("ps").get<double>();
  c.convex = j.at("convex").get<double>();
}

void to_json(Json& j, const RegimeReport& r) {
  j = Json{{"dimension", r.dimension},
           {"key", r.key},
           {"swlsc", r.swlsc},
           {"palais_smale", r.palais_smale},
           {"convex", r.convex},
           {"strictly_convex", r.strictly_convex},
           {"tolerance", r.tolerance},
           {"thresholds", r.thresholds}};
}

void from_json(const Json& j, RegimeReport& r) {
  r.dimension = j.at("dimension").get<int>();
  r.key = j.at("key").get<double>();
  r.swlsc = j.at("swlsc").get<bool>();
  r.palais_smale = j.at("palais_smale").get<bool>();
  r.convex = j.at("convex").get<bool>();
  r.strictly_convex = j.at("strictly_convex").get<bool>();
  r.tolerance = j.at("tolerance").get<double>();
  r.thresholds = j.at("thresholds").get<SharpConstants>();
}

void to_json(Json& j, const EnergyBreakdown& e) {
  j = Json{{"quad", number(e.quad)},       {"quart", number(e.quart)},
           {"crit", number(e.crit)},       {"poisson", number(e.poisson)},
           {"subcrit", number(e.subcrit)}, {"pert", number(e.pert)},
           {"total", number(e.total)}};
}

void from_json(const Json& j, EnergyBreakdown& e) {
  e.quad = number(j.at("quad"));
  e.quart = number(j.at("quart"));
  e.crit = number(j.at("crit"));
  e.poisson = number(j.at("poisson"));
  e.subcrit = number(j.at("subcrit"));
  e.pert = number(j.at("pert"));
  e.total = number(j.at("total"));
}

void to_json(Json& j, const PositivityCertificate& c) {
  j = Json{{"positive", c.positive},
           {"minimum", number(c.minimum)},
           {"sampled_minimum", number(c.sampled_minimum)},
           {"scale", number(c.scale)},
           {"sampling_agrees", c.sampling_agrees}};
}

Json field_to_json(const RadialField& u) {
  const auto nodes = u.grid().nodes();
  const auto vals = u.values();
  return Json{{"dimension", u.grid().dimension().value()},
              {"r", std::vector<double>(nodes.begin(), nodes.end())},
              {"u", std::vector<double>(vals.begin(), vals.end())}};
}

RadialField field_from_json(const Json& j) {
  const Dimension d(j.at("dimension").get<int>());
  auto grid = std::make_shared<const RadialGrid>(d, j.at("r").get<std::vector<double>>());
  return RadialField(std::move(grid), j.at("u").get<std::vector<double>>());
}

Json result_to_json(const SolveResult& res) {
  Json history = Json::array();
  for (double e : res.energy_history) history.push_back(number(e));
  return Json{{"method", to_string(res.method)},
              {"status", to_string(res.status)},
              {"converged", res.converged},
              {"residual", number(res.residual)},
              {"iterations", res.iterations},
              {"h1_norm", number(h1_norm(res.field))},
              {"energy", res.energy},
              {"energy_history", history},
              {"diagnostics", res.diagnostics},
              {"field", field_to_json(res.field)}};
}

SolveResult result_from_json(const Json& j) {
  SolveResult res{field_from_json(j.at("field"))};
  res.method = parse_solve_method(j.at("method").get<std::string>());
  res.status = parse_solve_status(j.at("status").get<std::string>());
  res.converged = j.at("converged").get<bool>();
  res.residual = number(j.at("residual"));
  res.iterations = j.at("iterations").get<std::size_t>();
  res.energy = j.at("energy").get<EnergyBreakdown>();
  for (const auto& e : j.at("energy_history")) res.energy_history.push_back(number(e));
  res.diagnostics = j.at("diagnostics").get<std::vector<std::string>>();
  return res;
}

SolveStatus parse_solve_status(const std::string& name) {
  for (auto s : {SolveStatus::converged, SolveStatus::max_iterations, SolveStatus::unbounded_below,
                 SolveStatus::diverged, SolveStatus::stalled}) {
    if (to_string(s) == name) return s;
  }
  throw ValidationError(fmt::format("unknown solver status '{}'", name));
}

void write_field_csv(std::ostream& os, const RadialField& u) {
  os << "r,u\n";
  const auto nodes = u.grid().nodes();
  for (std::size_t i = 0; i < u.size(); ++i) {
    os << format_double(nodes[i]) << ',' << format_double(u[i]) << '\n';
  }
}

RadialField read_field_csv(std::istream& is, Dimension d) {
  const auto rows = read_table(is, "r,u");
  std::vector<double> r, u;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    r.push_back(parse_double(rows[i][0], i + 2));
    u.push_back(parse_double(rows[i][1], i + 2));
  }
  auto grid = std::make_shared<const RadialGrid>(d, std::move(r));
  return RadialField(std::move(grid), std::move(u));
}

std::vector<std::pair<double, double>> read_profile_csv(std::istream& is) {
  const auto rows = read_table(is, "r,h");
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.emplace_back(parse_double(rows[i][0], i + 2), parse_double(rows[i][1], i + 2));
    if (i > 0 && !(out[i].first > out[i - 1].first)) {
      throw ValidationError(fmt::format("line {}: r must be strictly increasing", i + 2));
    }
  }
  if (out.empty()) throw ValidationError("profile CSV has no rows");
  return out;
}

std::vector<CurveRow> threshold_curves(const std::vector<int>& dims, const std::vector<double>& a_grid) {
  std::vector<CurveRow> rows;
  for (int dv : dims) {
    const Dimension d(dv);
    const auto c = sharp_constants(d);
    for (double a : a_grid) {
      if (!(a > 0.0)) throw ValidationError(fmt::format("a-grid value {} must be positive", a));
      const double scale = std::pow(a, -0.5 * (dv - 4));
      rows.push_back(CurveRow{dv, a, c.lsc * scale, c.ps * scale, c.convex * scale});
    }
  }
  return rows;
}

void write_curves_csv(std::ostream& os, const std::vector<CurveRow>& rows) {
  os << "d,a,b_L,b_PS,b_C\n";
  for (const auto& r : rows) {
    os << r.d << ',' << format_double(r.a) << ',' << format_double(r.b_lsc) << ','
       << format_double(r.b_ps) << ',' << format_double(r.b_convex) << '\n';
  }
}

std::vector<CurveRow> read_curves_csv(std::istream& is) {
  std::vector<CurveRow> out;
  const auto rows = read_table(is, "d,a,b_L,b_PS,b_C");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::size_t line = i + 2;
    const double d = parse_double(rows[i][0], line);
    if (d != std::floor(d)) throw ValidationError(fmt::format("line {}: d must be an integer", line));
    out.push_back(CurveRow{static_cast<int>(d), parse_double(rows[i][1], line),
                           parse_double(rows[i][2], line), parse_double(rows[i][3], line),
                           parse_double(rows[i][4], line)});
  }
  return out;
}

namespace {
constexpr const char* kSweepHeader =
    "a,b,lambda,key,swlsc,palais_smale,convex,strictly_convex,status,converged,residual,energy,"
    "h1_norm,iterations";
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << kSweepHeader << '\n';
  for (const auto& r : rows) {
    os << format_double(r.a) << ',' << format_double(r.b) << ',' << format_double(r.lambda) << ','
       << format_double(r.regime.key) << ',' << bool_text(r.regime.swlsc) << ','
       << bool_text(r.regime.palais_smale) << ',' << bool_text(r.regime.convex) << ','
       << bool_text(r.regime.strictly_convex) << ',' << to_string(r.status) << ','
       << bool_text(r.converged) << ',' << format_double(r.residual) << ','
       << format_double(r.energy) << ',' << format_double(r.h1_norm) << ',' << r.iterations << '\n';
  }
}

std::vector<SweepRow> read_sweep_csv(std::istream& is, Dimension d) {
  std::vector<SweepRow> out;
  const auto rows = read_table(is, kSweepHeader);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::size_t line = i + 2;
    const auto& c = rows[i];
    SweepRow r;
    r.a = parse_double(c[0], line);
    r.b = parse_double(c[1], line);
    r.lambda = parse_double(c[2], line);
    r.regime = classify(d, KirchhoffParams{r.a, r.b});
    if (parse_double(c[3], line) != r.regime.key || parse_bool(c[4]) != r.regime.swlsc ||
        parse_bool(c[5]) != r.regime.palais_smale || parse_bool(c[6]) != r.regime.convex ||
        parse_bool(c[7]) != r.regime.strictly_convex) {
      throw ValidationError(fmt::format("line {}: regime columns disagree with d = {}", line, d.value()));
    }
    r.status = parse_solve_status(c[8]);
    r.converged = parse_bool(c[9]);
    r.residual = parse_double(c[10], line);
    r.energy = parse_double(c[11], line);
    r.h1_norm = parse_double(c[12], line);
    const double it = parse_double(c[13], line);
    r.iterations = static_cast<std::size_t>(it);
    out.push_back(r);
  }
  return out;
}

}  // namespace kirchhoff
