#include "kirchhoff/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fmt/format.h>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include "kirchhoff/errors.hpp"
#include "kirchhoff/io.hpp"

namespace kirchhoff {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw ValidationError(fmt::format("{}: {}", path, message));
}

class Section {
 public:
  Section(const toml::table* table, std::string name, std::set<std::string> keys)
      : table_(table), name_(std::move(name)) {
    if (!table_) return;
    for (auto&& [key, node] : *table_) {
      (void)node;
      if (!keys.count(std::string(key.str()))) {
        std::string allowed;
        for (const auto& k : keys) allowed += (allowed.empty() ? "" : ", ") + k;
        fail(path(std::string(key.str())), fmt::format("unknown key (allowed: {})", allowed));
      }
    }
  }

  std::string path(const std::string& key) const { return name_ + "." + key; }

  const toml::node* get(const std::string& key) const {
    return table_ ? table_->get(key) : nullptr;
  }

  std::optional<double> real(const std::string& key) const {
    const auto* node = get(key);
    if (!node) return std::nullopt;
    if (auto v = node->value<double>(); v && (node->is_floating_point() || node->is_integer())) {
      if (!std::isfinite(*v)) fail(path(key), "must be finite");
      return v;
    }
    fail(path(key), "must be a number");
  }

  std::optional<std::int64_t> integer(const std::string& key) const {
    const auto* node = get(key);
    if (!node) return std::nullopt;
    if (!node->is_integer()) fail(path(key), "must be an integer");
    return node->value<std::int64_t>();
  }

  std::optional<std::string> text(const std::string& key) const {
    const auto* node = get(key);
    if (!node) return std::nullopt;
    if (!node->is_string()) fail(path(key), "must be a string");
    return node->value<std::string>();
  }

  std::vector<double> reals(const std::string& key) const {
    const auto* node = get(key);
    if (!node) return {};
    const auto* arr = node->as_array();
    if (!arr) fail(path(key), "must be an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < arr->size(); ++i) {
      const auto& item = (*arr)[i];
      auto v = item.value<double>();
      if (!v || !(item.is_floating_point() || item.is_integer()) || !std::isfinite(*v)) {
        fail(fmt::format("{}[{}]", path(key), i), "must be a finite number");
      }
      out.push_back(*v);
    }
    return out;
  }

 private:
  const toml::table* table_;
  std::string name_;
};

const toml::table* section_table(const toml::table& root, const std::string& name) {
  const auto* node = root.get(name);
  if (!node) return nullptr;
  if (!node->is_table()) fail(name, "must be a table");
  return node->as_table();
}

void require_positive(const std::string& path, double v) {
  if (!(v > 0.0)) fail(path, fmt::format("must be positive (got {})", v));
}

void require_nonnegative(const std::string& path, double v) {
  if (!(v >= 0.0)) fail(path, fmt::format("must be nonnegative (got {})", v));
}

}  // namespace

ProblemConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  toml::table root;
  try {
    root = toml::parse(text);
  } catch (const toml::parse_error& e) {
    throw ValidationError(fmt::format("config line {}, column {}: {}", e.source().begin.line,
                                      e.source().begin.column, e.description()));
  }
  const std::set<std::string> sections{"domain", "grid",   "params", "perturbation", "solver",
                                       "cutoff", "output", "sweep"};
  for (auto&& [key, node] : root) {
    (void)node;
    if (!sections.count(std::string(key.str()))) fail(std::string(key.str()), "unknown section");
  }

  ProblemConfig cfg;

  const Section domain(section_table(root, "domain"), "domain", {"dimension", "radius"});
  if (auto d = domain.integer("dimension")) {
    if (*d < 4) fail(domain.path("dimension"), fmt::format("must be at least 4 (got {})", *d));
    if (*d > 1000) fail(domain.path("dimension"), fmt::format("is unreasonably large (got {})", *d));
    cfg.dimension = static_cast<int>(*d);
  }
  if (auto r = domain.real("radius")) {
    require_positive(domain.path("radius"), *r);
    cfg.radius = *r;
  }

  const Section grid(section_table(root, "grid"), "grid", {"n", "spacing", "ratio"});
  if (auto n = grid.integer("n")) {
    if (*n < static_cast<std::int64_t>(RadialGrid::kMinElements)) {
      fail(grid.path("n"), fmt::format("must be at least {} (got {})", RadialGrid::kMinElements, *n));
    }
    cfg.elements = static_cast<std::size_t>(*n);
  }
  if (auto s = grid.text("spacing")) {
    try {
      cfg.spacing = parse_spacing(*s);
    } catch (const std::exception& e) {
      fail(grid.path("spacing"), e.what());
    }
  }
  if (auto r = grid.real("ratio")) {
    if (!(*r > 1.0)) fail(grid.path("ratio"), fmt::format("must be greater than 1 (got {})", *r));
    cfg.ratio = *r;
  }

  const Section params(section_table(root, "params"), "params", {"a", "b"});
  if (auto a = params.real("a")) {
    require_positive(params.path("a"), *a);
    cfg.params.a = *a;
  }
  if (auto b = params.real("b")) {
    require_positive(params.path("b"), *b);
    cfg.params.b = *b;
  }

  const Section pert(section_table(root, "perturbation"), "perturbation",
                     {"h", "h_file", "lambda", "p", "mu", "g", "g_q", "g_bound"});
  cfg.h_constant = pert.real("h");
  if (cfg.h_constant) require_positive(pert.path("h"), *cfg.h_constant);
  if (auto f = pert.text("h_file")) {
    if (cfg.h_constant) fail(pert.path("h_file"), "give either h or h_file, not both");
    std::filesystem::path file(*f);
    cfg.h_file = file.is_absolute() ? file : base_dir / file;
  }
  if (auto l = pert.real("lambda")) {
    require_nonnegative(pert.path("lambda"), *l);
    cfg.lambda = *l;
  }
  const double crit = Dimension(cfg.dimension).critical_exponent();
  if (auto p = pert.real("p")) {
    if (!(*p > 2.0 && *p < crit)) {
      fail(pert.path("p"), fmt::format("must lie in (2, 2*) = (2, {:.6g}) (got {})", crit, *p));
    }
    cfg.p = *p;
  }
  if (auto m = pert.real("mu")) {
    require_nonnegative(pert.path("mu"), *m);
    cfg.mu = *m;
  }
  if (auto g = pert.text("g")) {
    try {
      make_g_term(*g);
    } catch (const std::exception& e) {
      fail(pert.path("g"), e.what());
    }
    cfg.g = *g;
  }
  if (auto q = pert.real("g_q")) {
    if (!(*q > 1.0 && *q < crit)) {
      fail(pert.path("g_q"), fmt::format("must lie in (1, 2*) = (1, {:.6g}) (got {})", crit, *q));
    }
    cfg.g_q = *q;
  }
  if (auto m = pert.real("g_bound")) {
    require_positive(pert.path("g_bound"), *m);
    cfg.g_bound = *m;
  }
  if (cfg.mu > 0.0 && !cfg.g) fail(pert.path("g"), "required when mu > 0");

  const Section solver(section_table(root, "solver"), "solver",
                       {"tol", "max_iter", "c1", "backtrack", "starts", "seed", "method"});
  if (auto t = solver.real("tol")) {
    require_positive(solver.path("tol"), *t);
    cfg.solver.tol = *t;
  }
  if (auto m = solver.integer("max_iter")) {
    if (*m < 1) fail(solver.path("max_iter"), "must be at least 1");
    cfg.solver.max_iter = static_cast<std::size_t>(*m);
  }
  if (auto c = solver.real("c1")) {
    if (!(*c > 0.0 && *c < 1.0)) fail(solver.path("c1"), "must lie in (0, 1)");
    cfg.solver.line_search.c1 = *c;
  }
  if (auto c = solver.real("backtrack")) {
    if (!(*c > 0.0 && *c < 1.0)) fail(solver.path("backtrack"), "must lie in (0, 1)");
    cfg.solver.line_search.backtrack = *c;
  }
  if (auto s = solver.integer("starts")) {
    if (*s < 1) fail(solver.path("starts"), "must be at least 1");
    cfg.solver.starts = static_cast<std::size_t>(*s);
  }
  if (auto s = solver.integer("seed")) {
    if (*s < 0) fail(solver.path("seed"), "must be nonnegative");
    cfg.solver.seed = static_cast<std::uint64_t>(*s);
  }
  if (auto m = solver.text("method")) {
    try {
      cfg.method = parse_solve_method(*m);
    } catch (const std::exception& e) {
      fail(solver.path("method"), e.what());
    }
  }

  const Section cutoff(section_table(root, "cutoff"), "cutoff", {"t0", "sigma", "alpha0"});
  if (auto t = cutoff.real("t0")) {
    require_positive(cutoff.path("t0"), *t);
    cfg.t0 = *t;
  }
  if (auto s = cutoff.real("sigma")) {
    if (!(*s > 0.0 && *s < 1.0)) fail(cutoff.path("sigma"), "must lie in (0, 1)");
    cfg.sigma = *s;
  }
  if (auto a = cutoff.real("alpha0")) {
    require_positive(cutoff.path("alpha0"), *a);
    cfg.alpha0 = *a;
  }

  const Section output(section_table(root, "output"), "output", {"result", "field"});
  if (auto r = output.text("result")) cfg.result_path = std::filesystem::path(*r);
  if (auto f = output.text("field")) cfg.field_path = std::filesystem::path(*f);

  const Section sweep(section_table(root, "sweep"), "sweep", {"a", "b", "lambda"});
  cfg.sweep_a = sweep.reals("a");
  cfg.sweep_b = sweep.reals("b");
  cfg.sweep_lambda = sweep.reals("lambda");
  for (std::size_t i = 0; i < cfg.sweep_a.size(); ++i) {
    require_positive(fmt::format("sweep.a[{}]", i), cfg.sweep_a[i]);
  }
  for (std::size_t i = 0; i < cfg.sweep_b.size(); ++i) {
    require_positive(fmt::format("sweep.b[{}]", i), cfg.sweep_b[i]);
  }
  for (std::size_t i = 0; i < cfg.sweep_lambda.size(); ++i) {
    require_nonnegative(fmt::format("sweep.lambda[{}]", i), cfg.sweep_lambda[i]);
  }
  return cfg;
}

ProblemConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(fmt::format("cannot read config file '{}'", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.parent_path());
}

void apply_environment(ProblemConfig& cfg) {
  const char* raw = std::getenv("KIRCHHOFF_SEED");
  if (!raw) return;
  const std::string text(raw);
  std::uint64_t seed = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), seed);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw ValidationError(fmt::format("KIRCHHOFF_SEED: '{}' is not a nonnegative integer", text));
  }
  cfg.solver.seed = seed;
}

GridPtr build_grid(const ProblemConfig& cfg) {
  return make_grid(Dimension(cfg.dimension), cfg.radius, cfg.elements, cfg.spacing, cfg.ratio);
}

PerturbationSpec build_perturbation(const ProblemConfig& cfg, const GridPtr& grid) {
  PerturbationSpec pert;
  if (cfg.h_constant) pert.source = RadialProfile::constant(grid, *cfg.h_constant);
  if (cfg.h_file) {
    std::ifstream in(*cfg.h_file);
    if (!in) fail("perturbation.h_file", fmt::format("cannot read '{}'", cfg.h_file->string()));
    std::vector<std::pair<double, double>> samples;
    try {
      samples = read_profile_csv(in);
    } catch (const ValidationError& e) {
      fail("perturbation.h_file", e.what());
    }
    RadialProfile h{grid, {}};
    for (double r : grid->nodes()) {
      if (r < samples.front().first || r > samples.back().first) {
        fail("perturbation.h_file", fmt::format("samples do not cover r = {}", r));
      }
      auto hi = std::lower_bound(samples.begin(), samples.end(), std::make_pair(r, -std::numeric_limits<double>::infinity()));
      if (hi->first == r || hi == samples.begin()) {
        h.values.push_back(hi->second);
        continue;
      }
      auto lo = hi - 1;
      const double t = (r - lo->first) / (hi->first - lo->first);
      h.values.push_back((1.0 - t) * lo->second + t * hi->second);
    }
    pert.source = std::move(h);
  }
  pert.lambda = cfg.lambda;
  pert.power = cfg.p;
  pert.mu = cfg.mu;
  if (cfg.g) pert.g = make_g_term(*cfg.g, cfg.g_q, cfg.g_bound);
  try {
    validate(pert, grid->dimension());
  } catch (const ValidationError& e) {
    fail("perturbation", e.what());
  }
  return pert;
}

Nonlinearity build_nonlinearity(const ProblemConfig& cfg) {
  auto f = power_nonlinearity(cfg.p);
  const double alpha0 = cfg.alpha0;
  if (alpha0 != 1.0) {
    f.name = fmt::format("{} * {}", alpha0, f.name);
    f.fn = [g = f.fn, alpha0](double t) { return alpha0 * g(t); };
    f.primitive = [g = f.primitive, alpha0](double t) { return alpha0 * g(t); };
  }
  return f;
}

}  // namespace kirchhoff
