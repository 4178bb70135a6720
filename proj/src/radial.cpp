#include "kirchhoff/radial.hpp"
#include "kirchhoff/errors.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace kirchhoff {

namespace {

// 5-point Gauss-Legendre rule mapped to [0, 1].
constexpr std::array<double, 5> kGaussAbscissa = {
    0.5 * (1.0 - 0.906179845938663993), 0.5 * (1.0 - 0.538469310105683091), 0.5,
    0.5 * (1.0 + 0.538469310105683091), 0.5 * (1.0 + 0.906179845938663993)};
constexpr std::array<double, 5> kGaussWeight = {
    0.5 * 0.236926885056189088, 0.5 * 0.478628670499366468, 0.5 * 0.568888888888888889,
    0.5 * 0.478628670499366468, 0.5 * 0.236926885056189088};

}  // namespace

Spacing parse_spacing(const std::string& name) {
  if (name == "uniform") return Spacing::uniform;
  if (name == "graded") return Spacing::graded;
  throw ValidationError("unknown grid spacing '" + name + "' (expected uniform or graded)");
}

std::string to_string(Spacing spacing) {
  return spacing == Spacing::uniform ? "uniform" : "graded";
}

std::vector<double> Tridiagonal::apply(std::span<const double> x) const {
  const std::size_t n = size();
  if (x.size() != n) throw ValidationError("tridiagonal apply: size mismatch");
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = diag[i] * x[i];
    if (i > 0) s += lower[i - 1] * x[i - 1];
    if (i + 1 < n) s += upper[i] * x[i + 1];
    y[i] = s;
  }
  return y;
}

std::vector<double> Tridiagonal::solve(std::span<const double> rhs) const {
  const std::size_t n = size();
  if (rhs.size() != n) throw ValidationError("tridiagonal solve: size mismatch");
  std::vector<double> dl = lower, d = diag, du = upper;
  std::vector<double> x(rhs.begin(), rhs.end());
  const lapack_int info = LAPACKE_dgtsv(LAPACK_COL_MAJOR, static_cast<lapack_int>(n), 1,
                                        dl.data(), d.data(), du.data(), x.data(),
                                        static_cast<lapack_int>(n));
  if (info != 0) throw SolverError("tridiagonal solve failed (dgtsv info " + std::to_string(info) + ")");
  return x;
}

RadialGrid::RadialGrid(Dimension d, std::vector<double> nodes) : d_(d), nodes_(std::move(nodes)) {
  if (nodes_.size() < kMinElements + 1) {
    throw ValidationError("radial grid needs at least " + std::to_string(kMinElements) +
                          " elements");
  }
  if (nodes_.front() != 0.0) throw ValidationError("radial grid must start at r = 0");
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    if (!(nodes_[i] > nodes_[i - 1]) || !std::isfinite(nodes_[i])) {
      throw ValidationError("radial grid nodes must be finite and strictly increasing");
    }
  }
  const int dim = d_.value();
  sphere_area_ = dim * unit_ball_volume(d_);

  const std::size_t n = elements();
  stiffness_.resize(n);
  qweights_.resize(n * kGaussPoints);
  qshape_.resize(n * kGaussPoints);
  qradii_.resize(n * kGaussPoints);
  stiffness_matrix_ = Tridiagonal(n);
  for (std::size_t e = 0; e < n; ++e) {
    const double r0 = nodes_[e];
    const double r1 = nodes_[e + 1];
    const double h = r1 - r0;
    stiffness_[e] = sphere_area_ * (std::pow(r1, dim) - std::pow(r0, dim)) / (dim * h * h);
    for (std::size_t q = 0; q < kGaussPoints; ++q) {
      const std::size_t k = e * kGaussPoints + q;
      const double r = r0 + kGaussAbscissa[q] * h;
      qradii_[k] = r;
      qshape_[k] = 1.0 - kGaussAbscissa[q];
      qweights_[k] = sphere_area_ * std::pow(r, dim - 1) * h * kGaussWeight[q];
    }
    stiffness_matrix_.diag[e] += stiffness_[e];
    if (e + 1 < n) {
      stiffness_matrix_.diag[e + 1] += stiffness_[e];
      stiffness_matrix_.upper[e] -= stiffness_[e];
      stiffness_matrix_.lower[e] -= stiffness_[e];
    }
  }
}

double RadialGrid::volume() const {
  return unit_ball_volume(d_) * std::pow(radius(), d_.value());
}

GridPtr make_grid(Dimension d, double radius, std::size_t elements, Spacing spacing,
                  double ratio) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw ValidationError("ball radius must be positive");
  }
  if (elements < RadialGrid::kMinElements) {
    throw ValidationError("grid needs N >= " + std::to_string(RadialGrid::kMinElements) +
                          " elements, got " + std::to_string(elements));
  }
  std::vector<double> nodes(elements + 1);
  if (spacing == Spacing::uniform) {
    for (std::size_t i = 0; i <= elements; ++i) {
      nodes[i] = radius * static_cast<double>(i) / static_cast<double>(elements);
    }
  } else {
    if (!(ratio > 1.0) || !std::isfinite(ratio)) {
      throw ValidationError("graded spacing ratio must be > 1");
    }
    // h_i = h_0 ratio^i, sum of all h_i = R
    const double total = (std::pow(ratio, static_cast<double>(elements)) - 1.0) / (ratio - 1.0);
    double h = radius / total;
    nodes[0] = 0.0;
    for (std::size_t i = 1; i <= elements; ++i, h *= ratio) nodes[i] = nodes[i - 1] + h;
  }
  nodes.back() = radius;
  return std::make_shared<const RadialGrid>(d, std::move(nodes));
}

GridPtr refine(const RadialGrid& grid) {
  const auto src = grid.nodes();
  std::vector<double> nodes;
  nodes.reserve(2 * src.size() - 1);
  for (std::size_t i = 0; i + 1 < src.size(); ++i) {
    nodes.push_back(src[i]);
    nodes.push_back(0.5 * (src[i] + src[i + 1]));
  }
  nodes.push_back(src.back());
  return std::make_shared<const RadialGrid>(grid.dimension(), std::move(nodes));
}

RadialField::RadialField(GridPtr grid) : grid_(std::move(grid)) {
  if (!grid_) throw ValidationError("field needs a grid");
  values_.assign(grid_->nodes_count(), 0.0);
}

RadialField::RadialField(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_) throw ValidationError("field needs a grid");
  if (values_.size() != grid_->nodes_count()) {
    throw ValidationError("field has " + std::to_string(values_.size()) + " values for " +
                          std::to_string(grid_->nodes_count()) + " nodes");
  }
  if (values_.back() != 0.0) {
    throw ValidationError("field violates the Dirichlet condition u(R) = 0");
  }
}

RadialField RadialField::interpolate(GridPtr grid, const std::function<double(double)>& fn) {
  RadialField u(std::move(grid));
  const auto r = u.grid().nodes();
  for (std::size_t i = 0; i + 1 < r.size(); ++i) u.values_[i] = fn(r[i]);
  return u;
}

double RadialField::at(double r) const {
  const auto nodes = grid_->nodes();
  if (r <= 0.0) return values_.front();
  if (r >= nodes.back()) return 0.0;
  const auto it = std::upper_bound(nodes.begin(), nodes.end(), r);
  const std::size_t i = static_cast<std::size_t>(it - nodes.begin()) - 1;
  const double t = (r - nodes[i]) / (nodes[i + 1] - nodes[i]);
  return (1.0 - t) * values_[i] + t * values_[i + 1];
}

void RadialField::require_same_grid(const RadialField& other) const {
  kirchhoff::require_same_grid(*this, other);
}

RadialField& RadialField::operator+=(const RadialField& other) { return axpy(1.0, other); }

RadialField& RadialField::operator-=(const RadialField& other) { return axpy(-1.0, other); }

RadialField& RadialField::operator*=(double c) {
  for (double& v : values_) v *= c;
  values_.back() = 0.0;
  return *this;
}

RadialField& RadialField::axpy(double c, const RadialField& other) {
  require_same_grid(other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += c * other.values_[i];
  return *this;
}

void require_same_grid(const RadialField& u, const RadialField& v) {
  if (u.grid_ptr() != v.grid_ptr() && !(u.grid() == v.grid())) {
    throw ValidationError("fields live on different grids");
  }
}

RadialProfile RadialProfile::constant(GridPtr grid, double value) {
  const std::size_t n = grid->nodes_count();
  return RadialProfile{std::move(grid), std::vector<double>(n, value)};
}

double RadialProfile::at_quadrature(std::size_t element, std::size_t point) const {
  const std::size_t k = element * RadialGrid::kGaussPoints + point;
  const double s = grid->quadrature_left_shape()[k];
  return s * values[element] + (1.0 - s) * values[element + 1];
}

double h1_inner(const RadialField& u, const RadialField& v) {
  require_same_grid(u, v);
  const auto k = u.grid().stiffness_coefficients();
  const auto x = u.values();
  const auto y = v.values();
  double sum = 0.0;
  for (std::size_t e = 0; e < k.size(); ++e) sum += k[e] * (x[e + 1] - x[e]) * (y[e + 1] - y[e]);
  return sum;
}

double h1_norm(const RadialField& u) { return std::sqrt(std::max(0.0, h1_inner(u, u))); }

double power_integral(const RadialField& u, double q) {
  if (!(q > 0.0)) throw DomainError("power integral needs q > 0");
  return integrate(u, [q](double t) { return std::pow(std::abs(t), q); });
}

double lq_norm(const RadialField& u, double q) {
  const double crit = u.grid().dimension().critical_exponent();
  if (!(q >= 1.0) || q > crit * (1.0 + 1e-15)) {
    throw DomainError("L^q norm needs 1 <= q <= 2*");
  }
  return std::pow(power_integral(u, q), 1.0 / q);
}

NormBundle norms(const RadialField& u, std::span<const double> exponents) {
  NormBundle out;
  out.h1 = h1_norm(u);
  for (double q : exponents) out.lq.emplace_back(q, lq_norm(u, q));
  return out;
}

RadialField riesz_representative(const GridPtr& grid, std::span<const double> dual) {
  if (dual.size() != grid->elements()) throw ValidationError("dual vector size mismatch");
  auto z = grid->stiffness().solve(dual);
  z.push_back(0.0);
  return RadialField(grid, std::move(z));
}

double dual_norm(const GridPtr& grid, std::span<const double> dual) {
  const auto z = grid->stiffness().solve(dual);
  double s = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) s += z[i] * dual[i];
  return std::sqrt(std::max(0.0, s));
}

double sobolev_quotient(const RadialField& u) {
  const double crit = u.grid().dimension().critical_exponent();
  const double lq = power_integral(u, crit);
  if (!(lq > 0.0)) throw DomainError("Sobolev quotient of the zero field");
  return h1_inner(u, u) / std::pow(lq, 2.0 / crit);
}

RadialField prolongate(const RadialField& u, const GridPtr& fine) {
  if (fine->dimension() != u.grid().dimension() || fine->radius() != u.grid().radius()) {
    throw ValidationError("prolongation target has a different ball");
  }
  return RadialField::interpolate(fine, [&u](double r) { return u.at(r); });
}

SobolevRatioResult discrete_sobolev_ratio(const GridPtr& grid, const SobolevRatioOptions& options) {
  const double crit = grid->dimension().critical_exponent();
  const double radius = grid->radius();
  const double expo = 0.5 * (grid->dimension().value() - 2);

  RadialField u(grid);
  if (options.initial) {
    require_same_grid(*options.initial, u);
    u = *options.initial;
  } else {
    // Truncated bubbles (eps^2 + r^2)^{-(d-2)/2}; keep the best quotient.
    const double finest = grid->nodes()[1];
    double best = std::numeric_limits<double>::infinity();
    for (double eps = radius; eps >= 0.5 * finest; eps *= 0.5) {
      const double tail = std::pow(eps * eps + radius * radius, -expo);
      auto trial = RadialField::interpolate(grid, [&](double r) {
        return (std::pow(eps * eps + r * r, -expo) - tail) * std::pow(eps, 2.0 * expo);
      });
      const double qv = sobolev_quotient(trial);
      if (qv < best) {
        best = qv;
        u = std::move(trial);
      }
    }
  }
  u *= 1.0 / h1_norm(u);

  SobolevRatioResult result{sobolev_quotient(u), u, 0, false};
  const auto nonlinear = [crit](double t) { return std::pow(std::abs(t), crit - 2.0) * t; };
  const auto slope = [crit](double t) { return (crit - 1.0) * std::pow(std::abs(t), crit - 2.0); };

  // Newton on K v = |v|^{2*-2} v from the rescaled iterate; the critical
  // point reached from a near-minimizer is the discrete minimizer.
  const auto newton = [&](const RadialField& start) -> std::optional<RadialField> {
    RadialField v = start;
    v *= std::pow(h1_inner(v, v) / power_integral(v, crit), 1.0 / (crit - 2.0));
    for (int k = 0; k < 50; ++k) {
      const auto kv = grid->stiffness().apply(v.free_values());
      auto res = load_vector(v, nonlinear);
      for (std::size_t i = 0; i < res.size(); ++i) res[i] = kv[i] - res[i];
      if (dual_norm(grid, res) <= 1e-12 * h1_norm(v)) return v;
      Tridiagonal jac = grid->stiffness();
      const auto m = weighted_mass(v, slope);
      for (std::size_t i = 0; i < jac.size(); ++i) jac.diag[i] -= m.diag[i];
      for (std::size_t i = 0; i + 1 < jac.size(); ++i) {
        jac.lower[i] -= m.lower[i];
        jac.upper[i] -= m.upper[i];
      }
      std::vector<double> step;
      try {
        step = jac.solve(res);
      } catch (const SolverError&) {
        return std::nullopt;
      }
      auto free = v.free_values();
      for (std::size_t i = 0; i < free.size(); ++i) free[i] -= step[i];
      if (!(h1_norm(v) > 0.0) || !std::isfinite(h1_norm(v))) return std::nullopt;
    }
    return std::nullopt;
  };

  double previous = result.ratio;
  for (std::size_t it = 1; it <= options.max_iterations; ++it) {
    RadialField w = riesz_representative(grid, load_vector(u, nonlinear));
    w *= 1.0 / h1_norm(w);
    const double change = h1_norm(w - u);
    u = std::move(w);
    const double current = sobolev_quotient(u);
    result.iterations = it;
    if (current <= result.ratio) {
      result.ratio = current;
      result.minimizer = u;
    }
    const bool stalled = previous - current <= options.relative_tolerance * current;
    previous = current;
    if (stalled && change <= 1e-6) {
      result.converged = true;
      return result;
    }
    if (it % 100 == 0) {
      if (auto v = newton(u); v && power_integral(*v, crit) > 0.0) {
        const double q = sobolev_quotient(*v);
        if (q <= result.ratio * (1.0 + 1e-12)) {
          result.minimizer = (1.0 / h1_norm(*v)) * *v;
          result.ratio = sobolev_quotient(result.minimizer);
          result.converged = true;
          return result;
        }
      }
    }
  }
  throw SolverError("discrete Sobolev quotient did not stall within " +
                    std::to_string(options.max_iterations) + " iterations");
}

}  // namespace kirchhoff
