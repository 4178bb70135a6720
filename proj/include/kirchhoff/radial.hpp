#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kirchhoff/constants.hpp"
#include "kirchhoff/errors.hpp"

namespace kirchhoff {

enum class Spacing { uniform, graded };

Spacing parse_spacing(const std::string& name);
std::string to_string(Spacing spacing);

/// Tridiagonal matrix over the free nodes 0..N-1 (node N carries the
/// Dirichlet condition and is eliminated).
struct Tridiagonal {
  std::vector<double> lower;  // size n-1
  std::vector<double> diag;   // size n
  std::vector<double> upper;  // size n-1

  explicit Tridiagonal(std::size_t n = 0) : lower(n ? n - 1 : 0), diag(n), upper(n ? n - 1 : 0) {}

  std::size_t size() const noexcept { return diag.size(); }
  std::vector<double> apply(std::span<const double> x) const;
  /// Gaussian elimination with partial pivoting (LAPACK dgtsv).
  /// Throws SolverError if the matrix is singular.
  std::vector<double> solve(std::span<const double> rhs) const;
};

/// Mesh 0 = r_0 < ... < r_N = R of the radius of the ball B(0, R) in R^d.
///
/// Radial functions are integrated against the weight |S^{d-1}| r^{d-1}.
/// The grid precomputes the exact element stiffness coefficients and a
/// 5-point Gauss-Legendre rule per element; it is immutable afterwards.
class RadialGrid {
 public:
  static constexpr std::size_t kMinElements = 8;
  static constexpr std::size_t kGaussPoints = 5;

  RadialGrid(Dimension d, std::vector<double> nodes);

  Dimension dimension() const noexcept { return d_; }
  double radius() const noexcept { return nodes_.back(); }
  std::size_t elements() const noexcept { return nodes_.size() - 1; }
  std::size_t nodes_count() const noexcept { return nodes_.size(); }
  std::span<const double> nodes() const noexcept { return nodes_; }
  double sphere_area() const noexcept { return sphere_area_; }

  /// sigma (r_{e+1}^d - r_e^d) / (d h_e^2): exact element stiffness for
  /// piecewise-linear functions.
  std::span<const double> stiffness_coefficients() const noexcept { return stiffness_; }

  // Quadrature rule, element-major: point q of element e sits at index
  // e * kGaussPoints + q. The weight already includes sigma r^{d-1} h_e.
  std::span<const double> quadrature_weights() const noexcept { return qweights_; }
  /// Value of the left hat function at each quadrature point (the right
  /// one is 1 minus this).
  std::span<const double> quadrature_left_shape() const noexcept { return qshape_; }
  std::span<const double> quadrature_radii() const noexcept { return qradii_; }

  /// Stiffness matrix on the free nodes.
  const Tridiagonal& stiffness() const noexcept { return stiffness_matrix_; }

  /// Volume of the ball, |Omega| = omega_d R^d.
  double volume() const;

  friend bool operator==(const RadialGrid& x, const RadialGrid& y) {
    return x.d_ == y.d_ && x.nodes_ == y.nodes_;
  }

 private:
  Dimension d_;
  std::vector<double> nodes_;
  double sphere_area_ = 0.0;
  std::vector<double> stiffness_;
  std::vector<double> qweights_;
  std::vector<double> qshape_;
  std::vector<double> qradii_;
  Tridiagonal stiffness_matrix_;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

/// Uniform nodes r_i = iR/N, or graded nodes whose spacing grows
/// geometrically by `ratio` away from the center.
GridPtr make_grid(Dimension d, double radius, std::size_t elements,
                  Spacing spacing = Spacing::uniform, double ratio = 1.05);

/// Bisects every element. The piecewise-linear space on the result
/// contains the one on `grid`.
GridPtr refine(const RadialGrid& grid);

/// Nodal values u_0..u_N of a continuous piecewise-linear radial profile
/// with u_N = 0.
class RadialField {
 public:
  explicit RadialField(GridPtr grid);
  /// Throws ValidationError unless values has one entry per node and the
  /// last entry is exactly zero.
  RadialField(GridPtr grid, std::vector<double> values);

  /// Nodal interpolation of fn. The boundary value is set to zero.
  static RadialField interpolate(GridPtr grid, const std::function<double(double)>& fn);

  const RadialGrid& grid() const noexcept { return *grid_; }
  const GridPtr& grid_ptr() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

  /// Values on the free nodes 0..N-1; writing through this view cannot
  /// break the boundary condition.
  std::span<double> free_values() noexcept { return {values_.data(), values_.size() - 1}; }
  std::span<const double> free_values() const noexcept {
    return {values_.data(), values_.size() - 1};
  }

  /// Piecewise-linear evaluation; zero beyond the radius.
  double at(double r) const;

  RadialField& operator+=(const RadialField& other);
  RadialField& operator-=(const RadialField& other);
  RadialField& operator*=(double c);
  /// this += c * other
  RadialField& axpy(double c, const RadialField& other);

  friend RadialField operator+(RadialField x, const RadialField& y) { return x += y; }
  friend RadialField operator-(RadialField x, const RadialField& y) { return x -= y; }
  friend RadialField operator*(double c, RadialField x) { return x *= c; }

  friend bool operator==(const RadialField& x, const RadialField& y) {
    return (x.grid_ == y.grid_ || *x.grid_ == *y.grid_) && x.values_ == y.values_;
  }

 private:
  void require_same_grid(const RadialField& other) const;

  GridPtr grid_;
  std::vector<double> values_;
};

/// Throws ValidationError if the two fields live on different grids.
void require_same_grid(const RadialField& u, const RadialField& v);

/// Nodal data without a boundary condition (e.g. a source term h).
struct RadialProfile {
  GridPtr grid;
  std::vector<double> values;

  static RadialProfile constant(GridPtr grid, double value);
  double at_quadrature(std::size_t element, std::size_t point) const;
};

double h1_inner(const RadialField& u, const RadialField& v);
double h1_norm(const RadialField& u);

/// Integral of |u|^q over the ball (no range restriction on q > 0).
double power_integral(const RadialField& u, double q);
/// (integral |u|^q)^{1/q}; throws DomainError unless 1 <= q <= 2*.
double lq_norm(const RadialField& u, double q);

struct NormBundle {
  double h1 = 0.0;
  std::vector<std::pair<double, double>> lq;  ///< (q, ||u||_q)
};
NormBundle norms(const RadialField& u, std::span<const double> exponents);

/// Riesz map of the H^1_0 inner product: the field z with
/// h1_inner(z, v) = dual . v for every v. `dual` has one entry per free node.
RadialField riesz_representative(const GridPtr& grid, std::span<const double> dual);

/// Dual norm sqrt(dual^T K^{-1} dual) of a functional given on the hat basis.
double dual_norm(const GridPtr& grid, std::span<const double> dual);

// Quadrature kernels. Every integral below is evaluated with the grid's
// Gauss rule applied to the piecewise-linear interpolant of u.

/// integral psi(u(r)) over the ball
template <class Fn>
double integrate(const RadialField& u, Fn&& psi) {
  const auto& g = u.grid();
  const auto w = g.quadrature_weights();
  const auto shape = g.quadrature_left_shape();
  const auto vals = u.values();
  double sum = 0.0;
  for (std::size_t e = 0; e < g.elements(); ++e) {
    for (std::size_t q = 0; q < RadialGrid::kGaussPoints; ++q) {
      const std::size_t k = e * RadialGrid::kGaussPoints + q;
      const double uq = shape[k] * vals[e] + (1.0 - shape[k]) * vals[e + 1];
      sum += w[k] * psi(uq);
    }
  }
  return sum;
}

/// b_i = integral psi(u) phi_i for the free nodes i = 0..N-1
template <class Fn>
std::vector<double> load_vector(const RadialField& u, Fn&& psi) {
  const auto& g = u.grid();
  const auto w = g.quadrature_weights();
  const auto shape = g.quadrature_left_shape();
  const auto vals = u.values();
  std::vector<double> out(g.elements(), 0.0);
  for (std::size_t e = 0; e < g.elements(); ++e) {
    double left = 0.0;
    double right = 0.0;
    for (std::size_t q = 0; q < RadialGrid::kGaussPoints; ++q) {
      const std::size_t k = e * RadialGrid::kGaussPoints + q;
      const double uq = shape[k] * vals[e] + (1.0 - shape[k]) * vals[e + 1];
      const double val = w[k] * psi(uq);
      left += val * shape[k];
      right += val * (1.0 - shape[k]);
    }
    out[e] += left;
    if (e + 1 < g.elements()) out[e + 1] += right;
  }
  return out;
}

/// M_ij = integral psi(u) phi_i phi_j on the free nodes
template <class Fn>
Tridiagonal weighted_mass(const RadialField& u, Fn&& psi) {
  const auto& g = u.grid();
  const auto w = g.quadrature_weights();
  const auto shape = g.quadrature_left_shape();
  const auto vals = u.values();
  const std::size_t n = g.elements();
  Tridiagonal m(n);
  for (std::size_t e = 0; e < n; ++e) {
    double ll = 0.0, lr = 0.0, rr = 0.0;
    for (std::size_t q = 0; q < RadialGrid::kGaussPoints; ++q) {
      const std::size_t k = e * RadialGrid::kGaussPoints + q;
      const double s = shape[k];
      const double uq = s * vals[e] + (1.0 - s) * vals[e + 1];
      const double val = w[k] * psi(uq);
      ll += val * s * s;
      lr += val * s * (1.0 - s);
      rr += val * (1.0 - s) * (1.0 - s);
    }
    m.diag[e] += ll;
    if (e + 1 < n) {
      m.diag[e + 1] += rr;
      m.upper[e] += lr;
      m.lower[e] += lr;
    }
  }
  return m;
}

struct SobolevRatioOptions {
  std::size_t max_iterations = 200000;
  double relative_tolerance = 1e-13;
  /// Warm start (e.g. the prolongation of a coarse-grid minimizer).
  std::optional<RadialField> initial;
};

struct SobolevRatioResult {
  double ratio = 0.0;
  RadialField minimizer;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Minimizes ||u||^2 / ||u||_{2*}^2 over the discrete radial fields by the
/// monotone nonlinear inverse iteration K w = |u|^{2*-2} u. Every iterate
/// is normalized to unit H^1 norm; every 100 iterations a Newton solve of
/// the discrete Euler-Lagrange equation is tried and accepted if it does
/// not raise the quotient. Throws SolverError if the quotient has
/// not stalled after max_iterations.
SobolevRatioResult discrete_sobolev_ratio(const GridPtr& grid, const SobolevRatioOptions& options = {});

/// The quotient ||u||^2 / ||u||_{2*}^2 of a nonzero field.
double sobolev_quotient(const RadialField& u);

/// Interpolates a field given on `coarse` onto a grid whose node set
/// contains the coarse nodes.
RadialField prolongate(const RadialField& u, const GridPtr& fine);

}  // namespace kirchhoff
