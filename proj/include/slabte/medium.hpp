#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "slabte/geometry.hpp"
#include "slabte/quadrature.hpp"

namespace slabte {

/// One axis of a sampled coefficient grid: `count` equispaced nodes on
/// [lower, upper].
struct GridAxis {
  double lower = 0.0;
  double upper = 1.0;
  int count = 2;
};

/// Samples on a tensor grid; the depth axis is last and varies fastest.
struct GridData {
  int dim = 2;
  std::vector<GridAxis> axes;
  std::vector<double> values;

  void validate() const;
};

/// Reads a grid in the slabte text format:
///
///     dims,2
///     axis,x1,-2,2,5
///     axis,x2,0,1,3
///     values
///     v(0,0),v(0,1),v(0,2)
///     ...
///
/// Values are row-major with depth fastest; line breaks inside the value
/// block are not significant.
GridData load_grid_csv(const std::string& path);

/// Scalar coefficient on the slab: analytic preset or sampled grid.
class ScalarField {
 public:
  ScalarField() : rep_(Constant{0.0}) {}

  static ScalarField constant(double v);
  /// bottom + (top - bottom) x_d
  static ScalarField depth_affine(double bottom, double top);
  /// base + amplitude exp(-|x - center|^2 / width^2)
  static ScalarField bump(double base, double amplitude, const Vec& center, double width);
  /// Multilinear interpolation; evaluation clamps to the grid box.
  static ScalarField grid(GridData data);

  double operator()(const Vec& x) const;

  bool is_constant() const { return std::holds_alternative<Constant>(rep_); }
  bool is_laterally_invariant() const;
  /// Value of a constant field; throws otherwise.
  double constant_value() const;
  std::string describe() const;

 private:
  struct Constant { double value; };
  struct DepthAffine { double bottom, top; };
  struct Bump { double base, amplitude; Vec center; double width; };
  struct Grid { GridData data; };
  using Rep = std::variant<Constant, DepthAffine, Bump, Grid>;

  explicit ScalarField(Rep r) : rep_(std::move(r)) {}
  Rep rep_;
};

/// Scattering kernel p(x, xi, xi'). Presets depend on the scattering angle
/// only.
class PhaseFunction {
 public:
  enum class Kind { isotropic, linear, henyey_greenstein, tabulated };

  PhaseFunction() = default;

  static PhaseFunction isotropic(int dim);
  /// (1 + g cos angle) / |S^{d-1}|, |g| <= 1.
  static PhaseFunction linear(int dim, double g);
  /// Henyey-Greenstein kernel in d = 2 (Poisson kernel) or d = 3.
  static PhaseFunction henyey_greenstein(int dim, double g);
  /// Values on an equispaced grid of scattering angles on [0, pi],
  /// linearly interpolated. Not renormalized.
  static PhaseFunction tabulated(int dim, std::vector<double> values);

  double operator()(const Vec& x, const Direction& xi, const Direction& xi_prime) const;
  double of_cosine(double cos_angle) const;

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  bool is_isotropic() const { return kind_ == Kind::isotropic; }
  /// Supremum over all arguments.
  double upper_bound() const;
  std::string describe() const;

 private:
  Kind kind_ = Kind::isotropic;
  int dim_ = 2;
  double g_ = 0.0;
  std::vector<double> table_;
};

/// Coefficient triple (mu_t, mu_s, p). Immutable after construction.
struct Medium {
  int dim = 2;
  ScalarField mu_t;
  ScalarField mu_s;
  PhaseFunction phase;
};

struct ValidationOptions {
  std::size_t samples = 10000;
  std::size_t phase_samples = 64;
  double normalization_tolerance = 1e-6;
};

struct ValidationReport {
  bool passed = false;
  std::string failure;     // first violated assumption, empty on success
  double gap = 0.0;        // inf (mu_t - mu_s)
  double mu_t_lower = 0.0;
  double mu_t_upper = 0.0;
  double mu_s_upper = 0.0;
  double albedo_bound = 0.0;  // M = sup mu_s / mu_t
  double phase_upper = 0.0;
  double normalization_error = 0.0;
  std::size_t samples = 0;
};

/// Checks the standing assumptions on a dense deterministic sample of the
/// slab (lateral window x [0, 1]).
ValidationReport validate(const Medium& m, const QuadratureSpec& q, const SlabDomain& domain,
                          const ValidationOptions& opts = {});

/// Thrown by operations that require a medium satisfying the assumptions.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(ValidationReport r);
  const ValidationReport& report() const { return report_; }

 private:
  ValidationReport report_;
};

/// M_t(x, xi; s) = int_0^s mu_t(x - r xi) dr.
double optical_depth(const Medium& m, const Vec& x, const Direction& xi, double s,
                     const QuadratureSpec& q);

/// exp(-M_t(x, xi; s)).
double survival(const Medium& m, const Vec& x, const Direction& xi, double s,
                const QuadratureSpec& q);

/// Smallest s in [0, limit] with M_t(x, xi; s) = target, or +inf when the
/// optical depth at `limit` stays below target. `limit` may be +inf.
double distance_at_optical_depth(const Medium& m, const Vec& x, const Direction& xi,
                                 double target, double limit, const QuadratureSpec& q);

/// Gauss-Legendre points along the upstream ray y = x - s xi.
///
/// `breaks` is ascending, starts at 0 and ends at the ray length. Each
/// interval is further split into panels no longer than 1/panels_per_unit.
/// `visit(interval, s, y, weight)` receives the quadrature weight already
/// multiplied by exp(-M_t(x, xi; s)).
template <class Visit>
void for_each_ray_point(const Medium& m, const Vec& x, const Direction& xi,
                        std::span<const double> breaks, int panels_per_unit, Visit&& visit) {
  const PanelRule& rule = PanelRule::get();
  constexpr std::size_t K = PanelRule::kOrder;
  const bool constant = m.mu_t.is_constant();
  const double mu_const = constant ? m.mu_t.constant_value() : 0.0;
  double depth_at_start = 0.0;  // optical depth at the current panel start
  for (std::size_t iv = 0; iv + 1 < breaks.size(); ++iv) {
    const double a = breaks[iv], b = breaks[iv + 1];
    if (!(b > a)) continue;
    const int panels = std::max(1, static_cast<int>(std::ceil((b - a) * panels_per_unit - 1e-12)));
    const double h = (b - a) / panels;
    for (int pi = 0; pi < panels; ++pi) {
      const double half = 0.5 * h, mid = a + pi * h + half;
      if (constant) {
        for (std::size_t j = 0; j < K; ++j) {
          const double s = mid + half * rule.x[j];
          visit(iv, s, x - s * xi.vec(), half * rule.w[j] * std::exp(-mu_const * s));
        }
        continue;
      }
      std::array<double, K> mu{};
      std::array<Vec, K> ys{};
      for (std::size_t j = 0; j < K; ++j) {
        ys[j] = x - (mid + half * rule.x[j]) * xi.vec();
        mu[j] = m.mu_t(ys[j]);
      }
      double total = 0.0;
      for (std::size_t j = 0; j < K; ++j) {
        double acc = 0.0;
        for (std::size_t k = 0; k < K; ++k) acc += rule.antiderivative[j][k] * mu[k];
        visit(iv, mid + half * rule.x[j], ys[j],
              half * rule.w[j] * std::exp(-(depth_at_start + half * acc)));
        total += rule.w[j] * mu[j];
      }
      depth_at_start += half * total;
    }
  }
}

}  // namespace slabte
