#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "slabte/boundary.hpp"
#include "slabte/geometry.hpp"
#include "slabte/medium.hpp"
#include "slabte/quadrature.hpp"

namespace slabte {

/// Collocation resolution: lateral nodes per lateral axis (window edges
/// included) and interior depth nodes.
struct GridSpec {
  int lateral_nodes = 16;
  int depth_nodes = 32;

  void validate(int dim) const;
};

/// Spatial nodes times angular nodes. Spatial index runs over the lateral
/// axes first and depth last (fastest); nodal values are stored as
/// values[spatial * directions + k].
class CollocationLayout {
 public:
  CollocationLayout(const SlabDomain& domain, const GridSpec& grid, const QuadratureSpec& q);

  int dim() const { return dim_; }
  std::size_t spatial_size() const { return spatial_; }
  std::size_t directions() const { return angles_.size(); }
  std::size_t size() const { return spatial_ * angles_.size(); }

  Vec position(std::size_t spatial) const;
  const AngularQuadrature& angles() const { return angles_; }
  const std::vector<double>& depth_nodes() const { return depth_; }
  const std::vector<double>& lateral_nodes(int axis) const { return lateral_[static_cast<std::size_t>(axis)]; }
  const SlabDomain& domain() const { return domain_; }

  /// Interpolation cell of x. Lateral coordinates clamp to the window and
  /// depth clamps to [z_0, z_last].
  struct Cell {
    std::array<std::size_t, 2> lateral{};
    std::array<double, 2> lateral_frac{};
    std::size_t depth = 0;
    double depth_frac = 0.0;
  };
  Cell cell(const Vec& x) const;

  /// Multilinear interpolation of a per-spatial-node field stored as
  /// values[spatial * stride], written as nested lerps so that a constant
  /// field is reproduced exactly.
  double interpolate(const double* values, std::size_t stride, const Vec& x) const;

  /// Ray parameters in (0, length) where x - s xi crosses a node plane.
  void crossings(const Vec& x, const Direction& xi, double length, std::vector<double>& out) const;

 private:
  int dim_;
  SlabDomain domain_;
  std::vector<std::vector<double>> lateral_;
  std::vector<double> depth_;
  std::size_t spatial_ = 0;
  AngularQuadrature angles_;
};

struct SolverOptions {
  double tol = 1e-6;
  int max_iterations = 500;
  int min_iterations = 0;
  bool keep_iterates = true;
  bool parallel = true;
  /// Angular refinement used for the first-collision source, where the
  /// integrand is the closed-form ballistic term.
  int first_collision_refinement = 8;
};

/// Thrown when the iteration budget runs out before the stop rule holds.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, int iterations, double increment, double certified)
      : std::runtime_error(what), iterations(iterations), increment(increment), certified(certified) {}
  int iterations;
  double increment;
  double certified;
};

struct IterateInfo {
  int n = 0;
  double sup_norm = 0.0;
  double a_priori_bound = 0.0;  // M^n sup|f0|
};

struct SolveMeta {
  int iterations = 0;         // number of scattered iterates summed
  double final_increment = 0.0;
  double certified_bound = 0.0;  // bound on sup|f - f_N|
  int certified_n = 0;           // a priori count from the geometric bound
  double albedo_bound = 0.0;
  double mu_t_lower = 0.0;
  double sup_f0 = 0.0;
  double s_max = 0.0;
  double tol = 0.0;
  std::vector<IterateInfo> iterates;
};

struct RayContext;

/// Converged Neumann sum with access to F0, F1 and the retained iterates.
/// Evaluation is safe from concurrent threads.
class SolutionField {
 public:
  SolutionField(const SolutionField&) = delete;
  SolutionField& operator=(const SolutionField&) = delete;
  SolutionField(SolutionField&&) noexcept;
  ~SolutionField();

  double F0(const PhasePoint& p) const;
  double F1(const PhasePoint& p) const;
  double value(const PhasePoint& p) const { return F0(p) + F1(p); }
  /// f^(n)(p); requires retained iterates for n >= 1.
  double iterate(int n, const PhasePoint& p) const;
  /// mu_s(x) int p f dsigma evaluated from the converged nodal field.
  double scattering_term(const PhasePoint& p) const;
  /// mu_s(x) int p f^(n) dsigma from the retained nodal iterate.
  double iterate_scattering_term(int n, const PhasePoint& p) const;

  /// max over nodes of |F0 + K f - f| for the discrete integral operator K.
  double fixed_point_residual() const;

  const SolveMeta& meta() const { return meta_; }
  const Medium& medium() const { return medium_; }
  const BoundaryData& boundary() const { return boundary_; }
  const QuadratureSpec& quadrature() const { return q_; }
  const CollocationLayout& layout() const { return *layout_; }
  std::size_t retained_iterates() const { return iterates_.size(); }
  std::span<const double> nodal_total() const { return total_; }
  std::span<const double> nodal_iterate(int n) const;

 private:
  friend SolutionField neumann_solve(const Medium&, const BoundaryData&, const QuadratureSpec&,
                                     const SlabDomain&, const GridSpec&, const SolverOptions&);
  SolutionField(Medium m, BoundaryData b, QuadratureSpec q, std::unique_ptr<CollocationLayout> layout);

  // which >= 0: int p f^(which) dsigma; which < 0: the converged total.
  std::shared_ptr<const std::vector<double>> source_for(int which, const Direction& xi) const;
  double ray_term(int which, const PhasePoint& p) const;

  Medium medium_;
  BoundaryData boundary_;
  QuadratureSpec q_;
  std::unique_ptr<CollocationLayout> layout_;
  std::unique_ptr<RayContext> ray_;
  bool isotropic_ = true;
  bool scattering_ = false;
  SolveMeta meta_;
  std::vector<double> f0_nodal_;
  std::vector<double> f1_nodal_;
  std::vector<double> total_;
  std::vector<std::vector<double>> iterates_;  // f^(n) at nodes
  AngularQuadrature fine_;                     // first-collision directions
  std::vector<double> first_source_;           // int p F0 dsigma at nodes
  std::vector<double> f0_fine_;                // F0 at fine directions, anisotropic kernels only
  mutable std::mutex cache_mu_;
  mutable std::map<std::pair<int, std::array<double, 3>>, std::shared_ptr<const std::vector<double>>> cache_;
};

/// Ballistic term exp(-M_t(x, xi; tau_-)) f0(foot), zero for horizontal directions.
double eval_F0(const Medium& m, const BoundaryData& b, const PhasePoint& p, const QuadratureSpec& q);

/// mu_s(x) sum_k w_k p(x, xi, xi_k) field_k over the given angular nodes.
double scatter_source(const Medium& m, std::span<const double> field, const Vec& x, const Direction& xi,
                      const AngularQuadrature& angles);

/// Neumann series on the collocation grid with the dual stop rule: the
/// last increment and the certified remainder must both be <= tol.
SolutionField neumann_solve(const Medium& m, const BoundaryData& b, const QuadratureSpec& q,
                            const SlabDomain& domain, const GridSpec& grid, const SolverOptions& opts = {});

/// One application of the scattering integral operator to nodal values
/// prev, without the ballistic term. Rays are truncated at
/// -ln(tail_epsilon) / mu_t_lower.
std::vector<double> iterate_step(const Medium& m, const CollocationLayout& layout, const QuadratureSpec& q,
                                 std::span<const double> prev, double mu_t_lower, bool parallel = true);

/// Truncation length -ln(tail_epsilon) / inf mu_t for rays starting near x;
/// the infimum of a non-constant mu_t is sampled over a 50-wide window.
double ray_truncation_length(const Medium& m, const Vec& x, const QuadratureSpec& q);

struct GParts {
  double plus = 0.0;
  double minus = 0.0;
  double total = 0.0;
};

/// G_+ and G_- by the hemisphere midpoint/product rule of q.
GParts eval_G(const Medium& m, const BoundaryData& b, const Vec& x, const Direction& xi,
              const QuadratureSpec& q);

/// d = 2: G_+ and G_- with adaptive Gauss-Kronrod over each half circle.
/// `angle_breaks` are directions (radians) where f0 may jump.
GParts eval_G_adaptive(const Medium& m, const BoundaryData& b, const Vec& x, const Direction& xi,
                       const QuadratureSpec& q, double tolerance = 1e-11,
                       std::span<const double> angle_breaks = {});

/// G_+ as an integral over the bottom plane with Jacobian x_d / |x - y0|^d,
/// truncated where the survival factor drops below tail_epsilon.
double eval_G_plus_boundary_form(const Medium& m, const BoundaryData& b, const Vec& x, const Direction& xi,
                                 const QuadratureSpec& q, double tolerance = 1e-11);

}  // namespace slabte
