#pragma once

// Per-sweep kernels. Each kernel has a plain serial reference and an
// OpenMP version that evaluates the same per-node expression; results are
// bitwise identical because nodes never share accumulators.

#include <cstddef>
#include <span>
#include <vector>

#include "slabte/medium.hpp"
#include "slabte/solver.hpp"

namespace slabte {

/// Everything a transport sweep needs besides the source field.
struct RayContext {
  const Medium* medium = nullptr;
  const CollocationLayout* layout = nullptr;
  double s_max = 0.0;
  int panels_per_unit = 4;

  /// int_0^{min(tau_-, s_max)} mu_s(y) exp(-M_t(x, xi; s)) J(y) ds with
  /// y = x - s xi and J interpolated from source[spatial * stride].
  double transport(const Vec& x, const Direction& xi, const double* source, std::size_t stride) const;
};

/// Angular coupling sum_k' w_k' p(xi_k, xi_k') over the layout's nodes.
/// Isotropic kernels collapse to a single weight vector.
struct AngularCoupling {
  bool isotropic = true;
  std::size_t directions = 0;
  std::vector<double> weights;  // isotropic: w_k p
  std::vector<double> matrix;   // K x K, row k = w_k' p(xi_k, xi_k')

  static AngularCoupling build(const PhaseFunction& p, const AngularQuadrature& angles);
  std::size_t source_size(std::size_t spatial) const { return isotropic ? spatial : spatial * directions; }
};

/// J = int p f dsigma at every node (no mu_s factor).
void source_serial(const AngularCoupling& c, std::span<const double> f, std::span<double> out);
void source_parallel(const AngularCoupling& c, std::span<const double> f, std::span<double> out);

/// out[i, k] = transport(x_i, xi_k, J).
void sweep_serial(const RayContext& ctx, const AngularCoupling& c, std::span<const double> source,
                  std::span<double> out);
void sweep_parallel(const RayContext& ctx, const AngularCoupling& c, std::span<const double> source,
                    std::span<double> out);

}  // namespace slabte
