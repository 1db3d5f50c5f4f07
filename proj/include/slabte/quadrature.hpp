#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "slabte/geometry.hpp"

namespace slabte {

/// Angular and ray quadrature configuration shared by every integral
/// approximation in the library.
struct QuadratureSpec {
  int angular_nodes = 64;   // per hemisphere; polar nodes per hemisphere for d = 3
  int azimuth_nodes = 32;   // d = 3 only
  int ray_panels = 4;       // Gauss-Legendre panels per unit length
  double tail_epsilon = 1e-8;

  void validate() const;

  /// Ray length beyond which the survival factor is below tail_epsilon.
  double truncation_length(double mu_t_lower) const;
};

enum class Hemisphere { upper, lower };

struct AngularNode {
  Direction xi;
  double weight = 0.0;
};

/// Product-type rule on one or both hemispheres S^{d-1}_+ / S^{d-1}_-.
/// d = 2: midpoints in theta on (0, pi) and (pi, 2pi).
/// d = 3: Gauss-Legendre in cos(polar) on each hemisphere times azimuthal
/// midpoints. No node is horizontal.
class AngularQuadrature {
 public:
  static AngularQuadrature hemisphere(int dim, Hemisphere h, const QuadratureSpec& q);
  /// Upper hemisphere nodes first, then lower.
  static AngularQuadrature sphere(int dim, const QuadratureSpec& q);

  int dim() const { return dim_; }
  std::size_t size() const { return nodes_.size(); }
  std::span<const AngularNode> nodes() const { return nodes_; }
  const AngularNode& operator[](std::size_t k) const { return nodes_[k]; }
  double total_weight() const;

  /// Index of a node whose direction matches xi to 1e-14, if any.
  std::optional<std::size_t> find(const Direction& xi) const;

  /// Sum_k w_k g(xi_k).
  double integrate(const std::function<double(const Direction&)>& g) const;

 private:
  int dim_ = 2;
  std::vector<AngularNode> nodes_;
};

/// Surface measure of S^{d-1}.
double sphere_measure(int dim);

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> x;
  std::vector<double> w;
};

const GaussRule& gauss_legendre(int n);

/// Eight-point Gauss-Legendre panel with its spectral integration matrix:
/// antiderivative(x_j) = (h/2) sum_m Q[j][m] g(x_m) on a panel of length h.
struct PanelRule {
  static constexpr int kOrder = 8;
  std::array<double, kOrder> x{};
  std::array<double, kOrder> w{};
  std::array<std::array<double, kOrder>, kOrder> antiderivative{};

  static const PanelRule& get();
};

/// Globally adaptive Gauss-Kronrod integral of g on [a, b] (finite) with
/// absolute and relative tolerance `tolerance`. When the subinterval budget
/// runs out the best estimate is returned.
double adaptive_integral(const std::function<double(double)>& g, double a, double b,
                         double tolerance, int max_intervals = 2000);

}  // namespace slabte
