#pragma once
// Reference values computed without the library's own quadrature or
// geometry code.

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>

namespace oracle {

inline constexpr double pi = 3.14159265358979323846;

/// Backward exit time of x - s xi from the unit slab by bisection on the
/// depth coordinate. depth and xi_depth are the last components.
inline double tau_minus(double depth, double xi_depth) {
  if (xi_depth == 0.0) return std::numeric_limits<double>::infinity();
  const double target = xi_depth > 0.0 ? 0.0 : 1.0;
  auto g = [&](double s) { return depth - s * xi_depth - target; };
  double lo = 0.0, hi = 1.0;
  while (g(hi) * g(lo) > 0.0) hi *= 2.0;
  for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (g(lo) * g(mid) <= 0.0) hi = mid;
    else lo = mid;
    if (mid == lo && mid == hi) break;
  }
  return 0.5 * (lo + hi);
}

/// int_0^s (bottom + (top - bottom)(depth - r xi_d)) dr.
inline double affine_optical_depth(double bottom, double top, double depth, double xi_depth, double s) {
  return bottom * s + (top - bottom) * (depth * s - 0.5 * xi_depth * s * s);
}

/// Double-exponential integral on [a, b].
inline double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-13) {
  boost::math::quadrature::tanh_sinh<double> ts;
  return ts.integrate(f, a, b, tol);
}

/// (1/2pi) int_0^pi exp(-mu depth / sin theta) dtheta: hemisphere integral of
/// attenuated unit bottom data under the d = 2 isotropic kernel.
inline double g_plus_unit_bottom(double mu, double depth) {
  return integrate([&](double th) {
           const double s = std::sin(th);
           return s <= 0.0 ? 0.0 : std::exp(-mu * depth / s);
         },
         0.0, pi) /
         (2.0 * pi);
}

/// Uncollided value for unit data on both faces at (depth, theta) in d = 2.
inline double uncollided_unit(double mu, double depth, double theta) {
  const double xd = std::sin(theta);
  return std::exp(-mu * tau_minus(depth, xd));
}

/// Smallest n with M^{n+1} sup f0 / (1 - M) <= tol, by direct search.
inline int geometric_count(double M, double sup_f0, double tol) {
  int n = 0;
  double term = M * sup_f0 / (1.0 - M);
  while (term > tol && n < 100000) {
    term *= M;
    ++n;
  }
  return n;
}

/// Normalization of a d = 2 kernel depending on the scattering angle.
inline double circle_integral(const std::function<double(double)>& p_of_angle) {
  return integrate(p_of_angle, 0.0, 2.0 * pi);
}

/// Normalization of a d = 3 kernel depending on cos(scattering angle).
inline double sphere_integral(const std::function<double(double)>& p_of_cos) {
  return 2.0 * pi * integrate(p_of_cos, -1.0, 1.0);
}

/// Deterministic uniform stream for property tests.
struct Lcg {
  std::uint64_t state;
  explicit Lcg(std::uint64_t s) : state(s * 2862933555777941757ULL + 3037000493ULL) {}
  double operator()() {
    state = state * 6364136223846793005ULL + 1442695040888963407ULL;
    return static_cast<double>(state >> 11) * 0x1.0p-53;
  }
};

}  // namespace oracle
