#include "slabte/quadrature.hpp"

#include <gsl/gsl_integration.h>

#include <gsl/gsl_errno.h>
#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>

namespace slabte {

void QuadratureSpec::validate() const {
  if (angular_nodes < 1) throw DomainError("angular_nodes must be positive");
  if (azimuth_nodes < 1) throw DomainError("azimuth_nodes must be positive");
  if (ray_panels < 1) throw DomainError("ray_panels must be positive");
  if (!(tail_epsilon > 0.0 && tail_epsilon <= 1e-3))
    throw DomainError("tail_epsilon must lie in (0, 1e-3]");
}

double QuadratureSpec::truncation_length(double mu_t_lower) const {
  if (!(mu_t_lower > 0.0)) throw DomainError("truncation needs a positive lower bound on mu_t");
  return -std::log(tail_epsilon) / mu_t_lower;
}

double sphere_measure(int dim) {
  if (dim == 2) return 2.0 * kPi;
  if (dim == 3) return 4.0 * kPi;
  throw DomainError("dimension must be 2 or 3");
}

const GaussRule& gauss_legendre(int n) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<GaussRule>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[n];
  if (!slot) {
    if (n < 1) throw DomainError("Gauss-Legendre order must be positive");
    auto rule = std::make_unique<GaussRule>();
    gsl_integration_glfixed_table* t = gsl_integration_glfixed_table_alloc(static_cast<std::size_t>(n));
    rule->x.resize(static_cast<std::size_t>(n));
    rule->w.resize(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i)
      gsl_integration_glfixed_point(-1.0, 1.0, i, &rule->x[i], &rule->w[i], t);
    gsl_integration_glfixed_table_free(t);
    slot = std::move(rule);
  }
  return *slot;
}

const PanelRule& PanelRule::get() {
  static const PanelRule rule = [] {
    PanelRule r;
    const GaussRule& g = gauss_legendre(kOrder);
    for (int i = 0; i < kOrder; ++i) {
      r.x[static_cast<std::size_t>(i)] = g.x[static_cast<std::size_t>(i)];
      r.w[static_cast<std::size_t>(i)] = g.w[static_cast<std::size_t>(i)];
    }
    // Q[j][m] = int_{-1}^{x_j} l_m(t) dt; degree-7 integrand, exact with the same rule.
    auto lagrange = [&](int m, double t) {
      double v = 1.0;
      for (int k = 0; k < kOrder; ++k)
        if (k != m) v *= (t - r.x[static_cast<std::size_t>(k)]) / (r.x[static_cast<std::size_t>(m)] - r.x[static_cast<std::size_t>(k)]);
      return v;
    };
    for (int j = 0; j < kOrder; ++j) {
      const double a = -1.0, b = r.x[static_cast<std::size_t>(j)];
      const double half = 0.5 * (b - a), mid = 0.5 * (b + a);
      for (int m = 0; m < kOrder; ++m) {
        double s = 0.0;
        for (int i = 0; i < kOrder; ++i)
          s += r.w[static_cast<std::size_t>(i)] * lagrange(m, mid + half * r.x[static_cast<std::size_t>(i)]);
        r.antiderivative[static_cast<std::size_t>(j)][static_cast<std::size_t>(m)] = half * s;
      }
    }
    return r;
  }();
  return rule;
}

AngularQuadrature AngularQuadrature::hemisphere(int dim, Hemisphere h, const QuadratureSpec& q) {
  q.validate();
  AngularQuadrature a;
  a.dim_ = dim;
  const double sign = h == Hemisphere::upper ? 1.0 : -1.0;
  if (dim == 2) {
    const int n = q.angular_nodes;
    const double width = kPi / n;
    const double offset = h == Hemisphere::upper ? 0.0 : kPi;
    a.nodes_.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k)
      a.nodes_.push_back({Direction::from_angle(offset + (k + 0.5) * width), width});
  } else if (dim == 3) {
    const GaussRule& g = gauss_legendre(q.angular_nodes);
    const int na = q.azimuth_nodes;
    const double dphi = 2.0 * kPi / na;
    a.nodes_.reserve(g.x.size() * static_cast<std::size_t>(na));
    for (std::size_t i = 0; i < g.x.size(); ++i) {
      // cos(polar) in (0, 1) mapped from [-1, 1]
      const double mu = sign * 0.5 * (g.x[i] + 1.0);
      const double wmu = 0.5 * g.w[i];
      const double st = std::sqrt(std::max(0.0, 1.0 - mu * mu));
      for (int j = 0; j < na; ++j) {
        const double phi = (j + 0.5) * dphi;
        Vec v(st * std::cos(phi), st * std::sin(phi), mu);
        a.nodes_.push_back({Direction::normalized(v), wmu * dphi});
      }
    }
  } else {
    throw DomainError("dimension must be 2 or 3");
  }
  return a;
}

AngularQuadrature AngularQuadrature::sphere(int dim, const QuadratureSpec& q) {
  AngularQuadrature up = hemisphere(dim, Hemisphere::upper, q);
  AngularQuadrature down = hemisphere(dim, Hemisphere::lower, q);
  up.nodes_.insert(up.nodes_.end(), down.nodes_.begin(), down.nodes_.end());
  return up;
}

double AngularQuadrature::total_weight() const {
  double s = 0.0;
  for (const auto& n : nodes_) s += n.weight;
  return s;
}

std::optional<std::size_t> AngularQuadrature::find(const Direction& xi) const {
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    const Vec d = nodes_[k].xi.vec() - xi.vec();
    if (d.norm() <= 1e-14) return k;
  }
  return std::nullopt;
}

double AngularQuadrature::integrate(const std::function<double(const Direction&)>& g) const {
  double s = 0.0;
  for (const auto& n : nodes_) s += n.weight * g(n.xi);
  return s;
}

double adaptive_integral(const std::function<double(double)>& g, double a, double b,
                         double tolerance, int max_intervals) {
  if (!(b > a)) return 0.0;
  static const bool quiet = [] {
    gsl_set_error_handler_off();
    return true;
  }();
  (void)quiet;
  const auto limit = static_cast<std::size_t>(std::max(max_intervals, 1));
  std::unique_ptr<gsl_integration_workspace, decltype(&gsl_integration_workspace_free)> ws(
      gsl_integration_workspace_alloc(limit), &gsl_integration_workspace_free);
  gsl_function f;
  f.function = [](double t, void* ctx) { return (*static_cast<const std::function<double(double)>*>(ctx))(t); };
  f.params = const_cast<std::function<double(double)>*>(&g);
  double result = 0.0, err = 0.0;
  gsl_integration_qag(&f, a, b, tolerance, tolerance, limit, GSL_INTEG_GAUSS21, ws.get(), &result, &err);
  return result;
}

}  // namespace slabte
