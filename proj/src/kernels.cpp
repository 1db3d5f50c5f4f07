#include "slabte/kernels.hpp"

#include <algorithm>

namespace slabte {

double RayContext::transport(const Vec& x, const Direction& xi, const double* source, std::size_t stride) const {
  const double tm = xi.horizontal() ? kInf : tau_minus({x, xi});
  const double len = std::min(tm, s_max);
  if (!(len > 0.0)) return 0.0;
  thread_local std::vector<double> breaks;
  breaks.clear();
  breaks.push_back(0.0);
  breaks.push_back(len);
  layout->crossings(x, xi, len, breaks);
  std::sort(breaks.begin(), breaks.end());

  const Medium& m = *medium;
  const bool mus_const = m.mu_s.is_constant();
  double acc = 0.0;
  for_each_ray_point(m, x, xi, breaks, panels_per_unit,
                     [&](std::size_t, double, const Vec& y, double w) {
                       const double j = layout->interpolate(source, stride, y);
                       acc += w * (mus_const ? j : m.mu_s(y) * j);
                     });
  return mus_const ? m.mu_s.constant_value() * acc : acc;
}

AngularCoupling AngularCoupling::build(const PhaseFunction& p, const AngularQuadrature& angles) {
  AngularCoupling c;
  c.isotropic = p.is_isotropic();
  c.directions = angles.size();
  const Vec origin = Vec::zero(angles.dim());
  if (c.isotropic) {
    c.weights.resize(c.directions);
    for (std::size_t k = 0; k < c.directions; ++k)
      c.weights[k] = angles[k].weight * p(origin, angles[k].xi, angles[k].xi);
    return c;
  }
  c.matrix.resize(c.directions * c.directions);
  for (std::size_t k = 0; k < c.directions; ++k)
    for (std::size_t j = 0; j < c.directions; ++j)
      c.matrix[k * c.directions + j] = angles[j].weight * p(origin, angles[k].xi, angles[j].xi);
  return c;
}

namespace {

inline void source_node(const AngularCoupling& c, const double* f, double* out) {
  const std::size_t K = c.directions;
  if (c.isotropic) {
    double s = 0.0;
    for (std::size_t k = 0; k < K; ++k) s += c.weights[k] * f[k];
    out[0] = s;
    return;
  }
  for (std::size_t k = 0; k < K; ++k) {
    const double* row = &c.matrix[k * K];
    double s = 0.0;
    for (std::size_t j = 0; j < K; ++j) s += row[j] * f[j];
    out[k] = s;
  }
}

inline void sweep_node(const RayContext& ctx, const AngularCoupling& c, std::span<const double> source,
                       std::size_t i, double* out) {
  const CollocationLayout& layout = *ctx.layout;
  const Vec x = layout.position(i);
  const std::size_t K = layout.directions();
  for (std::size_t k = 0; k < K; ++k) {
    const double* src = c.isotropic ? source.data() : source.data() + k;
    out[k] = ctx.transport(x, layout.angles()[k].xi, src, c.isotropic ? 1 : K);
  }
}

std::size_t spatial_count(const AngularCoupling& c, std::size_t f_size) { return f_size / c.directions; }

}  // namespace

void source_serial(const AngularCoupling& c, std::span<const double> f, std::span<double> out) {
  const std::size_t n = spatial_count(c, f.size());
  const std::size_t K = c.directions, stride = c.isotropic ? 1 : K;
  for (std::size_t i = 0; i < n; ++i) source_node(c, f.data() + i * K, out.data() + i * stride);
}

void source_parallel(const AngularCoupling& c, std::span<const double> f, std::span<double> out) {
  const std::size_t n = spatial_count(c, f.size());
  const std::size_t K = c.directions, stride = c.isotropic ? 1 : K;
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < count; ++i) {
    const auto u = static_cast<std::size_t>(i);
    source_node(c, f.data() + u * K, out.data() + u * stride);
  }
}

void sweep_serial(const RayContext& ctx, const AngularCoupling& c, std::span<const double> source,
                  std::span<double> out) {
  const std::size_t n = ctx.layout->spatial_size(), K = ctx.layout->directions();
  for (std::size_t i = 0; i < n; ++i) sweep_node(ctx, c, source, i, out.data() + i * K);
}

void sweep_parallel(const RayContext& ctx, const AngularCoupling& c, std::span<const double> source,
                    std::span<double> out) {
  const std::size_t K = ctx.layout->directions();
  const auto count = static_cast<long long>(ctx.layout->spatial_size());
#pragma omp parallel for schedule(dynamic, 4)
  for (long long i = 0; i < count; ++i) {
    const auto u = static_cast<std::size_t>(i);
    sweep_node(ctx, c, source, u, out.data() + u * K);
  }
}

}  // namespace slabte
