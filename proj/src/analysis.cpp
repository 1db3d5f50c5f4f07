#include "slabte/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace slabte {

namespace {

void check_probe(const BoundaryData& b, const PhasePoint& p, double h) {
  if (!(h > 0.0)) throw DomainError("step must be positive");
  if (!is_interior(p.x)) throw DomainError("residual probes must be interior");
  if (!is_interior(p.x + h * p.xi.vec()) || !is_interior(p.x - h * p.xi.vec()))
    throw ProbeRefused("probe segment leaves the slab");
  for (const auto& ray : seed_rays(b)) {
    if ((p.xi.vec() - ray.seed.xi_star.vec()).norm() > h) continue;
    const Vec rel = p.x - ray.seed.x_star;
    const double t = std::clamp(rel.dot(ray.seed.xi_star.vec()), 0.0, ray.length);
    if ((rel - t * ray.seed.xi_star.vec()).norm() <= h) throw ProbeRefused("probe within h of a discontinuity ray");
  }
  if (!p.xi.horizontal()) {
    const PhasePoint foot = backtrace_foot(p);
    if (b.locus_distance(foot.x, foot.xi) <= h) throw ProbeRefused("probe characteristic meets the jump locus of f0");
  }
}

double central_difference(const std::function<double(const PhasePoint&)>& g, const PhasePoint& p, double h) {
  return (g({p.x + h * p.xi.vec(), p.xi}) - g({p.x - h * p.xi.vec(), p.xi})) / (2.0 * h);
}

// Richardson extrapolation to offset 0 for J(h) = J0 + c1 h + c2 h^2.
std::pair<double, double> extrapolate(std::span<const double> h, std::span<const double> v) {
  const std::size_t n = v.size();
  if (n == 1) return {v[0], std::abs(v[0])};
  auto level = [&](std::size_t i) {
    const double r = h[i + 1] / h[i];
    return (v[i + 1] - r * v[i]) / (1.0 - r);
  };
  if (n == 2) {
    const double r1 = level(0);
    return {r1, std::abs(r1 - v[1])};
  }
  const double a = level(n - 3), b = level(n - 2);
  const double r = h[n - 2] / h[n - 3];
  const double r2 = (b - r * r * a) / (1.0 - r * r);
  return {r2, std::abs(r2 - b)};
}

}  // namespace

double ste_residual(const SolutionField& sol, const PhasePoint& p, double h) {
  check_probe(sol.boundary(), p, h);
  const auto f = [&](const PhasePoint& q) { return sol.value(q); };
  return std::abs(central_difference(f, p, h) + sol.medium().mu_t(p.x) * sol.value(p) - sol.scattering_term(p));
}

double iterate_residual(const SolutionField& sol, int n, const PhasePoint& p, double h) {
  check_probe(sol.boundary(), p, h);
  const auto f = [&](const PhasePoint& q) { return sol.iterate(n, q); };
  const double rhs = n == 0 ? 0.0 : sol.iterate_scattering_term(n - 1, p);
  return std::abs(central_difference(f, p, h) + sol.medium().mu_t(p.x) * sol.iterate(n, p) - rhs);
}

JumpEstimate measure_jump_at(const std::function<double(const PhasePoint&)>& g, const PhasePoint& p,
                             Approach approach, std::span<const double> offsets) {
  if (offsets.empty()) throw DomainError("at least one offset is required");
  for (std::size_t i = 0; i < offsets.size(); ++i)
    if (!(offsets[i] > 0.0) || (i > 0 && !(offsets[i] < offsets[i - 1])))
      throw DomainError("offsets must be positive and decreasing");
  if (approach == Approach::angular && p.x.dim != 2) throw DomainError("angular approach is implemented for d = 2");

  JumpEstimate e;
  e.approach = approach;
  e.offsets.assign(offsets.begin(), offsets.end());
  for (double d : offsets) {
    PhasePoint plus = p, minus = p;
    if (approach == Approach::lateral) {
      plus.x[0] += d;
      minus.x[0] -= d;
    } else {
      const double th = p.xi.angle();
      plus.xi = Direction::from_angle(th + d);
      minus.xi = Direction::from_angle(th - d);
    }
    if (!in_phase_space(plus) || !in_phase_space(minus)) throw DomainError("approach family exits X");
    e.raw.push_back(g(plus) - g(minus));
  }
  std::tie(e.measured, e.uncertainty) = extrapolate(e.offsets, e.raw);
  return e;
}

JumpEstimate measure_jump(const SolutionField& sol, const DiscontinuityRay& ray, double t,
                          std::span<const double> offsets) {
  if (!(t >= 0.0 && t < ray.length)) throw DomainError("ray parameter outside [0, length)");
  const PhasePoint p{ray.point(t), ray.seed.xi_star};
  JumpEstimate e = measure_jump_at([&](const PhasePoint& q) { return sol.value(q); }, p, ray.seed.approach, offsets);
  e.survival = survival(sol.medium(), p.x, p.xi, t, sol.quadrature());
  e.predicted = e.survival * ray.seed.jump;
  return e;
}

std::vector<OffRayProbe> off_ray_probes(const SolutionField& sol, std::span<const DiscontinuityRay> rays, int count,
                                        std::uint64_t seed, std::span<const double> offsets, double clearance) {
  if (rays.empty() || count <= 0) return {};
  const LateralWindow& w = sol.layout().domain().window;
  auto clear_of_rays = [&](const PhasePoint& p) {
    for (const auto& r : rays) {
      if ((p.xi.vec() - r.seed.xi_star.vec()).norm() > clearance) continue;
      const Vec rel = p.x - r.seed.x_star;
      const double t = std::clamp(rel.dot(r.seed.xi_star.vec()), 0.0, r.length);
      if ((rel - t * r.seed.xi_star.vec()).norm() < clearance) return false;
    }
    return true;
  };
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<OffRayProbe> out;
  const double reach = offsets.empty() ? 0.0 : offsets.front();
  for (int i = 0, tries = 0; i < count && tries < 100 * count; ++tries) {
    const DiscontinuityRay& r = rays[static_cast<std::size_t>(i) % rays.size()];
    const double t = (0.1 + 0.8 * u(rng)) * r.length;
    const double shift = (u(rng) < 0.5 ? -1.0 : 1.0) * clearance * (1.0 + 2.0 * u(rng));
    PhasePoint p{r.point(t), r.seed.xi_star};
    p.x[0] += shift;
    if (!is_interior(p.x) || !w.contains(p.x) || !clear_of_rays(p)) continue;
    if (p.x[0] - reach < w.lower[0] || p.x[0] + reach > w.upper[0]) continue;
    OffRayProbe probe;
    probe.p = p;
    probe.jump = measure_jump_at([&](const PhasePoint& q) { return sol.value(q); }, p, r.seed.approach, offsets);
    out.push_back(probe);
    ++i;
  }
  return out;
}

ContinuityScan f1_continuity_scan(const SolutionField& sol, const DiscontinuityRay& ray, double t,
                                  std::span<const double> offsets) {
  if (!(t >= 0.0 && t < ray.length)) throw DomainError("ray parameter outside [0, length)");
  const PhasePoint p{ray.point(t), ray.seed.xi_star};
  const JumpEstimate e =
      measure_jump_at([&](const PhasePoint& q) { return sol.F1(q); }, p, ray.seed.approach, offsets);
  ContinuityScan s;
  s.offsets = e.offsets;
  for (double v : e.raw) s.oscillation.push_back(std::abs(v));
  s.extrapolated = std::abs(e.measured);
  s.decreasing = s.oscillation.back() <= s.oscillation.front() + 1e-15;
  return s;
}

double first_collided_direct(const Medium& m, const BoundaryData& b, const PhasePoint& p, const QuadratureSpec& q,
                             double tolerance, std::span<const double> breaks, std::optional<Vec> pivot) {
  if (!in_phase_space(p)) throw DomainError("evaluation outside X");
  if (on_boundary(p.x)) return 0.0;
  const double tm = p.xi.horizontal() ? kInf : tau_minus(p);
  const double L = std::min(tm, ray_truncation_length(m, p.x, q));
  std::vector<double> cuts{0.0, L};
  for (double s : breaks)
    if (s > 0.0 && s < L) cuts.push_back(s);
  std::sort(cuts.begin(), cuts.end());

  auto integrand = [&](double s) {
    const Vec y = p.x - s * p.xi.vec();
    if (!is_interior(y)) return 0.0;
    if (y.dim != 2) {
      const double g = eval_G(m, b, y, p.xi, q).total;
      return g == 0.0 ? 0.0 : m.mu_s(y) * survival(m, p.x, p.xi, s, q) * g;
    }
    std::array<double, 2> cut{};
    std::size_t nc = 0;
    if (pivot) {
      const Vec r = y - *pivot;
      if (r.norm() > 0.0) {
        cut[0] = std::atan2(r[1], r[0]);
        cut[1] = cut[0] + kPi;
        nc = 2;
      }
    }
    const double g = eval_G_adaptive(m, b, y, p.xi, q, tolerance, std::span<const double>(cut.data(), nc)).total;
    if (g == 0.0) return 0.0;
    return m.mu_s(y) * survival(m, p.x, p.xi, s, q) * g;
  };
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) total += adaptive_integral(integrand, cuts[i], cuts[i + 1], tolerance);
  return total;
}

namespace {

// Ray parameter at which x - s xi passes through c, if it does.
std::vector<double> crossing_of(const Vec& x, const Direction& xi, const Vec& c) {
  const Vec rel = x - c;
  const double s = rel.dot(xi.vec());
  if (s > 0.0 && (rel - s * xi.vec()).norm() < 1e-12) return {s};
  return {};
}

DifferenceQuotients quotients(const Medium& m, const BoundaryData& b, const QuadratureSpec& q, const Vec& x,
                              const Vec& singular, double theta, std::span<const double> hs) {
  DifferenceQuotients d;
  d.theta = theta;
  d.x = x;
  const Direction xi = Direction::from_angle(theta);
  auto f1 = [&](const Vec& y) {
    const auto br = crossing_of(y, xi, singular);
    return first_collided_direct(m, b, {y, xi}, q, 1e-12, br, singular);
  };
  const double center = f1(x);
  for (double h : hs) {
    const double fp = f1(x + h * xi.vec()), fm = f1(x - h * xi.vec());
    d.h.push_back(h);
    d.d_plus.push_back((fp - center) / h);
    d.d_minus.push_back((center - fm) / h);
    d.mismatch.push_back(d.d_plus.back() - d.d_minus.back());
  }
  const double eps = 1e-9;
  const double gp = eval_G_adaptive(m, b, x + eps * xi.vec(), xi, q).total;
  const double gm = eval_G_adaptive(m, b, x - eps * xi.vec(), xi, q).total;
  d.predicted = m.mu_s(x) * (gp - gm);
  return d;
}

}  // namespace

CounterexampleReport counterexample_report(const Medium& m, const Vec& x_bar, const QuadratureSpec& q,
                                           std::uint64_t seed) {
  if (m.dim != 2 || x_bar.dim != 2) throw DomainError("the counterexample report is two-dimensional");
  const BoundaryData b = BoundaryData::counterexample(x_bar);
  const SlabDomain window = SlabDomain::with_window(2, x_bar[0] - 2.0, x_bar[0] + 2.0);
  const ValidationReport v = validate(m, q, window);
  if (!v.passed) throw ValidationError(v);

  CounterexampleReport r;
  r.x_bar = x_bar;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  r.g_minus_probes = 100;
  for (std::size_t i = 0; i < r.g_minus_probes; ++i) {
    const Vec x(x_bar[0] - 2.0 + 4.0 * u(rng), 0.02 + 0.96 * u(rng));
    const Direction xi = Direction::from_angle(2.0 * kPi * u(rng));
    r.g_minus_max = std::max(r.g_minus_max, std::abs(eval_G_adaptive(m, b, x, xi, q).minus));
  }

  const Direction e1 = Direction::from_angle(0.0);
  r.g_offsets = {1e-2, 1e-4, 1e-6};
  for (double d : r.g_offsets) {
    r.g_left.push_back(eval_G_adaptive(m, b, Vec(x_bar[0] - d, x_bar[1]), e1, q).total);
    r.g_right.push_back(eval_G_adaptive(m, b, Vec(x_bar[0] + d, x_bar[1]), e1, q).total);
  }
  r.g_at_x_bar = eval_G_adaptive(m, b, x_bar, e1, q).total;
  r.g_jump = r.g_right.back() - r.g_left.back();

  const std::vector<double> hs{1e-2, 1e-3, 1e-4};
  for (double theta : {0.0, 0.25 * kPi, 0.75 * kPi, kPi}) r.at_x_bar.push_back(quotients(m, b, q, x_bar, x_bar, theta, hs));
  r.control = quotients(m, b, q, Vec(x_bar[0] + 0.3, x_bar[1]), x_bar, 0.0, hs);

  r.regularity = classify_regularity(b, window, 16);
  const auto& along = r.at_x_bar.front().mismatch;
  r.mismatch_persists = std::abs(along.back()) >= 0.5 * std::abs(along.front()) && std::abs(along.front()) > 0.0;
  r.control_decays = std::abs(r.control.mismatch.back()) * 10.0 <= std::abs(r.control.mismatch.front());
  r.conclusion =
      std::string("f0 classified as ") + to_string(r.regularity.empirical) +
      (r.mismatch_persists ? "; one-sided derivatives of f^(1) along e_1 disagree at x_bar for every probed h"
                           : "; no persistent derivative mismatch observed at x_bar") +
      (r.control_decays ? ", while the mismatch vanishes at the control point" : ", control point did not decay") +
      ". This is numerical evidence that the sum is not differentiable along characteristics through x_bar, "
      "not a proof of non-existence.";
  return r;
}

namespace {

Direction sample_direction(const Medium& m, const Vec& y, const Direction& xi, std::mt19937_64& rng,
                           std::uniform_real_distribution<double>& u) {
  const int d = m.dim;
  auto uniform = [&] {
    if (d == 2) return Direction::from_angle(2.0 * kPi * u(rng));
    const double mu = 2.0 * u(rng) - 1.0, phi = 2.0 * kPi * u(rng);
    const double st = std::sqrt(std::max(0.0, 1.0 - mu * mu));
    return Direction::normalized(Vec(st * std::cos(phi), st * std::sin(phi), mu));
  };
  if (m.phase.is_isotropic()) return uniform();
  const double bound = m.phase.upper_bound();
  for (;;) {
    const Direction e = uniform();
    if (u(rng) * bound <= m.phase(y, xi, e)) return e;
  }
}

struct WalkResult {
  double value = 0.0;
  double capped_weight = 0.0;
};

WalkResult walk(const Medium& m, const BoundaryData& b, const PhasePoint& start, const QuadratureSpec& q,
                int depth_cap, double roulette, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  WalkResult r;
  double weight = 1.0;
  Vec x = start.x;
  Direction xi = start.xi;
  for (int depth = 0;; ++depth) {
    const double tm = xi.horizontal() ? kInf : tau_minus({x, xi});
    double escape = 0.0;
    if (std::isfinite(tm)) {
      escape = survival(m, x, xi, tm, q);
      const PhasePoint foot = backtrace_foot({x, xi});
      r.value += weight * escape * b.value(foot.x, foot.xi);
    }
    const double collide = 1.0 - escape;
    if (!(collide > 0.0)) return r;
    if (depth == depth_cap) {
      r.capped_weight = weight * collide;
      return r;
    }
    const double target = -std::log1p(-u(rng) * collide);
    double s = distance_at_optical_depth(m, x, xi, target, tm, q);
    if (!std::isfinite(s)) s = tm;
    const Vec y = x - s * xi.vec();
    weight *= collide * m.mu_s(y) / m.mu_t(y);
    if (weight == 0.0) return r;
    if (weight < roulette) {
      if (u(rng) * roulette >= weight) return r;
      weight = roulette;
    }
    xi = sample_direction(m, y, xi, rng, u);
    x = y;
    if (x.depth() <= 0.0 || x.depth() >= 1.0) return r;
  }
}

}  // namespace

MonteCarloEstimate mc_oracle(const Medium& m, const BoundaryData& b, const PhasePoint& p, std::size_t samples,
                             std::uint64_t seed, const QuadratureSpec& q, const MonteCarloOptions& opts) {
  if (!in_phase_space(p)) throw DomainError("evaluation outside X");
  if (samples == 0) throw DomainError("samples must be positive");
  if (opts.block == 0) throw DomainError("block must be positive");
  const SlabDomain around = SlabDomain::with_window(p.x.dim, p.x[0] - 10.0, p.x[0] + 10.0);
  const ValidationReport v = validate(m, q, around);
  if (!v.passed) throw ValidationError(v);

  const std::size_t blocks = (samples + opts.block - 1) / opts.block;
  std::vector<double> mean(blocks, 0.0), m2(blocks, 0.0), capped(blocks, 0.0);
  std::vector<std::size_t> capped_count(blocks, 0);
  const auto count = static_cast<long long>(blocks);
#pragma omp parallel for schedule(dynamic, 1) if (opts.parallel)
  for (long long bi = 0; bi < count; ++bi) {
    const auto ub = static_cast<std::size_t>(bi);
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(ub), static_cast<std::uint32_t>(ub >> 32)};
    std::mt19937_64 rng(seq);
    const std::size_t first = ub * opts.block, last = std::min(samples, first + opts.block);
    for (std::size_t w = first; w < last; ++w) {
      const WalkResult r = walk(m, b, p, q, opts.depth_cap, opts.roulette, rng);
      const double delta = r.value - mean[ub];
      mean[ub] += delta / static_cast<double>(w - first + 1);
      m2[ub] += delta * (r.value - mean[ub]);
      if (r.capped_weight > 0.0) {
        capped[ub] += r.capped_weight;
        ++capped_count[ub];
      }
    }
  }
  // Chan's pairwise merge keeps a constant sample exactly zero-variance
  double mu = 0.0, M2 = 0.0, seen = 0.0, cap = 0.0;
  MonteCarloEstimate e;
  for (std::size_t i = 0; i < blocks; ++i) {
    const double nb = static_cast<double>(std::min(samples, (i + 1) * opts.block) - i * opts.block);
    const double delta = mean[i] - mu;
    const double total = seen + nb;
    mu += delta * nb / total;
    M2 += m2[i] + delta * delta * seen * nb / total;
    seen = total;
    cap += capped[i];
    e.capped_walks += capped_count[i];
  }
  const double n = static_cast<double>(samples);
  e.samples = samples;
  e.mean = mu;
  const double var = samples > 1 ? M2 / (n - 1.0) : 0.0;
  e.std_error = std::sqrt(var / n);
  e.tail_allowance = cap / n * b.sup_norm() / (1.0 - v.albedo_bound);
  return e;
}

std::vector<ConvergenceRow> convergence_report(const SolutionField& sol) {
  const SolveMeta& meta = sol.meta();
  const double M = meta.albedo_bound;
  std::vector<ConvergenceRow> rows;
  for (std::size_t i = 0; i < meta.iterates.size(); ++i) {
    const IterateInfo& it = meta.iterates[i];
    ConvergenceRow r;
    r.n = it.n;
    r.sup_norm = it.sup_norm;
    r.ratio = i == 0 || meta.iterates[i - 1].sup_norm == 0.0 ? 0.0 : it.sup_norm / meta.iterates[i - 1].sup_norm;
    r.a_priori = it.a_priori_bound;
    r.remainder = M == 0.0 || meta.sup_f0 == 0.0
                      ? 0.0
                      : std::min(std::pow(M, it.n + 1) * meta.sup_f0, it.sup_norm * M) / (1.0 - M);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace slabte
