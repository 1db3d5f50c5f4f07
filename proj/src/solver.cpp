#include "slabte/solver.hpp"

#include <algorithm>
#include <cmath>

#include "slabte/kernels.hpp"

namespace slabte {

void GridSpec::validate(int dim) const {
  if (dim != 2 && dim != 3) throw DomainError("dimension must be 2 or 3");
  if (lateral_nodes < 2) throw DomainError("lateral_nodes must be at least 2");
  if (depth_nodes < 2) throw DomainError("depth_nodes must be at least 2");
}

CollocationLayout::CollocationLayout(const SlabDomain& domain, const GridSpec& grid, const QuadratureSpec& q)
    : dim_(domain.dimension), domain_(domain) {
  domain.validate();
  grid.validate(dim_);
  const auto n = static_cast<std::size_t>(grid.lateral_nodes);
  for (std::size_t a = 0; a + 1 < static_cast<std::size_t>(dim_); ++a) {
    std::vector<double> nodes(n);
    const double lo = domain.window.lower[a], hi = domain.window.upper[a];
    for (std::size_t j = 0; j < n; ++j) nodes[j] = lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(n - 1);
    nodes.back() = hi;
    lateral_.push_back(std::move(nodes));
  }
  const int nz = grid.depth_nodes;
  depth_.resize(static_cast<std::size_t>(nz));
  for (int k = 0; k < nz; ++k) depth_[static_cast<std::size_t>(k)] = 0.5 * (1.0 - std::cos(kPi * (k + 0.5) / nz));
  spatial_ = depth_.size();
  for (const auto& l : lateral_) spatial_ *= l.size();
  angles_ = AngularQuadrature::sphere(dim_, q);
}

Vec CollocationLayout::position(std::size_t i) const {
  const std::size_t nz = depth_.size();
  const double z = depth_[i % nz];
  const std::size_t r = i / nz;
  if (dim_ == 2) return Vec(lateral_[0][r], z);
  const std::size_t n2 = lateral_[1].size();
  return Vec(lateral_[0][r / n2], lateral_[1][r % n2], z);
}

CollocationLayout::Cell CollocationLayout::cell(const Vec& x) const {
  Cell c;
  for (std::size_t a = 0; a < lateral_.size(); ++a) {
    const auto& nodes = lateral_[a];
    const double lo = nodes.front(), hi = nodes.back();
    const double n1 = static_cast<double>(nodes.size() - 1);
    const double t = std::clamp((x[static_cast<int>(a)] - lo) / (hi - lo) * n1, 0.0, n1);
    const auto j = std::min(static_cast<std::size_t>(t), nodes.size() - 2);
    c.lateral[a] = j;
    c.lateral_frac[a] = t - static_cast<double>(j);
  }
  const double z = std::clamp(x.depth(), depth_.front(), depth_.back());
  const auto it = std::upper_bound(depth_.begin(), depth_.end(), z);
  const auto j = std::min(static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - depth_.begin() - 1, 0)),
                          depth_.size() - 2);
  c.depth = j;
  c.depth_frac = (z - depth_[j]) / (depth_[j + 1] - depth_[j]);
  return c;
}

double CollocationLayout::interpolate(const double* v, std::size_t stride, const Vec& x) const {
  const Cell c = cell(x);
  const std::size_t nz = depth_.size();
  auto column = [&](std::size_t base) {
    const double a = v[(base + c.depth) * stride], b = v[(base + c.depth + 1) * stride];
    return a + c.depth_frac * (b - a);
  };
  if (dim_ == 2) {
    const double a = column(c.lateral[0] * nz), b = column((c.lateral[0] + 1) * nz);
    return a + c.lateral_frac[0] * (b - a);
  }
  const std::size_t n2 = lateral_[1].size();
  auto row = [&](std::size_t ia) {
    const double a = column((ia * n2 + c.lateral[1]) * nz), b = column((ia * n2 + c.lateral[1] + 1) * nz);
    return a + c.lateral_frac[1] * (b - a);
  };
  const double a = row(c.lateral[0]), b = row(c.lateral[0] + 1);
  return a + c.lateral_frac[0] * (b - a);
}

void CollocationLayout::crossings(const Vec& x, const Direction& xi, double length, std::vector<double>& out) const {
  auto add = [&](double coord, double dir, const std::vector<double>& nodes) {
    if (dir == 0.0) return;
    for (double node : nodes) {
      const double s = (coord - node) / dir;
      if (s > 0.0 && s < length) out.push_back(s);
    }
  };
  add(x.depth(), xi.depth(), depth_);
  for (std::size_t a = 0; a < lateral_.size(); ++a) add(x[static_cast<int>(a)], xi[static_cast<int>(a)], lateral_[a]);
}

double eval_F0(const Medium& m, const BoundaryData& b, const PhasePoint& p, const QuadratureSpec& q) {
  if (!in_phase_space(p)) throw DomainError("F0 evaluated outside X");
  if (p.xi.horizontal()) return 0.0;
  const PhasePoint foot = backtrace_foot(p);
  const double v = b.value(foot.x, foot.xi);
  if (v == 0.0) return 0.0;
  return survival(m, p.x, p.xi, tau_minus(p), q) * v;
}

double scatter_source(const Medium& m, std::span<const double> field, const Vec& x, const Direction& xi,
                      const AngularQuadrature& angles) {
  if (field.size() != angles.size()) throw DomainError("field size does not match the angular quadrature");
  double s = 0.0;
  for (std::size_t k = 0; k < angles.size(); ++k) s += angles[k].weight * m.phase(x, xi, angles[k].xi) * field[k];
  return m.mu_s(x) * s;
}

namespace {

double sup_abs(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s = std::max(s, std::abs(x));
  return s;
}

QuadratureSpec refined(const QuadratureSpec& q, int factor) {
  QuadratureSpec r = q;
  r.angular_nodes = q.angular_nodes * factor;
  r.azimuth_nodes = q.azimuth_nodes * std::max(1, factor / 2);
  return r;
}

}  // namespace

std::vector<double> iterate_step(const Medium& m, const CollocationLayout& layout, const QuadratureSpec& q,
                                 std::span<const double> prev, double mu_t_lower, bool parallel) {
  if (prev.size() != layout.size()) throw DomainError("iterate size does not match the layout");
  const AngularCoupling c = AngularCoupling::build(m.phase, layout.angles());
  RayContext ctx{&m, &layout, q.truncation_length(mu_t_lower), q.ray_panels};
  std::vector<double> j(c.source_size(layout.spatial_size()));
  std::vector<double> out(layout.size());
  if (parallel) {
    source_parallel(c, prev, j);
    sweep_parallel(ctx, c, j, out);
  } else {
    source_serial(c, prev, j);
    sweep_serial(ctx, c, j, out);
  }
  return out;
}

SolutionField::SolutionField(Medium m, BoundaryData b, QuadratureSpec q, std::unique_ptr<CollocationLayout> layout)
    : medium_(std::move(m)), boundary_(std::move(b)), q_(q), layout_(std::move(layout)) {}

SolutionField::SolutionField(SolutionField&& o) noexcept
    : medium_(std::move(o.medium_)),
      boundary_(std::move(o.boundary_)),
      q_(o.q_),
      layout_(std::move(o.layout_)),
      ray_(std::move(o.ray_)),
      isotropic_(o.isotropic_),
      scattering_(o.scattering_),
      meta_(std::move(o.meta_)),
      f0_nodal_(std::move(o.f0_nodal_)),
      f1_nodal_(std::move(o.f1_nodal_)),
      total_(std::move(o.total_)),
      iterates_(std::move(o.iterates_)),
      fine_(std::move(o.fine_)),
      first_source_(std::move(o.first_source_)),
      f0_fine_(std::move(o.f0_fine_)) {
  if (ray_) {
    ray_->medium = &medium_;
    ray_->layout = layout_.get();
  }
}

SolutionField::~SolutionField() = default;

std::span<const double> SolutionField::nodal_iterate(int n) const {
  if (n < 0 || static_cast<std::size_t>(n) >= iterates_.size()) throw DomainError("iterate not retained");
  return iterates_[static_cast<std::size_t>(n)];
}

double SolutionField::F0(const PhasePoint& p) const { return eval_F0(medium_, boundary_, p, q_); }

std::shared_ptr<const std::vector<double>> SolutionField::source_for(int which, const Direction& xi) const {
  const std::array<double, 3> key_dir = isotropic_ ? std::array<double, 3>{0, 0, 0} : xi.vec().c;
  const auto key = std::make_pair(which, key_dir);
  {
    std::lock_guard<std::mutex> lock(cache_mu_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  if (which >= 0 && static_cast<std::size_t>(which) >= std::max<std::size_t>(iterates_.size(), 1))
    throw DomainError("iterate not retained");

  const std::size_t n = layout_->spatial_size(), K = layout_->directions();
  const auto& angles = layout_->angles();
  const Vec origin = Vec::zero(layout_->dim());
  std::vector<double> row(K);
  for (std::size_t k = 0; k < K; ++k)
    row[k] = angles[k].weight * medium_.phase(origin, isotropic_ ? angles[k].xi : xi, angles[k].xi);

  auto out = std::make_shared<std::vector<double>>(n, 0.0);
  auto add_nodal = [&](const std::vector<double>& f) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k < K; ++k) s += row[k] * f[i * K + k];
      (*out)[i] += s;
    }
  };
  auto add_first = [&] {
    if (isotropic_) {
      for (std::size_t i = 0; i < n; ++i) (*out)[i] += first_source_[i];
      return;
    }
    if (auto k = angles.find(xi)) {
      for (std::size_t i = 0; i < n; ++i) (*out)[i] += first_source_[i * K + *k];
      return;
    }
    const std::size_t Kf = fine_.size();
    std::vector<double> frow(Kf);
    for (std::size_t j = 0; j < Kf; ++j) frow[j] = fine_[j].weight * medium_.phase(origin, xi, fine_[j].xi);
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < Kf; ++j) s += frow[j] * f0_fine_[i * Kf + j];
      (*out)[i] += s;
    }
  };

  if (which == 0) {
    add_first();
  } else if (which > 0) {
    add_nodal(iterates_[static_cast<std::size_t>(which)]);
  } else {
    add_first();
    add_nodal(f1_nodal_);
  }
  std::lock_guard<std::mutex> lock(cache_mu_);
  if (cache_.size() > 512) cache_.clear();
  cache_.emplace(key, out);
  return out;
}

double SolutionField::ray_term(int which, const PhasePoint& p) const {
  if (!in_phase_space(p)) throw DomainError("evaluation outside X");
  if (!scattering_) return 0.0;
  const auto j = source_for(which, p.xi);
  return ray_->transport(p.x, p.xi, j->data(), 1);
}

double SolutionField::F1(const PhasePoint& p) const { return ray_term(-1, p); }

double SolutionField::iterate(int n, const PhasePoint& p) const {
  if (n < 0) throw DomainError("iterate index must be nonnegative");
  if (n == 0) return F0(p);
  if (n > meta_.iterations) {
    if (!in_phase_space(p)) throw DomainError("evaluation outside X");
    if (!scattering_) return 0.0;
    throw DomainError("iterate beyond the computed series");
  }
  return ray_term(n - 1, p);
}

double SolutionField::scattering_term(const PhasePoint& p) const {
  if (!scattering_) return 0.0;
  const auto j = source_for(-1, p.xi);
  return medium_.mu_s(p.x) * layout_->interpolate(j->data(), 1, p.x);
}

double SolutionField::iterate_scattering_term(int n, const PhasePoint& p) const {
  if (!scattering_) return 0.0;
  const auto j = source_for(n, p.xi);
  return medium_.mu_s(p.x) * layout_->interpolate(j->data(), 1, p.x);
}

double SolutionField::fixed_point_residual() const {
  if (!scattering_) return 0.0;
  const AngularCoupling c = AngularCoupling::build(medium_.phase, layout_->angles());
  std::vector<double> j(c.source_size(layout_->spatial_size()));
  source_parallel(c, f1_nodal_, j);
  for (std::size_t i = 0; i < j.size(); ++i) j[i] += first_source_[i];
  std::vector<double> f1(layout_->size());
  sweep_parallel(*ray_, c, j, f1);
  double r = 0.0;
  for (std::size_t i = 0; i < f1.size(); ++i) r = std::max(r, std::abs(f0_nodal_[i] + f1[i] - total_[i]));
  return r;
}

SolutionField neumann_solve(const Medium& m, const BoundaryData& b, const QuadratureSpec& q,
                            const SlabDomain& domain, const GridSpec& grid, const SolverOptions& opts) {
  q.validate();
  domain.validate();
  grid.validate(domain.dimension);
  if (m.dim != domain.dimension || b.dim() != domain.dimension)
    throw DomainError("medium, boundary data and domain dimensions differ");
  if (!(opts.tol > 0.0)) throw DomainError("tol must be positive");
  if (opts.first_collision_refinement < 1) throw DomainError("first_collision_refinement must be positive");

  const ValidationReport report = validate(m, q, domain);
  if (!report.passed) throw ValidationError(report);
  if (!b.declares_constant_tails())
    throw DomainError("boundary data must declare constant lateral tails outside the window");
  if (!check_constant_tails(b, domain, q)) throw DomainError("boundary data is not constant beyond the lateral window");

  SolutionField sol(m, b, q, std::make_unique<CollocationLayout>(domain, grid, q));
  const CollocationLayout& layout = *sol.layout_;
  const double M = report.albedo_bound;
  SolveMeta& meta = sol.meta_;
  meta.albedo_bound = M;
  meta.mu_t_lower = report.mu_t_lower;
  meta.sup_f0 = b.sup_norm();
  meta.s_max = q.truncation_length(report.mu_t_lower);
  meta.tol = opts.tol;
  sol.isotropic_ = m.phase.is_isotropic();
  sol.scattering_ = M > 0.0 && meta.sup_f0 > 0.0;
  sol.ray_ = std::make_unique<RayContext>(RayContext{&sol.medium_, sol.layout_.get(), meta.s_max, q.ray_panels});

  const std::size_t N = layout.spatial_size(), K = layout.directions();
  const auto& angles = layout.angles();
  const Medium& med = sol.medium_;
  const BoundaryData& bd = sol.boundary_;

  sol.f0_nodal_.resize(layout.size());
  {
    const auto count = static_cast<long long>(N);
#pragma omp parallel for schedule(dynamic, 4) if (opts.parallel)
    for (long long ii = 0; ii < count; ++ii) {
      const auto i = static_cast<std::size_t>(ii);
      const Vec x = layout.position(i);
      for (std::size_t k = 0; k < K; ++k) sol.f0_nodal_[i * K + k] = eval_F0(med, bd, {x, angles[k].xi}, q);
    }
  }
  meta.iterates.push_back({0, sup_abs(sol.f0_nodal_), meta.sup_f0});
  if (opts.keep_iterates) sol.iterates_.push_back(sol.f0_nodal_);
  sol.f1_nodal_.assign(layout.size(), 0.0);

  if (!sol.scattering_) {
    sol.total_ = sol.f0_nodal_;
    meta.iterations = 0;
    meta.final_increment = 0.0;
    meta.certified_bound = 0.0;
    meta.certified_n = 0;
    return sol;
  }

  // First-collision source from the closed-form ballistic term on a refined
  // angular rule.
  const AngularCoupling coupling = AngularCoupling::build(m.phase, angles);
  sol.fine_ = AngularQuadrature::sphere(layout.dim(), refined(q, opts.first_collision_refinement));
  const std::size_t Kf = sol.fine_.size();
  sol.first_source_.assign(coupling.source_size(N), 0.0);
  if (!sol.isotropic_) sol.f0_fine_.resize(N * Kf);
  {
    const Vec origin = Vec::zero(layout.dim());
    std::vector<double> fine_matrix;
    if (!sol.isotropic_) {
      fine_matrix.resize(K * Kf);
      for (std::size_t k = 0; k < K; ++k)
        for (std::size_t j = 0; j < Kf; ++j)
          fine_matrix[k * Kf + j] = sol.fine_[j].weight * m.phase(origin, angles[k].xi, sol.fine_[j].xi);
    }
    const auto count = static_cast<long long>(N);
#pragma omp parallel for schedule(dynamic, 4) if (opts.parallel)
    for (long long ii = 0; ii < count; ++ii) {
      const auto i = static_cast<std::size_t>(ii);
      const Vec x = layout.position(i);
      if (sol.isotropic_) {
        double s = 0.0;
        for (std::size_t j = 0; j < Kf; ++j) {
          const auto& node = sol.fine_[j];
          s += node.weight * m.phase(origin, node.xi, node.xi) * eval_F0(med, bd, {x, node.xi}, q);
        }
        sol.first_source_[i] = s;
      } else {
        double* f0f = &sol.f0_fine_[i * Kf];
        for (std::size_t j = 0; j < Kf; ++j) f0f[j] = eval_F0(med, bd, {x, sol.fine_[j].xi}, q);
        for (std::size_t k = 0; k < K; ++k) {
          double s = 0.0;
          for (std::size_t j = 0; j < Kf; ++j) s += fine_matrix[k * Kf + j] * f0f[j];
          sol.first_source_[i * K + k] = s;
        }
      }
    }
  }

  std::vector<double> source = sol.first_source_;
  std::vector<double> fn(layout.size());
  int certified_n = -1;
  double certified = 0.0, increment = 0.0;
  for (int n = 1;; ++n) {
    if (opts.parallel)
      sweep_parallel(*sol.ray_, coupling, source, fn);
    else
      sweep_serial(*sol.ray_, coupling, source, fn);
    increment = sup_abs(fn);
    for (std::size_t i = 0; i < fn.size(); ++i) sol.f1_nodal_[i] += fn[i];
    meta.iterates.push_back({n, increment, std::pow(M, n) * meta.sup_f0});
    certified = std::min(std::pow(M, n + 1) * meta.sup_f0, increment * M) / (1.0 - M);
    if (certified <= opts.tol && certified_n < 0) certified_n = n;
    if (opts.keep_iterates) sol.iterates_.push_back(fn);
    meta.iterations = n;
    if (increment <= opts.tol && certified <= opts.tol && n >= opts.min_iterations) break;
    if (n >= opts.max_iterations)
      throw ConvergenceError("iteration budget exhausted before certification", n, increment, certified);
    if (opts.parallel)
      source_parallel(coupling, fn, source);
    else
      source_serial(coupling, fn, source);
  }
  meta.final_increment = increment;
  meta.certified_bound = certified;
  meta.certified_n = certified_n;
  sol.total_.resize(layout.size());
  for (std::size_t i = 0; i < sol.total_.size(); ++i) sol.total_[i] = sol.f0_nodal_[i] + sol.f1_nodal_[i];
  return sol;
}

GParts eval_G(const Medium& m, const BoundaryData& b, const Vec& x, const Direction& xi, const QuadratureSpec& q) {
  if (!is_interior(x)) throw DomainError("G is defined at interior points");
  GParts g;
  for (Hemisphere h : {Hemisphere::upper, Hemisphere::lower}) {
    const auto quad = AngularQuadrature::hemisphere(x.dim, h, q);
    double s = 0.0;
    for (const auto& node : quad.nodes()) {
      const double f = eval_F0(m, b, {x, node.xi}, q);
      if (f != 0.0) s += node.weight * m.phase(x, xi, node.xi) * f;
    }
    (h == Hemisphere::upper ? g.plus : g.minus) = s;
  }
  g.total = g.plus + g.minus;
  return g;
}

GParts eval_G_adaptive(const Medium& m, const BoundaryData& b, const Vec& x, const Direction& xi,
                       const QuadratureSpec& q, double tolerance, std::span<const double> angle_breaks) {
  if (x.dim != 2) throw DomainError("adaptive G is implemented for d = 2");
  if (!is_interior(x)) throw DomainError("G is defined at interior points");
  auto integrand = [&](double theta) {
    const Direction e = Direction::from_angle(theta);
    const double f = eval_F0(m, b, {x, e}, q);
    return f == 0.0 ? 0.0 : m.phase(x, xi, e) * f;
  };
  std::vector<double> cuts{0.0, kPi, 2.0 * kPi};
  for (double a : angle_breaks) {
    const double w = a - 2.0 * kPi * std::floor(a / (2.0 * kPi));
    if (w > 0.0 && w < 2.0 * kPi) cuts.push_back(w);
  }
  std::sort(cuts.begin(), cuts.end());
  GParts g;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double v = adaptive_integral(integrand, cuts[i], cuts[i + 1], tolerance);
    (cuts[i] < kPi ? g.plus : g.minus) += v;
  }
  g.total = g.plus + g.minus;
  return g;
}

double ray_truncation_length(const Medium& m, const Vec& x, const QuadratureSpec& q) {
  double lower = 0.0;
  if (m.mu_t.is_constant()) {
    lower = m.mu_t.constant_value();
  } else {
    const int d = x.dim;
    SlabDomain around = SlabDomain::with_window(d, x[0] - 25.0, x[0] + 25.0);
    if (d == 3) {
      around.window.lower[1] = x[1] - 25.0;
      around.window.upper[1] = x[1] + 25.0;
    }
    ValidationOptions o;
    o.samples = 4000;
    lower = validate(m, q, around, o).mu_t_lower;
  }
  return q.truncation_length(lower);
}

namespace {

// Breakpoints |u| in {0, a/4, a, 4a, ...} below L, graded toward the
// foot of the perpendicular where the Jacobian peaks.
std::vector<double> graded_breaks(double a, double L) {
  std::vector<double> r{0.0};
  for (double t = 0.25 * a; t < L; t *= 4.0) r.push_back(t);
  r.push_back(L);
  return r;
}

}  // namespace

double eval_G_plus_boundary_form(const Medium& m, const BoundaryData& b, const Vec& x, const Direction& xi,
                                 const QuadratureSpec& q, double tolerance) {
  if (!is_interior(x)) throw DomainError("G is defined at interior points");
  const int d = x.dim;
  const double xd = x.depth();
  const double R = ray_truncation_length(m, x, q);
  if (R <= xd) return 0.0;
  const double L = std::sqrt(R * R - xd * xd);
  const auto breaks = graded_breaks(xd, L);

  // Contribution of the bottom-plane point y0 at lateral offset u from x.
  auto kernel = [&](const Vec& y0) {
    const Vec diff = x - y0;
    const double r = diff.norm();
    const Direction e = Direction::normalized(diff);
    const double f = b.value(y0, e);
    if (f == 0.0) return 0.0;
    return m.phase(x, xi, e) * survival(m, x, e, r, q) * f * xd / std::pow(r, d);
  };

  double total = 0.0;
  if (d == 2) {
    for (double sign : {-1.0, 1.0})
      for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
        total += adaptive_integral([&](double u) { return kernel(Vec(x[0] + sign * u, 0.0)); }, breaks[i],
                                   breaks[i + 1], tolerance);
    return total;
  }
  auto radial = [&](double phi) {
    const double c = std::cos(phi), s = std::sin(phi);
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
      acc += adaptive_integral([&](double rho) { return rho * kernel(Vec(x[0] + rho * c, x[1] + rho * s, 0.0)); },
                               breaks[i], breaks[i + 1], tolerance, 200);
    return acc;
  };
  return adaptive_integral(radial, 0.0, 2.0 * kPi, tolerance);
}

}  // namespace slabte
