#include "slabte/geometry.hpp"

#include <algorithm>

namespace slabte {

Vec Vec::zero(int d) {
  if (d == 2) return Vec(0.0, 0.0);
  if (d == 3) return Vec(0.0, 0.0, 0.0);
  throw DomainError("dimension must be 2 or 3");
}

double Vec::dot(const Vec& o) const {
  double s = 0.0;
  for (int i = 0; i < dim; ++i) s += c[static_cast<std::size_t>(i)] * o.c[static_cast<std::size_t>(i)];
  return s;
}

Vec operator+(const Vec& a, const Vec& b) {
  Vec r = a;
  for (int i = 0; i < a.dim; ++i) r[i] += b[i];
  return r;
}

Vec operator-(const Vec& a, const Vec& b) {
  Vec r = a;
  for (int i = 0; i < a.dim; ++i) r[i] -= b[i];
  return r;
}

Vec operator*(double s, const Vec& a) {
  Vec r = a;
  for (int i = 0; i < a.dim; ++i) r[i] *= s;
  return r;
}

Vec operator-(const Vec& a) { return -1.0 * a; }

namespace {

// cos/sin that return exact zeros and ones on the quarter-turn angles.
void exact_cos_sin(double theta, double& c, double& s) {
  double t = std::fmod(theta, 2.0 * kPi);
  if (t < 0.0) t += 2.0 * kPi;
  if (t == 0.0) {
    c = 1.0; s = 0.0;
  } else if (t == 0.5 * kPi) {
    c = 0.0; s = 1.0;
  } else if (t == kPi) {
    c = -1.0; s = 0.0;
  } else if (t == 1.5 * kPi) {
    c = 0.0; s = -1.0;
  } else {
    c = std::cos(t);
    s = std::sin(t);
  }
}

}  // namespace

Direction Direction::from_angle(double theta) {
  double c = 0.0, s = 0.0;
  exact_cos_sin(theta, c, s);
  return Direction(Vec(c, s));
}

Direction Direction::from_polar(double polar, double azimuth) {
  double cp = 0.0, sp = 0.0, ca = 0.0, sa = 0.0;
  exact_cos_sin(polar, cp, sp);
  exact_cos_sin(azimuth, ca, sa);
  return Direction(Vec(sp * ca, sp * sa, cp));
}

Direction Direction::from_unit(const Vec& v) {
  if (v.dim != 2 && v.dim != 3) throw DomainError("direction dimension must be 2 or 3");
  if (std::abs(v.norm() - 1.0) > 1e-12) throw DomainError("direction is not a unit vector");
  return Direction(v);
}

Direction Direction::normalized(const Vec& v) {
  const double n = v.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw DomainError("cannot normalize a zero vector");
  Vec u = (1.0 / n) * v;
  return Direction(u);
}

double Direction::angle() const {
  if (v_.dim != 2) throw DomainError("angle() is defined for d = 2 only");
  double t = std::atan2(v_[1], v_[0]);
  if (t < 0.0) t += 2.0 * kPi;
  return t;
}

Direction Direction::reversed() const { return Direction(-v_); }

Vec outer_normal(Face face, int dim) {
  Vec n = Vec::zero(dim);
  n.depth() = face == Face::bottom ? -1.0 : 1.0;
  return n;
}

double LateralWindow::clamp(int axis, double v) const {
  const auto a = static_cast<std::size_t>(axis);
  return std::clamp(v, lower[a], upper[a]);
}

bool LateralWindow::contains(const Vec& x) const {
  for (std::size_t a = 0; a < lower.size(); ++a) {
    const double v = x[static_cast<int>(a)];
    if (v < lower[a] || v > upper[a]) return false;
  }
  return true;
}

void SlabDomain::validate() const {
  if (dimension != 2 && dimension != 3) throw DomainError("slab dimension must be 2 or 3");
  const auto n = static_cast<std::size_t>(dimension - 1);
  if (window.lower.size() != n || window.upper.size() != n)
    throw DomainError("lateral window must have d-1 axes");
  for (std::size_t a = 0; a < n; ++a)
    if (!(window.lower[a] < window.upper[a])) throw DomainError("lateral window is empty");
}

SlabDomain SlabDomain::with_window(int dim, double lo, double hi) {
  SlabDomain d;
  d.dimension = dim;
  d.window.lower.assign(static_cast<std::size_t>(dim - 1), lo);
  d.window.upper.assign(static_cast<std::size_t>(dim - 1), hi);
  d.validate();
  return d;
}

bool is_interior(const Vec& x) { return x.depth() > 0.0 && x.depth() < 1.0; }

bool on_boundary(const Vec& x) { return x.depth() == 0.0 || x.depth() == 1.0; }

bool on_incoming_boundary(const PhasePoint& p) {
  if (p.x.depth() == 0.0) return p.xi.depth() > 0.0;
  if (p.x.depth() == 1.0) return p.xi.depth() < 0.0;
  return false;
}

bool in_phase_space(const PhasePoint& p) {
  if (p.x.dim != p.xi.dim()) return false;
  if (!std::isfinite(p.x.norm())) return false;
  return is_interior(p.x) || on_incoming_boundary(p);
}

namespace {

void require_phase_point(const PhasePoint& p) {
  if (!in_phase_space(p)) throw DomainError("phase point lies outside X");
}

}  // namespace

double tau_minus(const PhasePoint& p) {
  require_phase_point(p);
  const double xd = p.x.depth();
  const double vd = p.xi.depth();
  if (vd > 0.0) return xd / vd;
  if (vd < 0.0) return (xd - 1.0) / vd;
  return kInf;
}

double tau_plus(const PhasePoint& p) {
  require_phase_point(p);
  const double xd = p.x.depth();
  const double vd = p.xi.depth();
  if (vd > 0.0) return (1.0 - xd) / vd;
  if (vd < 0.0) return -xd / vd;
  return kInf;
}

Vec advance(const Vec& x, const Direction& xi, double t) { return x + t * xi.vec(); }

PhasePoint backtrace_foot(const PhasePoint& p) {
  if (p.xi.horizontal()) throw DomainError("horizontal direction has no foot point");
  const double t = tau_minus(p);
  PhasePoint foot{advance(p.x, p.xi, -t), p.xi};
  foot.x.depth() = p.xi.depth() > 0.0 ? 0.0 : 1.0;
  return foot;
}

}  // namespace slabte
