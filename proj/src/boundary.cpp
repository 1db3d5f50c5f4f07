#include "slabte/boundary.hpp"

#include <algorithm>
#include <cmath>

namespace slabte {

std::string to_string(Regularity r) {
  switch (r) {
    case Regularity::condition1: return "condition1";
    case Regularity::condition2: return "condition2";
    case Regularity::both: return "both";
    case Regularity::neither: return "neither";
  }
  return "neither";
}

Regularity parse_regularity(const std::string& s) {
  if (s == "condition1") return Regularity::condition1;
  if (s == "condition2") return Regularity::condition2;
  if (s == "both") return Regularity::both;
  if (s == "neither") return Regularity::neither;
  throw DomainError("unknown regularity class: " + s);
}

bool satisfies_condition1(Regularity r) { return r == Regularity::condition1 || r == Regularity::both; }
bool satisfies_condition2(Regularity r) { return r == Regularity::condition2 || r == Regularity::both; }

std::string to_string(Approach a) { return a == Approach::lateral ? "lateral" : "angular"; }

Approach parse_approach(const std::string& s) {
  if (s == "lateral") return Approach::lateral;
  if (s == "angular") return Approach::angular;
  throw DomainError("unknown approach family: " + s);
}

BoundaryData::BoundaryData(int dim, std::string name, Evaluator eval, double sup_norm, Regularity declared)
    : dim_(dim), name_(std::move(name)), eval_(std::move(eval)), sup_norm_(sup_norm), declared_(declared) {
  if (dim != 2 && dim != 3) throw DomainError("boundary data dimension must be 2 or 3");
  if (!eval_) throw DomainError("boundary data needs an evaluator");
  if (!(sup_norm >= 0.0) || !std::isfinite(sup_norm)) throw DomainError("boundary data must be bounded");
}

double BoundaryData::operator()(const PhasePoint& p) const {
  if (p.x.dim != dim_ || !on_incoming_boundary(p)) throw DomainError("f0 is only defined on Gamma_-");
  return eval_(p.x, p.xi);
}

void BoundaryData::set_seeds(std::vector<DiscSeed> seeds) {
  for (const auto& s : seeds) {
    if (!on_incoming_boundary({s.x_star, s.xi_star})) throw DomainError("seed must lie on Gamma_-");
    if (s.jump == 0.0) throw DomainError("seed jump must be nonzero");
  }
  seeds_ = std::move(seeds);
}

double BoundaryData::locus_distance(const Vec& x, const Direction& xi) const {
  return locus_ ? locus_(x, xi) : kInf;
}

namespace {

bool is_bottom(const Vec& x) { return x.depth() < 0.5; }

double smoothstep(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / t), b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

}  // namespace

BoundaryData BoundaryData::constant(int dim, double value) {
  return faces(dim, value, value);
}

BoundaryData BoundaryData::faces(int dim, double bottom, double top) {
  BoundaryData b(
      dim, "faces", [=](const Vec& x, const Direction&) { return is_bottom(x) ? bottom : top; },
      std::max(std::abs(bottom), std::abs(top)), Regularity::both);
  if (bottom == top) b.name_ = "constant";
  return b;
}

BoundaryData BoundaryData::lateral_step(int dim, double position, double left, double right, double top) {
  BoundaryData b(
      dim, "lateral-step",
      [=](const Vec& x, const Direction&) {
        if (!is_bottom(x)) return top;
        return x[0] >= position ? right : left;
      },
      std::max({std::abs(left), std::abs(right), std::abs(top)}), Regularity::condition2);
  b.set_locus([=](const Vec& x, const Direction&) { return is_bottom(x) ? std::abs(x[0] - position) : kInf; });
  return b;
}

BoundaryData BoundaryData::angular_step(double cut, double below, double above, double top) {
  if (!(cut > 0.0 && cut < kPi)) throw DomainError("angular cut must lie in (0, pi)");
  BoundaryData b(
      2, "angular-step",
      [=](const Vec& x, const Direction& xi) {
        if (!is_bottom(x)) return top;
        return xi.angle() > cut ? above : below;
      },
      std::max({std::abs(below), std::abs(above), std::abs(top)}), Regularity::condition1);
  b.set_locus([=](const Vec& x, const Direction& xi) {
    return is_bottom(x) ? std::abs(xi.angle() - cut) : kInf;
  });
  return b;
}

BoundaryData BoundaryData::smooth_ramp(int dim, double center, double width, double lo, double hi,
                                       double tilt, double top) {
  if (!(width > 0.0)) throw DomainError("ramp width must be positive");
  const double sup = std::max(std::max(std::abs(lo), std::abs(hi)) * (1.0 + std::abs(tilt)), std::abs(top));
  return BoundaryData(
      dim, "smooth-ramp",
      [=](const Vec& x, const Direction& xi) {
        if (!is_bottom(x)) return top;
        const double s = smoothstep((x[0] - center) / width + 0.5);
        return (lo + (hi - lo) * s) * (1.0 + tilt * xi[0]);
      },
      sup, Regularity::both);
}

BoundaryData BoundaryData::counterexample(const Vec& x_bar) {
  if (x_bar.dim != 2) throw DomainError("the counterexample is two-dimensional");
  if (!(x_bar[1] > 0.0 && x_bar[1] < 1.0)) throw DomainError("x_bar must be interior");
  const double xb1 = x_bar[0], xb2 = x_bar[1];
  BoundaryData b(
      2, "counterexample",
      [=](const Vec& x, const Direction& xi) {
        if (!is_bottom(x) || !(xi[1] > 0.0)) return 0.0;
        return x[0] >= xb1 - xb2 * xi[0] / xi[1] ? 1.0 : 0.0;
      },
      1.0, Regularity::neither);
  b.set_locus([=](const Vec& x, const Direction& xi) {
    if (!is_bottom(x) || !(xi[1] > 0.0)) return kInf;
    return std::abs(x[0] - (xb1 - xb2 * xi[0] / xi[1]));
  });
  b.set_constant_tails(false);
  return b;
}

BoundaryData BoundaryData::piecewise(std::vector<Piece> pieces, double bottom_default, double top_default,
                                     Regularity declared) {
  double sup = std::max(std::abs(bottom_default), std::abs(top_default));
  for (const auto& p : pieces) sup = std::max(sup, std::abs(p.value));
  BoundaryData b(
      2, "piecewise",
      [=](const Vec& x, const Direction& xi) {
        const Face face = is_bottom(x) ? Face::bottom : Face::top;
        const double th = xi.angle();
        for (const auto& p : pieces) {
          if (p.face != face) continue;
          if (x[0] >= p.x_lo && x[0] < p.x_hi && th > p.theta_lo && th <= p.theta_hi) return p.value;
        }
        return face == Face::bottom ? bottom_default : top_default;
      },
      sup, declared);
  b.set_locus([=](const Vec& x, const Direction& xi) {
    const Face face = is_bottom(x) ? Face::bottom : Face::top;
    const double th = xi.angle();
    double d = kInf;
    for (const auto& p : pieces) {
      if (p.face != face) continue;
      for (double e : {p.x_lo, p.x_hi})
        if (std::isfinite(e)) d = std::min(d, std::abs(x[0] - e));
      for (double e : {p.theta_lo, p.theta_hi})
        if (e > 0.0 && e < 2 * kPi && e != kPi) d = std::min(d, std::abs(th - e));
    }
    return d;
  });
  return b;
}

int counterexample_piece(const Vec& x_bar, const Vec& x, const Direction& xi) {
  if (!on_incoming_boundary({x, xi})) return 0;
  if (x.depth() == 1.0) return 3;
  return x[0] >= x_bar[0] - x_bar[1] * xi[0] / xi[1] ? 1 : 2;
}

bool check_constant_tails(const BoundaryData& b, const SlabDomain& domain, const QuadratureSpec& q) {
  if (!b.declares_constant_tails()) return false;
  const int dim = domain.dimension;
  const auto& w = domain.window;
  for (Face face : {Face::bottom, Face::top}) {
    const auto quad = AngularQuadrature::hemisphere(dim, face == Face::bottom ? Hemisphere::upper : Hemisphere::lower, q);
    for (int axis = 0; axis < dim - 1; ++axis) {
      const auto a = static_cast<std::size_t>(axis);
      const double width = w.upper[a] - w.lower[a];
      for (double k : {0.5, 2.0, 10.0, 100.0, 1000.0}) {
        for (double side : {-1.0, 1.0}) {
          Vec x = Vec::zero(dim);
          for (int o = 0; o < dim - 1; ++o)
            x[o] = 0.5 * (w.lower[static_cast<std::size_t>(o)] + w.upper[static_cast<std::size_t>(o)]);
          x[axis] = side > 0 ? w.upper[a] + k * width : w.lower[a] - k * width;
          x.depth() = face == Face::bottom ? 0.0 : 1.0;
          Vec clamped = x;
          clamped[axis] = w.clamp(axis, x[axis]);
          for (const auto& node : quad.nodes())
            if (std::abs(b.value(x, node.xi) - b.value(clamped, node.xi)) > 1e-12) return false;
        }
      }
    }
  }
  return true;
}

namespace {

struct Scan {
  double largest_step = 0.0;
  bool jump = false;
};

Scan scan(const std::function<double(double)>& g, double a, double b, int m, double scale) {
  auto max_step = [&](int n) {
    double prev = g(a), d = 0.0;
    for (int i = 1; i <= n; ++i) {
      const double v = g(a + (b - a) * i / n);
      d = std::max(d, std::abs(v - prev));
      prev = v;
    }
    return d;
  };
  const double coarse = max_step(m), fine = max_step(4 * m);
  return {fine, fine > 1e-9 * scale && fine > 0.5 * coarse};
}

bool near_any(double v, const std::vector<double>& set) {
  return std::any_of(set.begin(), set.end(), [&](double e) { return std::abs(v - e) < 1e-9; });
}

}  // namespace

RegularityEvidence classify_regularity(const BoundaryData& b, const SlabDomain& domain, int samples) {
  domain.validate();
  if (samples < 1) throw DomainError("classification needs at least one probe");
  RegularityEvidence ev;
  const int dim = domain.dimension;
  const int m = std::max(64, 8 * samples);
  const double scale = std::max(1.0, b.sup_norm());
  const double eps = 1e-9;
  const auto& w = domain.window;

  auto record = [&](bool cond1, const Scan& s) {
    ev.largest_jump = std::max(ev.largest_jump, s.jump ? s.largest_step : 0.0);
    if (cond1) {
      ++ev.condition1_probes;
      if (s.jump) ++ev.condition1_jumps;
    } else {
      ++ev.condition2_probes;
      if (s.jump) ++ev.condition2_jumps;
    }
  };

  for (Face face : {Face::bottom, Face::top}) {
    const double depth = face == Face::bottom ? 0.0 : 1.0;
    const double base_angle = face == Face::bottom ? 0.0 : kPi;
    if (dim == 2) {
      for (int k = 0; k < samples; ++k) {
        const double th = base_angle + (k + 0.5) * kPi / samples;
        if (near_any(th, b.exceptional_angles)) continue;
        const Direction xi = Direction::from_angle(th);
        record(true, scan([&](double x1) { return b.value(Vec(x1, depth), xi); }, w.lower[0], w.upper[0], m, scale));
      }
      for (int k = 0; k < samples; ++k) {
        const double x1 = w.lower[0] + (k + 0.5) * (w.upper[0] - w.lower[0]) / samples;
        if (near_any(x1, b.exceptional_positions)) continue;
        record(false, scan([&](double th) { return b.value(Vec(x1, depth), Direction::from_angle(th)); },
                           base_angle + eps, base_angle + kPi - eps, m, scale));
      }
    } else {
      const double sign = face == Face::bottom ? 1.0 : -1.0;
      const double c1 = 0.5 * (w.lower[0] + w.upper[0]), c2 = 0.5 * (w.lower[1] + w.upper[1]);
      for (int k = 0; k < samples; ++k) {
        const double polar = (k + 0.5) * 0.5 * kPi / samples;
        const double az = 2.0 * kPi * (k + 0.25) / samples;
        const Direction xi = Direction::normalized(
            Vec(std::sin(polar) * std::cos(az), std::sin(polar) * std::sin(az), sign * std::cos(polar)));
        record(true, scan([&](double t) { return b.value(Vec(t, c2, depth), xi); }, w.lower[0], w.upper[0], m, scale));
        record(true, scan([&](double t) { return b.value(Vec(c1, t, depth), xi); }, w.lower[1], w.upper[1], m, scale));
      }
      for (int k = 0; k < samples; ++k) {
        const double x1 = w.lower[0] + (k + 0.5) * (w.upper[0] - w.lower[0]) / samples;
        const double x2 = w.lower[1] + (k + 0.5) * (w.upper[1] - w.lower[1]) / samples;
        if (near_any(x1, b.exceptional_positions)) continue;
        const double az = 2.0 * kPi * (k + 0.5) / samples;
        record(false, scan(
                          [&](double polar) {
                            const Direction xi = Direction::normalized(Vec(std::sin(polar) * std::cos(az),
                                                                           std::sin(polar) * std::sin(az),
                                                                           sign * std::cos(polar)));
                            return b.value(Vec(x1, x2, depth), xi);
                          },
                          eps, 0.5 * kPi - eps, m, scale));
      }
    }
  }

  const bool c1 = ev.condition1_jumps == 0, c2 = ev.condition2_jumps == 0;
  ev.empirical = c1 && c2 ? Regularity::both : c1 ? Regularity::condition1 : c2 ? Regularity::condition2 : Regularity::neither;
  const Regularity decl = b.declared_regularity();
  ev.agrees_with_declared = (!satisfies_condition1(decl) || c1) && (!satisfies_condition2(decl) || c2);
  if (!ev.agrees_with_declared)
    ev.note = "contradiction: declared " + to_string(decl) + " but scans show " + to_string(ev.empirical);
  else if (ev.empirical != decl)
    ev.note = "scans show " + to_string(ev.empirical) + ", stronger than declared " + to_string(decl);
  return ev;
}

std::vector<DiscontinuityRay> seed_rays(const BoundaryData& b) {
  std::vector<DiscontinuityRay> rays;
  rays.reserve(b.seeds().size());
  for (const auto& s : b.seeds()) rays.push_back({s, tau_plus({s.x_star, s.xi_star})});
  return rays;
}

}  // namespace slabte
