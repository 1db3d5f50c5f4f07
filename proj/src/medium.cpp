#include "slabte/medium.hpp"

#include <fstream>
#include <sstream>

namespace slabte {

// ---------------------------------------------------------------- grid data

void GridData::validate() const {
  if (dim != 2 && dim != 3) throw DomainError("grid dimension must be 2 or 3");
  if (axes.size() != static_cast<std::size_t>(dim)) throw DomainError("grid needs one axis per dimension");
  std::size_t total = 1;
  for (const auto& a : axes) {
    if (a.count < 2 || !(a.upper > a.lower)) throw DomainError("grid axis needs >= 2 nodes on a nonempty interval");
    total *= static_cast<std::size_t>(a.count);
  }
  if (values.size() != total) throw DomainError("grid value count does not match axes");
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  return out;
}

}  // namespace

GridData load_grid_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open grid file " + path);
  GridData g;
  std::string line;
  bool in_values = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto cells = split_csv(line);
    if (cells.empty() || (cells.size() == 1 && cells[0].empty())) continue;
    if (!in_values) {
      if (cells[0] == "dims") {
        g.dim = std::stoi(cells.at(1));
      } else if (cells[0] == "axis") {
        g.axes.push_back({std::stod(cells.at(2)), std::stod(cells.at(3)), std::stoi(cells.at(4))});
      } else if (cells[0] == "values") {
        in_values = true;
      } else {
        throw DomainError("unexpected grid header line: " + line);
      }
      continue;
    }
    for (const auto& c : cells)
      if (!c.empty()) g.values.push_back(std::stod(c));
  }
  g.validate();
  return g;
}

// ------------------------------------------------------------ scalar fields

ScalarField ScalarField::constant(double v) { return ScalarField(Constant{v}); }

ScalarField ScalarField::depth_affine(double bottom, double top) {
  return ScalarField(DepthAffine{bottom, top});
}

ScalarField ScalarField::bump(double base, double amplitude, const Vec& center, double width) {
  if (!(width > 0.0)) throw DomainError("bump width must be positive");
  return ScalarField(Bump{base, amplitude, center, width});
}

ScalarField ScalarField::grid(GridData data) {
  data.validate();
  return ScalarField(Grid{std::move(data)});
}

namespace {

double interpolate_grid(const GridData& g, const Vec& x) {
  const std::size_t n = g.axes.size();
  std::array<std::size_t, 3> lo{};
  std::array<double, 3> frac{};
  for (std::size_t a = 0; a < n; ++a) {
    const GridAxis& ax = g.axes[a];
    const double h = (ax.upper - ax.lower) / (ax.count - 1);
    double t = (std::clamp(x[static_cast<int>(a)], ax.lower, ax.upper) - ax.lower) / h;
    auto i = static_cast<std::size_t>(std::floor(t));
    if (i >= static_cast<std::size_t>(ax.count - 1)) i = static_cast<std::size_t>(ax.count - 2);
    lo[a] = i;
    frac[a] = t - static_cast<double>(i);
  }
  double v = 0.0;
  const std::size_t corners = std::size_t{1} << n;
  for (std::size_t c = 0; c < corners; ++c) {
    double w = 1.0;
    std::size_t idx = 0;
    for (std::size_t a = 0; a < n; ++a) {
      const bool up = (c >> a) & 1U;
      w *= up ? frac[a] : 1.0 - frac[a];
      idx = idx * static_cast<std::size_t>(g.axes[a].count) + lo[a] + (up ? 1 : 0);
    }
    if (w != 0.0) v += w * g.values[idx];
  }
  return v;
}

}  // namespace

double ScalarField::operator()(const Vec& x) const {
  return std::visit(
      [&](const auto& r) -> double {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, Constant>) {
          return r.value;
        } else if constexpr (std::is_same_v<T, DepthAffine>) {
          return r.bottom + (r.top - r.bottom) * x.depth();
        } else if constexpr (std::is_same_v<T, Bump>) {
          const Vec d = x - r.center;
          return r.base + r.amplitude * std::exp(-d.dot(d) / (r.width * r.width));
        } else {
          return interpolate_grid(r.data, x);
        }
      },
      rep_);
}

bool ScalarField::is_laterally_invariant() const {
  if (std::holds_alternative<Constant>(rep_) || std::holds_alternative<DepthAffine>(rep_)) return true;
  return false;
}

double ScalarField::constant_value() const {
  if (const auto* c = std::get_if<Constant>(&rep_)) return c->value;
  throw DomainError("field is not constant");
}

std::string ScalarField::describe() const {
  std::ostringstream os;
  std::visit(
      [&](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, Constant>) {
          os << "constant(" << r.value << ")";
        } else if constexpr (std::is_same_v<T, DepthAffine>) {
          os << "depth-affine(" << r.bottom << ", " << r.top << ")";
        } else if constexpr (std::is_same_v<T, Bump>) {
          os << "bump(base=" << r.base << ", amplitude=" << r.amplitude << ", width=" << r.width << ")";
        } else {
          os << "grid(" << r.data.values.size() << " nodes)";
        }
      },
      rep_);
  return os.str();
}

// ---------------------------------------------------------- phase function

PhaseFunction PhaseFunction::isotropic(int dim) {
  PhaseFunction p;
  p.kind_ = Kind::isotropic;
  p.dim_ = dim;
  sphere_measure(dim);
  return p;
}

PhaseFunction PhaseFunction::linear(int dim, double g) {
  if (std::abs(g) > 1.0) throw DomainError("linear anisotropy needs |g| <= 1");
  PhaseFunction p = isotropic(dim);
  p.kind_ = Kind::linear;
  p.g_ = g;
  return p;
}

PhaseFunction PhaseFunction::henyey_greenstein(int dim, double g) {
  if (!(std::abs(g) < 1.0)) throw DomainError("Henyey-Greenstein needs |g| < 1");
  PhaseFunction p = isotropic(dim);
  p.kind_ = Kind::henyey_greenstein;
  p.g_ = g;
  return p;
}

PhaseFunction PhaseFunction::tabulated(int dim, std::vector<double> values) {
  if (values.size() < 2) throw DomainError("tabulated phase needs at least two values");
  PhaseFunction p = isotropic(dim);
  p.kind_ = Kind::tabulated;
  p.table_ = std::move(values);
  return p;
}

double PhaseFunction::of_cosine(double mu) const {
  mu = std::clamp(mu, -1.0, 1.0);
  const double area = sphere_measure(dim_);
  switch (kind_) {
    case Kind::isotropic:
      return 1.0 / area;
    case Kind::linear:
      return (1.0 + g_ * mu) / area;
    case Kind::henyey_greenstein: {
      const double den = 1.0 + g_ * g_ - 2.0 * g_ * mu;
      if (dim_ == 2) return (1.0 - g_ * g_) / (area * den);
      return (1.0 - g_ * g_) / (area * den * std::sqrt(den));
    }
    case Kind::tabulated: {
      const double angle = std::acos(mu);
      const double t = angle / kPi * static_cast<double>(table_.size() - 1);
      auto i = static_cast<std::size_t>(std::floor(t));
      if (i >= table_.size() - 1) i = table_.size() - 2;
      const double f = t - static_cast<double>(i);
      return (1.0 - f) * table_[i] + f * table_[i + 1];
    }
  }
  return 0.0;
}

double PhaseFunction::operator()(const Vec&, const Direction& xi, const Direction& xi_prime) const {
  if (kind_ == Kind::isotropic) return 1.0 / sphere_measure(dim_);
  return of_cosine(xi.vec().dot(xi_prime.vec()));
}

double PhaseFunction::upper_bound() const {
  const double area = sphere_measure(dim_);
  switch (kind_) {
    case Kind::isotropic:
      return 1.0 / area;
    case Kind::linear:
      return (1.0 + std::abs(g_)) / area;
    case Kind::henyey_greenstein: {
      const double g = std::abs(g_);
      const double den = (1.0 - g) * (1.0 - g);
      if (dim_ == 2) return (1.0 - g * g) / (area * den);
      return (1.0 - g * g) / (area * den * (1.0 - g));
    }
    case Kind::tabulated:
      return *std::max_element(table_.begin(), table_.end());
  }
  return 0.0;
}

std::string PhaseFunction::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::isotropic: os << "isotropic"; break;
    case Kind::linear: os << "linear(g=" << g_ << ")"; break;
    case Kind::henyey_greenstein: os << "henyey-greenstein(g=" << g_ << ")"; break;
    case Kind::tabulated: os << "tabulated(" << table_.size() << " values)"; break;
  }
  return os.str();
}

// --------------------------------------------------------------- validation

namespace {

double radical_inverse(std::size_t i, std::size_t base) {
  double inv = 1.0 / static_cast<double>(base), f = inv, r = 0.0;
  while (i > 0) {
    r += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

// Halton points in window x [0, 1]; the first rows pin the depth extremes.
std::vector<Vec> sample_slab(const SlabDomain& d, std::size_t n) {
  static constexpr std::size_t primes[] = {2, 3, 5};
  std::vector<Vec> pts;
  pts.reserve(n);
  const int dim = d.dimension;
  for (std::size_t i = 0; i < n; ++i) {
    Vec x = Vec::zero(dim);
    for (int a = 0; a < dim - 1; ++a) {
      const auto aa = static_cast<std::size_t>(a);
      const double u = radical_inverse(i + 1, primes[aa]);
      x[a] = d.window.lower[aa] + u * (d.window.upper[aa] - d.window.lower[aa]);
    }
    if (i % 97 == 0) {
      x.depth() = (i / 97) % 2 == 0 ? 0.0 : 1.0;
    } else {
      x.depth() = radical_inverse(i + 1, primes[static_cast<std::size_t>(dim - 1)]);
    }
    pts.push_back(x);
  }
  return pts;
}

}  // namespace

ValidationError::ValidationError(ValidationReport r)
    : std::runtime_error("medium violates standing assumptions: " + r.failure), report_(std::move(r)) {}

ValidationReport validate(const Medium& m, const QuadratureSpec& q, const SlabDomain& domain,
                          const ValidationOptions& opts) {
  domain.validate();
  q.validate();
  if (m.dim != domain.dimension || m.phase.dim() != m.dim)
    throw DomainError("medium and domain dimensions differ");

  ValidationReport r;
  const auto pts = sample_slab(domain, std::max<std::size_t>(opts.samples, 2));
  r.samples = pts.size();
  r.gap = kInf;
  r.mu_t_lower = kInf;
  r.mu_t_upper = -kInf;
  r.mu_s_upper = -kInf;
  r.albedo_bound = 0.0;
  bool negative = false, unbounded = false;
  for (const Vec& x : pts) {
    const double t = m.mu_t(x), s = m.mu_s(x);
    if (!std::isfinite(t) || !std::isfinite(s)) unbounded = true;
    if (t < 0.0 || s < 0.0) negative = true;
    r.gap = std::min(r.gap, t - s);
    r.mu_t_lower = std::min(r.mu_t_lower, t);
    r.mu_t_upper = std::max(r.mu_t_upper, t);
    r.mu_s_upper = std::max(r.mu_s_upper, s);
    if (t > 0.0) r.albedo_bound = std::max(r.albedo_bound, s / t);
    else if (s > 0.0) r.albedo_bound = kInf;
  }

  const AngularQuadrature sphere = AngularQuadrature::sphere(m.dim, q);
  const std::size_t nphase = std::min(opts.phase_samples, pts.size());
  const std::size_t stride = std::max<std::size_t>(1, sphere.size() / 8);
  r.normalization_error = 0.0;
  r.phase_upper = 0.0;
  for (std::size_t i = 0; i < nphase; ++i) {
    const Vec& x = pts[i * (pts.size() / nphase)];
    for (std::size_t k = 0; k < sphere.size(); k += stride) {
      const Direction& xi = sphere[k].xi;
      double integral = 0.0;
      for (const auto& node : sphere.nodes()) {
        const double pv = m.phase(x, xi, node.xi);
        if (!std::isfinite(pv)) unbounded = true;
        if (pv < 0.0) negative = true;
        r.phase_upper = std::max(r.phase_upper, pv);
        integral += node.weight * pv;
      }
      r.normalization_error = std::max(r.normalization_error, std::abs(integral - 1.0));
    }
  }

  if (negative) r.failure = "nonnegativity: a coefficient or the phase function is negative";
  else if (unbounded) r.failure = "boundedness: a coefficient is not finite";
  else if (!(r.gap > 0.0)) r.failure = "gap: inf (mu_t - mu_s) = " + std::to_string(r.gap) + " is not positive";
  else if (!(r.mu_t_lower > 0.0)) r.failure = "mu_t lower bound is not positive";
  else if (!(r.albedo_bound < 1.0)) r.failure = "albedo: M = sup mu_s/mu_t is not below 1";
  else if (r.normalization_error > opts.normalization_tolerance)
    r.failure = "normalization: |int p dsigma - 1| = " + std::to_string(r.normalization_error) +
                " exceeds " + std::to_string(opts.normalization_tolerance);
  r.passed = r.failure.empty();
  return r;
}

// ----------------------------------------------------------- optical depth

namespace {

void require_segment(const Vec& x, const Direction& xi, double s) {
  if (!(s >= 0.0)) throw DomainError("ray length must be nonnegative");
  const double end = x.depth() - s * xi.depth();
  if (x.depth() < -1e-12 || x.depth() > 1.0 + 1e-12 || end < -1e-12 || end > 1.0 + 1e-12)
    throw DomainError("ray segment leaves the closed slab");
}

}  // namespace

double optical_depth(const Medium& m, const Vec& x, const Direction& xi, double s,
                     const QuadratureSpec& q) {
  require_segment(x, xi, s);
  if (s == 0.0) return 0.0;
  if (m.mu_t.is_constant()) return m.mu_t.constant_value() * s;
  const PanelRule& rule = PanelRule::get();
  const int panels = std::max(1, static_cast<int>(std::ceil(s * q.ray_panels - 1e-12)));
  const double h = s / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = (p + 0.5) * h;
    for (std::size_t j = 0; j < PanelRule::kOrder; ++j)
      total += 0.5 * h * rule.w[j] * m.mu_t(x - (mid + 0.5 * h * rule.x[j]) * xi.vec());
  }
  return total;
}

double survival(const Medium& m, const Vec& x, const Direction& xi, double s, const QuadratureSpec& q) {
  return std::exp(-optical_depth(m, x, xi, s, q));
}

double distance_at_optical_depth(const Medium& m, const Vec& x, const Direction& xi, double target,
                                 double limit, const QuadratureSpec& q) {
  if (!(target >= 0.0)) throw DomainError("optical depth target must be nonnegative");
  if (target == 0.0) return 0.0;
  if (m.mu_t.is_constant()) {
    const double mu = m.mu_t.constant_value();
    if (!(mu > 0.0)) return kInf;
    const double s = target / mu;
    return s <= limit ? s : kInf;
  }
  const double panel = 1.0 / q.ray_panels;
  double start = 0.0, acc = 0.0;
  while (start < limit) {
    const double end = std::min(limit, start + panel);
    const Vec origin = x - start * xi.vec();
    const double piece = optical_depth(m, origin, xi, end - start, q);
    if (acc + piece >= target) {
      double lo = 0.0, hi = end - start;
      for (int it = 0; it < 80 && hi - lo > 1e-15 * (1.0 + start); ++it) {
        const double midp = 0.5 * (lo + hi);
        if (acc + optical_depth(m, origin, xi, midp, q) < target) lo = midp;
        else hi = midp;
      }
      return start + 0.5 * (lo + hi);
    }
    acc += piece;
    start = end;
    if (!std::isfinite(limit) && start > 1e12) break;
  }
  return kInf;
}

}  // namespace slabte
