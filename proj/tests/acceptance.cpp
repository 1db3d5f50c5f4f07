// Acceptance checks. Usage: acceptance [AC1 ... AC9]; no argument runs all.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <string>

#include "oracles.hpp"
#include "slabte/analysis.hpp"
#include "slabte/config.hpp"

using namespace slabte;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Medium iso(double mt, double ms) {
  return {2, ScalarField::constant(mt), ScalarField::constant(ms), PhaseFunction::isotropic(2)};
}

std::string scenario_path(const char* name) { return std::string(SLABTE_SCENARIO_DIR) + "/" + name; }

PhasePoint interior_point(std::mt19937_64& rng, double lo, double hi, double min_xd = 1e-3) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (;;) {
    const Direction xi = Direction::from_angle(2.0 * kPi * u(rng));
    if (std::abs(xi.depth()) < min_xd) continue;
    return {Vec(lo + (hi - lo) * u(rng), 0.01 + 0.98 * u(rng)), xi};
  }
}

Outcome ac1() {
  const auto t0 = std::chrono::steady_clock::now();
  QuadratureSpec q;
  q.angular_nodes = 16;
  const auto sol = neumann_solve(iso(1.0, 0.0), BoundaryData::constant(2, 1.0), q,
                                 SlabDomain::with_window(2, -1, 1), GridSpec{4, 8});
  std::mt19937_64 rng(101);
  double err = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const PhasePoint p = interior_point(rng, -1.0, 1.0);
    err = std::max(err, std::abs(sol.value(p) - std::exp(-oracle::tau_minus(p.x.depth(), p.xi.depth()))));
  }
  const double t = seconds_since(t0);
  return {err <= 1e-8 && t < 5.0, fmt("max error %.2e (<= 1e-8), %.2f s (< 5 s)", err, t)};
}

Outcome ac2() {
  const auto t0 = std::chrono::steady_clock::now();
  QuadratureSpec q;
  q.angular_nodes = 32;
  SolverOptions o;
  o.tol = 1e-6;
  o.min_iterations = 15;
  const auto sol = neumann_solve(iso(1.0, 0.5), BoundaryData::constant(2, 1.0), q,
                                 SlabDomain::with_window(2, -1, 1), GridSpec{64, 32}, o);
  const double t = seconds_since(t0);
  const auto& it = sol.meta().iterates;
  bool ok = it.size() > 15;
  if (!ok) return {false, fmt("only %zu iterates retained", it.size())};
  double worst = -kInf;
  for (std::size_t n = 1; n <= 15 && n < it.size(); ++n) {
    const double excess = it[n].sup_norm - std::pow(0.5, static_cast<double>(n));
    worst = std::max(worst, excess);
    ok = ok && excess <= 1e-5;
  }
  double sup = 0.0;
  for (double v : sol.nodal_total()) sup = std::max(sup, std::abs(v));
  ok = ok && sup <= 2.0 + 1e-5 && t < 60.0;
  return {ok, fmt("max_n (sup|f^(n)| - 0.5^n) = %.2e (<= 1e-5), sup|f| = %.6f (<= 2 + 1e-5), %.1f s (< 60 s)",
                  worst, sup, t)};
}

Outcome ac3() {
  QuadratureSpec q;
  q.angular_nodes = 32;
  SolverOptions o;
  o.tol = 1e-6;
  const Medium m{2, ScalarField::constant(1.0), ScalarField::constant(0.5), PhaseFunction::linear(2, 0.5)};
  const auto sol = neumann_solve(m, BoundaryData::smooth_ramp(2, 0.0, 2.0, 0.2, 1.0, 0.3, 0.5), q,
                                 SlabDomain::with_window(2, -3, 3), GridSpec{32, 32}, o);
  const double r = sol.fixed_point_residual();
  return {r <= 3.0 * o.tol, fmt("max nodal |F0 + K f - f| = %.2e (<= 3e-6)", r)};
}

Outcome ac4() {
  const auto t0 = std::chrono::steady_clock::now();
  const Scenario s = load_scenario(scenario_path("mc_check.yaml"));
  const auto sol = neumann_solve(s.medium, s.boundary, s.quadrature, s.domain, s.grid, s.solver);
  const double lo = s.domain.window.lower[0], hi = s.domain.window.upper[0];
  const double quarter = 0.25 * (hi - lo);
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int agree = 0;
  double zmax = 0.0;
  for (int i = 0; i < 10; ++i) {
    PhasePoint p;
    do {
      p = {Vec(lo + quarter + 2.0 * quarter * u(rng), 0.05 + 0.9 * u(rng)), Direction::from_angle(2.0 * kPi * u(rng))};
    } while (std::abs(p.xi.depth()) < 0.05);
    const auto e = mc_oracle(s.medium, s.boundary, p, 100000, 1000 + static_cast<std::uint64_t>(i), s.quadrature);
    const double z = (sol.value(p) - e.mean) / std::max(e.std_error, 1e-300);
    zmax = std::max(zmax, std::abs(z));
    if (std::abs(z) <= 3.0) ++agree;
  }
  const double t = seconds_since(t0);
  return {agree >= 9 && t < 120.0, fmt("%d/10 points with |z| <= 3 (>= 9), max |z| = %.2f, %.1f s (< 120 s)", agree,
                                       zmax, t)};
}

Outcome ac5() {
  const Scenario s = load_scenario(scenario_path("lateral_step.yaml"));
  const auto sol = neumann_solve(s.medium, s.boundary, s.quadrature, s.domain, s.grid, s.solver);
  const auto rays = seed_rays(s.boundary);
  double jump_err = 0.0, osc = 0.0, off = 0.0;
  for (double t : {0.25, 0.5, 0.75}) {
    const JumpEstimate j = measure_jump(sol, rays.at(0), t, s.analysis.offsets);
    jump_err = std::max(jump_err, std::abs(j.measured - std::exp(-t)));
    osc = std::max(osc, f1_continuity_scan(sol, rays[0], t, s.analysis.offsets).oscillation.back());
  }
  const auto probes = off_ray_probes(sol, rays, 8, 505, s.analysis.offsets);
  for (const auto& p : probes) off = std::max(off, std::abs(p.jump.measured));
  const bool ok = jump_err <= 1e-3 && osc <= 1e-3 && off <= 1e-3 && probes.size() == 8;
  return {ok, fmt("max |jump - e^-t| = %.2e, F1 oscillation = %.2e, off-ray max = %.2e over %zu probes (all <= 1e-3)",
                  jump_err, osc, off, probes.size())};
}

Outcome ac6() {
  const Medium m = iso(1.0, 0.5);
  const BoundaryData b = BoundaryData::constant(2, 1.0);
  const QuadratureSpec q;
  std::mt19937_64 rng(606);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  bool bounded = true;
  double worst = 0.0;
  for (double xd : {1e-1, 1e-2, 1e-3}) {
    const Direction xi = Direction::from_unit(Vec(std::sqrt(1.0 - xd * xd), xd));
    for (int i = 0; i < 100; ++i) {
      const Vec x(4.0 * u(rng) - 2.0, 0.01 + 0.98 * u(rng));
      const double bound = b.sup_norm() * std::exp(-1.0 * oracle::tau_minus(x.depth(), xd));
      const double f = std::abs(eval_F0(m, b, {x, xi}, q));
      worst = std::max(worst, f - bound);
      bounded = bounded && f <= bound * (1.0 + 1e-12);
    }
  }
  const double at = std::exp(-1.0 * oracle::tau_minus(0.5, 1e-2));
  return {bounded && at < 1e-40,
          fmt("|F0| within bound at 300 points: %s; bound at xi_d = 1e-2, x_d = 0.5 is %.3e (< 1e-40 required)",
              bounded ? "yes" : "no", at)};
}

Outcome ac7() {
  const Vec xb(0.0, 0.5);
  const auto r = counterexample_report(iso(1.0, 0.5), xb, QuadratureSpec{}, 707);
  const double g_bar = oracle::g_plus_unit_bottom(1.0, 0.5);
  const bool a = r.g_minus_probes >= 100 && r.g_minus_max <= 1e-12;
  const bool b = std::abs(r.g_jump - g_bar) <= 1e-4;
  const auto& along = r.at_x_bar.front().mismatch;
  const auto& control = r.control.mismatch;
  const bool c = std::abs(along.back()) >= 0.5 * std::abs(along.front()) && std::abs(along.front()) > 0.0 &&
                 10.0 * std::abs(control.back()) <= std::abs(control.front());
  return {a && b && c,
          fmt("(a) max |G_-| = %.1e over %zu probes; (b) G jump %.10f vs %.10f; (c) mismatch %.3e -> %.3e at x_bar, "
              "%.3e -> %.3e at control",
              r.g_minus_max, r.g_minus_probes, r.g_jump, g_bar, along.front(), along.back(), control.front(),
              control.back())};
}

Outcome ac8() {
  const Medium m{2, ScalarField::constant(1.0), ScalarField::constant(0.5), PhaseFunction::linear(2, 0.4)};
  const BoundaryData b = BoundaryData::smooth_ramp(2, 0.0, 1.0, 0.2, 1.0, 0.3, 0.5);
  const QuadratureSpec q;
  std::mt19937_64 rng(808);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const PhasePoint p = interior_point(rng, -1.0, 1.0);
    const double hemi = eval_G_adaptive(m, b, p.x, p.xi, q).plus;
    const double plane = eval_G_plus_boundary_form(m, b, p.x, p.xi, q);
    worst = std::max(worst, std::abs(hemi - plane));
  }
  return {worst <= 1e-6, fmt("max |G+ hemisphere - G+ boundary plane| = %.2e over 50 points (<= 1e-6)", worst)};
}

Outcome ac9() {
  const SlabDomain w = SlabDomain::with_window(2, -1, 1);
  const ValidationReport aoki = validate(iso(1.0, 1.0), QuadratureSpec{}, w);
  Medium bad = iso(1.0, 0.5);
  bad.phase = PhaseFunction::tabulated(2, std::vector<double>(9, 1.01 / (2.0 * kPi)));
  const ValidationReport norm = validate(bad, QuadratureSpec{}, w);
  const bool ok = !aoki.passed && aoki.failure.find("gap") != std::string::npos && !norm.passed &&
                  norm.failure.find("normalization") != std::string::npos;
  return {ok, fmt("mu_t = mu_s = 1: \"%s\"; normalization error %.2e: \"%s\"", aoki.failure.c_str(),
                  norm.normalization_error, norm.failure.c_str())};
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<std::string, std::pair<std::string, std::function<Outcome()>>> checks{
      {"AC1", {"pure absorption exactness", ac1}},     {"AC2", {"geometric contraction", ac2}},
      {"AC3", {"fixed-point residual", ac3}},          {"AC4", {"Monte Carlo agreement", ac4}},
      {"AC5", {"jump transport", ac5}},                {"AC6", {"shallow-angle vanishing", ac6}},
      {"AC7", {"counterexample diagnostics", ac7}},    {"AC8", {"G quadrature forms", ac8}},
      {"AC9", {"validation gates", ac9}},
  };
  std::vector<std::string> ids;
  for (int i = 1; i < argc; ++i) ids.emplace_back(argv[i]);
  if (ids.empty())
    for (const auto& [id, _] : checks) ids.push_back(id);
  int failed = 0;
  for (const auto& id : ids) {
    const auto it = checks.find(id);
    if (it == checks.end()) {
      std::fprintf(stderr, "unknown criterion %s\n", id.c_str());
      return 2;
    }
    Outcome o;
    try {
      o = it->second.second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("[%s] %s %s: %s\n", o.pass ? "PASS" : "FAIL", id.c_str(), it->second.first.c_str(), o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed ? 1 : 0;
}
