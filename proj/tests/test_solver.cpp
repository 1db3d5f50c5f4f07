#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <omp.h>

#include "oracles.hpp"
#include "slabte/solver.hpp"

using namespace slabte;

namespace {

Medium iso(double mt, double ms) {
  return {2, ScalarField::constant(mt), ScalarField::constant(ms), PhaseFunction::isotropic(2)};
}

QuadratureSpec coarse() {
  QuadratureSpec q;
  q.angular_nodes = 16;
  return q;
}

const SlabDomain window = SlabDomain::with_window(2, -1.0, 1.0);

PhasePoint random_point(oracle::Lcg& u, double x_lo = -1.0, double x_hi = 1.0) {
  for (;;) {
    const Direction xi = Direction::from_angle(2.0 * kPi * u());
    if (std::abs(xi.depth()) < 1e-3) continue;
    return {Vec(x_lo + (x_hi - x_lo) * u(), 0.01 + 0.98 * u()), xi};
  }
}

}  // namespace

TEST_CASE("pure absorption is the ballistic term") {
  const auto sol = neumann_solve(iso(1.0, 0.0), BoundaryData::constant(2, 1.0), coarse(), window, GridSpec{4, 8});
  oracle::Lcg u(21);
  for (int i = 0; i < 300; ++i) {
    const PhasePoint p = random_point(u);
    const double ref = std::exp(-oracle::tau_minus(p.x.depth(), p.xi.depth()));
    CHECK(sol.value(p) == doctest::Approx(ref).epsilon(1e-12).scale(1.0));
    CHECK(sol.F1(p) == 0.0);
  }
  CHECK(sol.meta().iterations == 0);
}

TEST_CASE("zero data gives the zero solution") {
  const auto sol = neumann_solve(iso(1.0, 0.5), BoundaryData::constant(2, 0.0), coarse(), window, GridSpec{4, 8});
  for (double v : sol.nodal_total()) CHECK(v == 0.0);
  oracle::Lcg u(22);
  for (int i = 0; i < 50; ++i) CHECK(sol.value(random_point(u)) == 0.0);
}

TEST_CASE("iterates contract geometrically and the sum is bounded") {
  SolverOptions o;
  o.tol = 1e-8;
  const auto sol = neumann_solve(iso(1.0, 0.5), BoundaryData::constant(2, 1.0), coarse(), window, GridSpec{4, 12}, o);
  const auto& it = sol.meta().iterates;
  REQUIRE(it.size() > 10);
  CHECK(it[0].sup_norm <= 1.0 + 1e-12);
  for (std::size_t n = 1; n < it.size(); ++n) {
    CHECK(it[n].sup_norm <= std::pow(0.5, static_cast<double>(n)) + 1e-9);
    CHECK(it[n].sup_norm <= 0.5 * it[n - 1].sup_norm + 10.0 * o.tol);
  }
  double sup = 0.0;
  for (double v : sol.nodal_total()) sup = std::max(sup, std::abs(v));
  CHECK(sup <= 2.0 + 1e-9);
  CHECK(sol.fixed_point_residual() <= 3.0 * o.tol);
  CHECK(sol.meta().certified_bound <= o.tol);
  CHECK(sol.meta().final_increment <= o.tol);
}

TEST_CASE("certified count matches the geometric bound") {
  SolverOptions o;
  o.tol = 1e-6;
  const auto sol = neumann_solve(iso(1.0, 0.5), BoundaryData::constant(2, 1.0), coarse(), window, GridSpec{4, 8}, o);
  const int a_priori = oracle::geometric_count(0.5, 1.0, 1e-6);
  CHECK(sol.meta().certified_n <= a_priori);
  CHECK(sol.meta().certified_n <= static_cast<int>(std::ceil(std::log(1e-6 * 0.5) / std::log(0.5))));
  CHECK(sol.meta().albedo_bound == doctest::Approx(0.5));
}

TEST_CASE("an exhausted budget raises") {
  SolverOptions o;
  o.tol = 1e-10;
  o.max_iterations = 3;
  CHECK_THROWS_AS(neumann_solve(iso(1.0, 0.5), BoundaryData::constant(2, 1.0), coarse(), window, GridSpec{4, 8}, o),
                  ConvergenceError);
}

TEST_CASE("inputs outside the assumptions are refused") {
  CHECK_THROWS_AS(neumann_solve(iso(1.0, 1.0), BoundaryData::constant(2, 1.0), coarse(), window, GridSpec{4, 8}),
                  ValidationError);
  CHECK_THROWS_AS(
      neumann_solve(iso(1.0, 0.5), BoundaryData::counterexample(Vec(0.0, 0.5)), coarse(), window, GridSpec{4, 8}),
      DomainError);
  CHECK_THROWS_AS(GridSpec({1, 8}).validate(2), DomainError);
}

TEST_CASE("G for the counterexample data") {
  const Medium m = iso(1.0, 0.5);
  const Vec xb(0.0, 0.5);
  const BoundaryData b = BoundaryData::counterexample(xb);
  QuadratureSpec q;
  oracle::Lcg u(23);
  for (int i = 0; i < 20; ++i) {
    const PhasePoint p = random_point(u);
    CHECK(eval_G_adaptive(m, b, p.x, p.xi, q).minus == 0.0);
  }
  const double right = eval_G_adaptive(m, b, Vec(1e-6, 0.5), Direction::from_angle(0.0), q).total;
  const double left = eval_G_adaptive(m, b, Vec(-1e-6, 0.5), Direction::from_angle(0.0), q).total;
  CHECK(right - left == doctest::Approx(oracle::g_plus_unit_bottom(1.0, 0.5)).epsilon(1e-4));
}

TEST_CASE("G for unit bottom data in both quadrature forms") {
  const Medium m = iso(1.0, 0.5);
  const BoundaryData b = BoundaryData::faces(2, 1.0, 0.0);
  QuadratureSpec q;
  q.angular_nodes = 128;
  oracle::Lcg u(24);
  for (int i = 0; i < 10; ++i) {
    const PhasePoint p = random_point(u);
    const double ref = oracle::g_plus_unit_bottom(1.0, p.x.depth());
    CHECK(eval_G_adaptive(m, b, p.x, p.xi, q).plus == doctest::Approx(ref).epsilon(1e-9));
    CHECK(eval_G_plus_boundary_form(m, b, p.x, p.xi, q) == doctest::Approx(ref).epsilon(1e-7));
    CHECK(eval_G(m, b, p.x, p.xi, q).plus == doctest::Approx(ref).epsilon(1e-3));
  }
}

TEST_CASE("refining the grid changes the solution little") {
  const Medium m = iso(1.0, 0.5);
  const BoundaryData b = BoundaryData::faces(2, 1.0, 0.3);
  SolverOptions o;
  o.tol = 1e-8;
  const auto a = neumann_solve(m, b, coarse(), window, GridSpec{3, 16}, o);
  const auto c = neumann_solve(m, b, coarse(), window, GridSpec{3, 32}, o);
  oracle::Lcg u(25);
  for (int i = 0; i < 50; ++i) {
    const PhasePoint p = random_point(u);
    CHECK(std::abs(a.value(p) - c.value(p)) <= 2e-3);
  }
}

TEST_CASE("ballistic term vanishes at shallow angles") {
  const Medium m = iso(1.0, 0.5);
  const BoundaryData b = BoundaryData::constant(2, 1.0);
  oracle::Lcg u(26);
  for (double xd : {1e-1, 1e-2, 1e-3}) {
    const Direction xi = Direction::from_unit(Vec(std::sqrt(1.0 - xd * xd), xd));
    for (int i = 0; i < 20; ++i) {
      const Vec x(2.0 * u() - 1.0, 0.01 + 0.98 * u());
      const double bound = std::exp(-oracle::tau_minus(x.depth(), xd));
      CHECK(eval_F0(m, b, {x, xi}, QuadratureSpec{}) <= bound * (1.0 + 1e-12));
    }
  }
  CHECK(eval_F0(m, b, {Vec(0.0, 0.5), Direction::from_angle(0.0)}, QuadratureSpec{}) == 0.0);
}

TEST_CASE("laterally invariant problems extend beyond the window") {
  const auto sol =
      neumann_solve(iso(1.0, 0.5), BoundaryData::faces(2, 1.0, 0.2), coarse(), window, GridSpec{3, 12});
  const Direction xi = Direction::from_angle(1.0);
  CHECK(sol.value({Vec(7.0, 0.4), xi}) == doctest::Approx(sol.value({Vec(0.0, 0.4), xi})).epsilon(1e-12));
}

TEST_CASE("parallel and serial solves agree") {
  omp_set_num_threads(4);
  const Medium m{2, ScalarField::constant(1.0), ScalarField::constant(0.4), PhaseFunction::linear(2, 0.5)};
  const BoundaryData b = BoundaryData::smooth_ramp(2, 0.0, 1.0, 0.2, 1.0, 0.3, 0.5);
  SolverOptions serial;
  serial.parallel = false;
  const auto s = neumann_solve(m, b, coarse(), window, GridSpec{5, 8}, serial);
  const auto p = neumann_solve(m, b, coarse(), window, GridSpec{5, 8});
  CHECK(std::equal(s.nodal_total().begin(), s.nodal_total().end(), p.nodal_total().begin()));
  oracle::Lcg u(27);
  std::vector<PhasePoint> pts;
  for (int i = 0; i < 32; ++i) pts.push_back(random_point(u));
  std::vector<double> par(pts.size());
#pragma omp parallel for
  for (int i = 0; i < 32; ++i) par[static_cast<std::size_t>(i)] = p.value(pts[static_cast<std::size_t>(i)]);
  for (std::size_t i = 0; i < pts.size(); ++i) CHECK(par[i] == s.value(pts[i]));
}

TEST_CASE("solutions move") {
  auto a = neumann_solve(iso(1.0, 0.5), BoundaryData::constant(2, 1.0), coarse(), window, GridSpec{3, 8});
  const PhasePoint p{Vec(0.0, 0.5), Direction::from_angle(1.0)};
  const double v = a.value(p);
  const SolutionField b = std::move(a);
  CHECK(b.value(p) == v);
  CHECK(b.retained_iterates() > 0);
  CHECK(b.iterate(0, p) == doctest::Approx(b.F0(p)));
}

TEST_CASE("three-dimensional and anisotropic problems") {
  Medium m{3, ScalarField::depth_affine(1.0, 1.5), ScalarField::constant(0.4), PhaseFunction::linear(3, 0.3)};
  QuadratureSpec q;
  q.angular_nodes = 6;
  q.azimuth_nodes = 8;
  SolverOptions o;
  o.tol = 1e-5;
  const auto sol =
      neumann_solve(m, BoundaryData::faces(3, 1.0, 0.0), q, SlabDomain::with_window(3, -1, 1), GridSpec{3, 8}, o);
  const PhasePoint p{Vec(0.1, -0.2, 0.5), Direction::from_polar(0.4, 1.0)};
  CHECK(sol.value(p) > sol.F0(p));
  CHECK(sol.value(p) <= 1.0 / (1.0 - sol.meta().albedo_bound));
  CHECK(sol.fixed_point_residual() <= 3.0 * o.tol);
}
