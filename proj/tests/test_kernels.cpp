#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <omp.h>

#include "oracles.hpp"
#include "slabte/kernels.hpp"

using namespace slabte;

namespace {

struct Fixture {
  Medium m{2, ScalarField::bump(1.0, 0.4, Vec(0.0, 0.5), 0.4), ScalarField::depth_affine(0.3, 0.5),
           PhaseFunction::linear(2, 0.4)};
  QuadratureSpec q;
  SlabDomain domain = SlabDomain::with_window(2, -1.0, 1.0);
  CollocationLayout layout;
  std::vector<double> f;

  Fixture() : layout((q.angular_nodes = 8, domain), GridSpec{6, 8}, q) {
    oracle::Lcg u(11);
    f.resize(layout.size());
    for (double& v : f) v = u();
  }
};

}  // namespace

TEST_CASE("layout ordering and node placement") {
  Fixture fx;
  const CollocationLayout& L = fx.layout;
  CHECK(L.spatial_size() == 6u * 8u);
  CHECK(L.directions() == 16u);
  CHECK(L.size() == L.spatial_size() * L.directions());
  CHECK(L.position(0)[0] == -1.0);
  CHECK(L.position(L.spatial_size() - 1)[0] == 1.0);
  // depth runs fastest
  CHECK(L.position(0)[0] == L.position(1)[0]);
  CHECK(L.position(1).depth() > L.position(0).depth());
  for (double z : L.depth_nodes()) CHECK((z > 0.0 && z < 1.0));
  CHECK(L.angles()[0].xi.depth() > 0.0);
}

TEST_CASE("interpolation reproduces constants exactly and bilinear fields at nodes") {
  Fixture fx;
  const CollocationLayout& L = fx.layout;
  std::vector<double> ones(L.spatial_size(), 0.37);
  oracle::Lcg u(12);
  for (int i = 0; i < 200; ++i) {
    const Vec x(6.0 * u() - 3.0, u());
    CHECK(L.interpolate(ones.data(), 1, x) == 0.37);
  }
  std::vector<double> lin(L.spatial_size());
  for (std::size_t i = 0; i < lin.size(); ++i) lin[i] = 2.0 * L.position(i)[0] - L.position(i).depth();
  for (std::size_t i = 0; i < lin.size(); ++i)
    CHECK(L.interpolate(lin.data(), 1, L.position(i)) == doctest::Approx(lin[i]).epsilon(1e-14));
  // a field linear in x1 is reproduced between lateral nodes
  const Vec mid(0.1, L.depth_nodes()[3]);
  CHECK(L.interpolate(lin.data(), 1, mid) == doctest::Approx(0.2 - mid.depth()).epsilon(1e-13));
}

TEST_CASE("plane crossings lie inside the ray") {
  Fixture fx;
  std::vector<double> out;
  const Vec x(0.05, 0.8);
  const Direction xi = Direction::from_angle(1.1);
  const double len = tau_minus({x, xi});
  fx.layout.crossings(x, xi, len, out);
  CHECK_FALSE(out.empty());
  for (double s : out) CHECK((s > 0.0 && s < len));
}

TEST_CASE("source kernels: serial and parallel agree bitwise") {
  Fixture fx;
  omp_set_num_threads(4);
  for (bool iso : {false, true}) {
    Medium m = fx.m;
    if (iso) m.phase = PhaseFunction::isotropic(2);
    const AngularCoupling c = AngularCoupling::build(m.phase, fx.layout.angles());
    CHECK(c.isotropic == iso);
    std::vector<double> a(c.source_size(fx.layout.spatial_size())), b(a.size());
    source_serial(c, fx.f, a);
    source_parallel(c, fx.f, b);
    CHECK(a == b);
  }
}

TEST_CASE("sweep kernels: serial and parallel agree bitwise") {
  Fixture fx;
  omp_set_num_threads(4);
  const AngularCoupling c = AngularCoupling::build(fx.m.phase, fx.layout.angles());
  std::vector<double> j(c.source_size(fx.layout.spatial_size()));
  source_serial(c, fx.f, j);
  RayContext ctx{&fx.m, &fx.layout, fx.q.truncation_length(0.6), fx.q.ray_panels};
  std::vector<double> a(fx.layout.size()), b(a.size());
  sweep_serial(ctx, c, j, a);
  sweep_parallel(ctx, c, j, b);
  CHECK(a == b);
  const auto s1 = iterate_step(fx.m, fx.layout, fx.q, fx.f, 0.6, false);
  const auto s2 = iterate_step(fx.m, fx.layout, fx.q, fx.f, 0.6, true);
  CHECK(s1 == s2);
  CHECK(s1 == a);
}

TEST_CASE("transport of a unit source matches the closed form") {
  // constant mu_t, mu_s and J = 1: int_0^L mu_s e^{-mu_t s} ds
  Medium m{2, ScalarField::constant(1.3), ScalarField::constant(0.4), PhaseFunction::isotropic(2)};
  QuadratureSpec q;
  q.angular_nodes = 4;
  const CollocationLayout L(SlabDomain::with_window(2, -1.0, 1.0), GridSpec{3, 6}, q);
  std::vector<double> ones(L.spatial_size(), 1.0);
  RayContext ctx{&m, &L, q.truncation_length(1.3), q.ray_panels};
  oracle::Lcg u(13);
  for (int i = 0; i < 50; ++i) {
    const Vec x(2.0 * u() - 1.0, 0.02 + 0.96 * u());
    const Direction xi = Direction::from_angle(2.0 * kPi * u());
    const double len = std::min(oracle::tau_minus(x.depth(), xi.depth()), ctx.s_max);
    const double ref = 0.4 / 1.3 * (1.0 - std::exp(-1.3 * len));
    CHECK(ctx.transport(x, xi, ones.data(), 1) == doctest::Approx(ref).epsilon(1e-12));
  }
  // horizontal rays stop at the truncation length
  const double h = ctx.transport(Vec(0.0, 0.5), Direction::from_angle(0.0), ones.data(), 1);
  CHECK(h == doctest::Approx(0.4 / 1.3 * (1.0 - 1e-8)).epsilon(1e-12));
}
