#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "slabte/boundary.hpp"

using namespace slabte;

namespace {

const SlabDomain window = SlabDomain::with_window(2, -2.0, 2.0);
const Direction up = Direction::from_angle(kPi / 2);

}  // namespace

TEST_CASE("f0 is only defined on the incoming boundary") {
  const BoundaryData b = BoundaryData::faces(2, 1.0, 2.0);
  CHECK(b({Vec(0.0, 0.0), up}) == 1.0);
  CHECK(b({Vec(0.0, 1.0), up.reversed()}) == 2.0);
  CHECK_THROWS_AS(b({Vec(0.0, 0.0), up.reversed()}), DomainError);
  CHECK_THROWS_AS(b({Vec(0.0, 0.5), up}), DomainError);
  CHECK(b.sup_norm() == 2.0);
}

TEST_CASE("presets declare their regularity") {
  CHECK(BoundaryData::constant(2, 1.0).declared_regularity() == Regularity::both);
  CHECK(BoundaryData::lateral_step(2, 0.0, 0.0, 1.0, 0.0).declared_regularity() == Regularity::condition2);
  CHECK(BoundaryData::angular_step(1.0, 0.0, 1.0, 0.0).declared_regularity() == Regularity::condition1);
  CHECK(BoundaryData::counterexample(Vec(0.0, 0.5)).declared_regularity() == Regularity::neither);
  CHECK(satisfies_condition1(Regularity::both));
  CHECK_FALSE(satisfies_condition2(Regularity::condition1));
  CHECK(parse_regularity(to_string(Regularity::condition2)) == Regularity::condition2);
  CHECK_THROWS_AS(parse_regularity("sometimes"), DomainError);
  CHECK(parse_approach("angular") == Approach::angular);
}

TEST_CASE("empirical classification matches the construction") {
  struct Case {
    BoundaryData b;
    Regularity expected;
  };
  std::vector<Case> cases;
  cases.push_back({BoundaryData::constant(2, 1.0), Regularity::both});
  cases.push_back({BoundaryData::smooth_ramp(2, 0.0, 1.0, 0.2, 1.0, 0.3, 0.5), Regularity::both});
  cases.push_back({BoundaryData::lateral_step(2, 0.0, 0.0, 1.0, 0.0), Regularity::condition2});
  cases.push_back({BoundaryData::angular_step(1.0, 0.0, 1.0, 0.0), Regularity::condition1});
  cases.push_back({BoundaryData::counterexample(Vec(0.0, 0.5)), Regularity::neither});
  for (const auto& c : cases) {
    CAPTURE(c.b.name());
    const RegularityEvidence e = classify_regularity(c.b, window, 16);
    CHECK(e.empirical == c.expected);
    CHECK(e.agrees_with_declared);
  }
}

TEST_CASE("a wrong declaration is reported") {
  auto pieces = std::vector<BoundaryData::Piece>{{Face::bottom, 0.0, kInf, 0.0, 2 * kPi, 1.0}};
  const BoundaryData b = BoundaryData::piecewise(pieces, 0.0, 0.0, Regularity::both);
  const RegularityEvidence e = classify_regularity(b, window, 16);
  CHECK(e.empirical == Regularity::condition2);
  CHECK_FALSE(e.agrees_with_declared);
}

TEST_CASE("counterexample partition") {
  const Vec xb(0.0, 0.5);
  const BoundaryData b = BoundaryData::counterexample(xb);
  oracle::Lcg u(5);
  for (int i = 0; i < 500; ++i) {
    const double th = 0.01 + (kPi - 0.02) * u();
    const Direction xi = Direction::from_angle(th);
    const Vec x(4.0 * u() - 2.0, 0.0);
    const int piece = counterexample_piece(xb, x, xi);
    // the characteristic from x passes to the right of x_bar at depth 1/2 exactly on piece 1
    const double at_half = x[0] + 0.5 * std::cos(th) / std::sin(th);
    CHECK(piece == (at_half >= 0.0 ? 1 : 2));
    CHECK(b.value(x, xi) == (piece == 1 ? 1.0 : 0.0));
  }
  CHECK(counterexample_piece(xb, Vec(0.0, 1.0), Direction::from_angle(4.0)) == 3);
  CHECK(counterexample_piece(xb, Vec(0.0, 0.5), up) == 0);
  CHECK_FALSE(b.declares_constant_tails());
  CHECK_FALSE(check_constant_tails(b, window, QuadratureSpec{}));
}

TEST_CASE("constant tails") {
  CHECK(check_constant_tails(BoundaryData::lateral_step(2, 0.0, 0.0, 1.0, 0.0), window, QuadratureSpec{}));
  CHECK(check_constant_tails(BoundaryData::smooth_ramp(2, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0), window, QuadratureSpec{}));
  // a ramp wider than the window keeps changing outside it
  CHECK_FALSE(check_constant_tails(BoundaryData::smooth_ramp(2, 0.0, 8.0, 0.0, 1.0, 0.0, 0.0), window,
                                   QuadratureSpec{}));
  CHECK(check_constant_tails(BoundaryData::faces(3, 1.0, 0.0), SlabDomain::with_window(3, -1, 1), QuadratureSpec{}));
}

TEST_CASE("seeds must sit on the incoming boundary") {
  BoundaryData b = BoundaryData::lateral_step(2, 0.0, 0.0, 1.0, 0.0);
  CHECK_THROWS_AS(b.set_seeds({DiscSeed{Vec(0.0, 0.5), up, 1.0, Approach::lateral}}), DomainError);
  CHECK_THROWS_AS(b.set_seeds({DiscSeed{Vec(0.0, 0.0), up.reversed(), 1.0, Approach::lateral}}), DomainError);
  CHECK_THROWS_AS(b.set_seeds({DiscSeed{Vec(0.0, 0.0), up, 0.0, Approach::lateral}}), DomainError);
  const Direction slant = Direction::from_angle(kPi / 4);
  b.set_seeds({DiscSeed{Vec(0.0, 0.0), slant, 1.0, Approach::lateral}});
  const auto rays = seed_rays(b);
  REQUIRE(rays.size() == 1);
  CHECK(rays[0].length == doctest::Approx(std::sqrt(2.0)));
  CHECK(rays[0].point(rays[0].length)[1] == doctest::Approx(1.0));
}

TEST_CASE("locus distance") {
  const BoundaryData b = BoundaryData::lateral_step(2, 0.25, 0.0, 1.0, 0.0);
  CHECK(b.locus_distance(Vec(1.0, 0.0), up) == doctest::Approx(0.75));
  CHECK(b.locus_distance(Vec(1.0, 1.0), up.reversed()) == kInf);
  CHECK(BoundaryData::constant(2, 1.0).locus_distance(Vec(0.0, 0.0), up) == kInf);
}
