#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "slabte/config.hpp"

using namespace slabte;

namespace {

const char* kBase = R"(name: t
dimension: 2
medium:
  mu_t: 1.0
  mu_s: {type: depth_affine, bottom: 0.2, top: 0.4}
  phase: {type: henyey_greenstein, g: 0.5}
boundary:
  type: lateral_step
  position: 0.25
  left: 0.0
  right: 1.0
  top: 0.0
  seeds:
    - {x: [0.25, 0.0], angle: 1.5707963267948966, jump: 1.0, approach: lateral}
domain:
  window: [-2, 2]
grid: {lateral_nodes: 9, depth_nodes: 12}
quadrature: {angular_nodes: 20}
solver: {tol: 1.0e-7, max_iterations: 40}
)";

}  // namespace

TEST_CASE("a full scenario parses") {
  const Scenario s = parse_scenario(kBase);
  CHECK(s.name == "t");
  CHECK(s.dim == 2);
  CHECK(s.medium.mu_s(Vec(0.0, 1.0)) == doctest::Approx(0.4));
  CHECK(s.medium.phase.dim() == 2);
  CHECK(s.boundary.seeds().size() == 1);
  CHECK(s.boundary.declared_regularity() == Regularity::condition2);
  CHECK(s.domain.window.upper[0] == 2.0);
  CHECK(s.grid.lateral_nodes == 9);
  CHECK(s.quadrature.angular_nodes == 20);
  CHECK(s.solver.tol == 1e-7);
  CHECK(s.solver.max_iterations == 40);
  CHECK(s.hash == fnv1a64(kBase));
}

TEST_CASE("defaults apply to omitted sections") {
  const Scenario s = parse_scenario("dimension: 2\nmedium: {mu_t: 1, mu_s: 0.1}\nboundary: {type: constant, value: 2}\n");
  CHECK(s.boundary.sup_norm() == 2.0);
  CHECK(s.grid.depth_nodes == GridSpec{}.depth_nodes);
  CHECK(s.slices.lateral_samples == 41);
}

TEST_CASE("bad input raises ConfigError") {
  CHECK_THROWS_AS(parse_scenario("dimension: 2\nmedium: {mu_t: 1, mu_s: 0.1}\nbogus: 3\nboundary: {type: constant, value: 1}\n"), ConfigError);
  CHECK_THROWS_AS(parse_scenario("dimension: 4\nmedium: {mu_t: 1, mu_s: 0.1}\n"), ConfigError);
  CHECK_THROWS_AS(parse_scenario("dimension: 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_scenario("dimension: 2\nmedium: {mu_t: one, mu_s: 0.1}\nboundary: {type: constant, value: 1}\n"), ConfigError);
  CHECK_THROWS_AS(parse_scenario("dimension: [2\n"), ConfigError);
  CHECK_THROWS_AS(
      parse_scenario("dimension: 2\nmedium: {mu_t: 1, mu_s: 0.1}\nboundary: {type: counterexample, regularity: both}\n"),
      ConfigError);
  try {
    parse_scenario("dimension: 2\nmedium: {mu_t: 1, mu_s: 0.1}\nbogus: 3\nboundary: {type: constant, value: 1}\n");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("bogus") != std::string::npos);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("missing files raise IoError") {
  CHECK_THROWS_AS(load_scenario("/nonexistent/scenario.yaml"), IoError);
  CHECK_THROWS_AS(parse_scenario("dimension: 2\nmedium: {mu_t: {type: grid, path: nope.csv}, mu_s: 0.1}\nboundary: {type: constant, value: 1}\n"), IoError);
}

TEST_CASE("hash is FNV-1a") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(hex64(0xabcULL) == "0000000000000abc");
}
