#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "slabte/boundary.hpp"
#include "slabte/medium.hpp"
#include "slabte/solver.hpp"

namespace slabte {

/// A residual probe that was refused because the derivative along the
/// characteristic is not expected to exist there, or the probe segment
/// leaves the slab.
class ProbeRefused : public DomainError {
 public:
  using DomainError::DomainError;
};

/// |(f(x + h xi) - f(x - h xi)) / 2h + mu_t f - mu_s int p f dsigma| for the
/// converged field.
double ste_residual(const SolutionField& sol, const PhasePoint& p, double h);

/// Same check for a retained iterate: f^(0) against -mu_t f^(0), and
/// f^(n) against mu_s int p f^(n-1) dsigma - mu_t f^(n).
double iterate_residual(const SolutionField& sol, int n, const PhasePoint& p, double h);

struct JumpEstimate {
  Approach approach = Approach::lateral;
  std::vector<double> offsets;
  std::vector<double> raw;     // f(+offset) - f(-offset)
  double measured = 0.0;       // extrapolated to offset 0
  double uncertainty = 0.0;    // magnitude of the last correction
  double predicted = 0.0;      // survival * seed jump; 0 off the seeded rays
  double survival = 1.0;
};

/// Two-sided difference of g across p along an approach family,
/// extrapolated in the offset. Lateral moves x along e_1; angular moves the
/// d = 2 angle.
JumpEstimate measure_jump_at(const std::function<double(const PhasePoint&)>& g, const PhasePoint& p,
                             Approach approach, std::span<const double> offsets);

/// Jump of the converged f across a seeded ray at parameter t.
JumpEstimate measure_jump(const SolutionField& sol, const DiscontinuityRay& ray, double t,
                          std::span<const double> offsets);

struct OffRayProbe {
  PhasePoint p;
  JumpEstimate jump;  // of the converged f; predicted 0
};

/// Jump measurements at points shifted laterally by at least `clearance`
/// from the seeded rays, in the seed directions. Reproducible for a seed.
std::vector<OffRayProbe> off_ray_probes(const SolutionField& sol, std::span<const DiscontinuityRay> rays, int count,
                                        std::uint64_t seed, std::span<const double> offsets, double clearance = 0.1);

struct ContinuityScan {
  std::vector<double> offsets;
  std::vector<double> oscillation;  // |F1(+offset) - F1(-offset)|
  double extrapolated = 0.0;
  bool decreasing = false;
};

/// Oscillation of F1 across a seeded ray.
ContinuityScan f1_continuity_scan(const SolutionField& sol, const DiscontinuityRay& ray, double t,
                                  std::span<const double> offsets);

/// f^(1)(p) by nested adaptive quadrature: outer over the ray parameter,
/// inner over directions (d = 2) with the closed-form ballistic integrand.
/// `breaks` are ray parameters where the integrand may jump. When `pivot` is
/// set, the inner integral is split at the directions of the line through y
/// and the pivot.
double first_collided_direct(const Medium& m, const BoundaryData& b, const PhasePoint& p, const QuadratureSpec& q,
                             double tolerance = 1e-11, std::span<const double> breaks = {},
                             std::optional<Vec> pivot = std::nullopt);

struct DifferenceQuotients {
  double theta = 0.0;
  Vec x;
  std::vector<double> h;
  std::vector<double> d_plus;
  std::vector<double> d_minus;
  std::vector<double> mismatch;  // d_plus - d_minus
  double predicted = 0.0;        // mu_s (G(x + 0 xi) - G(x - 0 xi))
};

struct CounterexampleReport {
  Vec x_bar;
  std::size_t g_minus_probes = 0;
  double g_minus_max = 0.0;
  std::vector<double> g_offsets;
  std::vector<double> g_left;   // G(x_bar - offset e_1)
  std::vector<double> g_right;  // G(x_bar + offset e_1)
  double g_at_x_bar = 0.0;
  double g_jump = 0.0;          // right limit - left limit
  std::vector<DifferenceQuotients> at_x_bar;
  DifferenceQuotients control;  // x_bar + (0.3, 0) along e_1
  RegularityEvidence regularity;
  bool mismatch_persists = false;
  bool control_decays = false;
  std::string conclusion;
};

/// Diagnostics for the counterexample data built around x_bar (d = 2).
CounterexampleReport counterexample_report(const Medium& m, const Vec& x_bar, const QuadratureSpec& q,
                                           std::uint64_t seed = 1);

struct MonteCarloEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
  std::size_t capped_walks = 0;
  double tail_allowance = 0.0;  // bound on the bias from walks stopped at the depth cap
};

struct MonteCarloOptions {
  int depth_cap = 200;
  std::size_t block = 256;  // walks per independent stream
  double roulette = 0.05;   // weights below this play Russian roulette
  bool parallel = true;
};

/// Backward random walk estimator of f(p). Streams are fixed per block of
/// walks, so the result depends only on (seed, samples).
MonteCarloEstimate mc_oracle(const Medium& m, const BoundaryData& b, const PhasePoint& p, std::size_t samples,
                             std::uint64_t seed, const QuadratureSpec& q, const MonteCarloOptions& opts = {});

struct ConvergenceRow {
  int n = 0;
  double sup_norm = 0.0;
  double ratio = 0.0;          // sup f^(n) / sup f^(n-1); 0 for n = 0
  double a_priori = 0.0;       // M^n sup|f0|
  double remainder = 0.0;      // certified bound on sup|f - f_n|
};

std::vector<ConvergenceRow> convergence_report(const SolutionField& sol);

}  // namespace slabte
