#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "slabte/geometry.hpp"
#include "slabte/quadrature.hpp"

namespace slabte {

/// Which of the two continuity conditions the incoming data satisfies.
/// condition1: x -> f0(x, xi) continuous for almost every xi.
/// condition2: xi -> f0(x, xi) continuous for almost every boundary x.
enum class Regularity { condition1, condition2, both, neither };

std::string to_string(Regularity r);
Regularity parse_regularity(const std::string& s);
bool satisfies_condition1(Regularity r);
bool satisfies_condition2(Regularity r);

/// One-parameter family along which a jump is measured: the first lateral
/// coordinate at fixed direction, or the direction at fixed position.
enum class Approach { lateral, angular };

std::string to_string(Approach a);
Approach parse_approach(const std::string& s);

/// A point of disc(f0) with the two-sided jump f0(+) - f0(-) along its
/// approach family.
struct DiscSeed {
  Vec x_star;
  Direction xi_star;
  double jump = 0.0;
  Approach approach = Approach::lateral;
};

/// Forward characteristic {x* + t xi* : 0 <= t < length} carrying a seed.
struct DiscontinuityRay {
  DiscSeed seed;
  double length = 0.0;

  Vec point(double t) const { return advance(seed.x_star, seed.xi_star, t); }
};

/// Incoming boundary data f0 on Gamma_-.
class BoundaryData {
 public:
  using Evaluator = std::function<double(const Vec& x, const Direction& xi)>;
  /// Phase-space distance from a Gamma_- point to the jump locus of f0,
  /// measured along the lateral coordinate or the angle; +inf when f0 is
  /// continuous there.
  using LocusDistance = std::function<double(const Vec& x, const Direction& xi)>;

  BoundaryData(int dim, std::string name, Evaluator eval, double sup_norm, Regularity declared);

  /// f0 at a point of Gamma_-; throws DomainError elsewhere.
  double operator()(const PhasePoint& p) const;
  /// f0 without the Gamma_- membership check.
  double value(const Vec& x, const Direction& xi) const { return eval_(x, xi); }

  int dim() const { return dim_; }
  const std::string& name() const { return name_; }
  double sup_norm() const { return sup_norm_; }
  Regularity declared_regularity() const { return declared_; }

  const std::vector<DiscSeed>& seeds() const { return seeds_; }
  void set_seeds(std::vector<DiscSeed> seeds);

  double locus_distance(const Vec& x, const Direction& xi) const;
  void set_locus(LocusDistance d) { locus_ = std::move(d); }

  /// Whether the data is declared constant beyond the lateral window,
  /// i.e. f0(x, xi) = f0(clamp(x), xi).
  bool declares_constant_tails() const { return constant_tails_; }
  void set_constant_tails(bool v) { constant_tails_ = v; }

  /// Declared null sets skipped by the regularity scans (d = 2 angles and
  /// first lateral coordinates).
  std::vector<double> exceptional_angles;
  std::vector<double> exceptional_positions;

  // Presets.
  static BoundaryData constant(int dim, double value);
  static BoundaryData faces(int dim, double bottom, double top);
  /// Bottom face: `right` for x1 >= position, `left` otherwise. Top face
  /// constant `top`. Satisfies condition 2.
  static BoundaryData lateral_step(int dim, double position, double left, double right, double top);
  /// d = 2, bottom face: `above` for theta > cut, `below` otherwise. Top
  /// face constant `top`. Satisfies condition 1.
  static BoundaryData angular_step(double cut, double below, double above, double top);
  /// Bottom face: lo -> hi through a C-infinity smoothstep of x1 on
  /// [center - width/2, center + width/2], times (1 + tilt xi_1). Top face
  /// constant `top`.
  static BoundaryData smooth_ramp(int dim, double center, double width, double lo, double hi,
                                  double tilt, double top);
  /// The d = 2 example built around an interior point x_bar: 1 on
  /// {x_2 = 0, x_1 >= xbar_1 - xbar_2 cot theta}, 0 elsewhere on Gamma_-.
  static BoundaryData counterexample(const Vec& x_bar);

  struct Piece {
    Face face = Face::bottom;
    double x_lo = -kInf, x_hi = kInf;          // first lateral coordinate, [lo, hi)
    double theta_lo = 0.0, theta_hi = 2 * kPi;  // d = 2 angle, (lo, hi]
    double value = 0.0;
  };
  /// d = 2 piecewise-constant data: the first matching piece wins,
  /// otherwise the face default applies.
  static BoundaryData piecewise(std::vector<Piece> pieces, double bottom_default, double top_default,
                                Regularity declared);

 private:
  int dim_ = 2;
  std::string name_;
  Evaluator eval_;
  double sup_norm_ = 0.0;
  Regularity declared_ = Regularity::both;
  std::vector<DiscSeed> seeds_;
  LocusDistance locus_;
  bool constant_tails_ = true;
};

/// Which piece of the counterexample partition of Gamma_- contains (x, xi):
/// 1 (value 1), 2 (bottom, value 0) or 3 (top face). 0 if not in Gamma_-.
int counterexample_piece(const Vec& x_bar, const Vec& x, const Direction& xi);

/// Samples f0 beyond the window and compares against the clamped value.
bool check_constant_tails(const BoundaryData& b, const SlabDomain& domain, const QuadratureSpec& q);

struct RegularityEvidence {
  Regularity empirical = Regularity::neither;
  bool agrees_with_declared = false;
  std::size_t condition1_probes = 0;
  std::size_t condition1_jumps = 0;
  std::size_t condition2_probes = 0;
  std::size_t condition2_jumps = 0;
  double largest_jump = 0.0;
  std::string note;
};

/// Empirical classification through one-dimensional continuity scans over
/// the lateral window: x-scans at fixed directions (condition 1) and
/// direction scans at fixed positions (condition 2). A scan is flagged
/// when its largest consecutive difference does not shrink under 4x
/// refinement. Jumps are measured along the declared one-parameter
/// approaches, not in a product topology on Gamma_-.
RegularityEvidence classify_regularity(const BoundaryData& b, const SlabDomain& domain, int samples);

/// One ray per declared seed.
std::vector<DiscontinuityRay> seed_rays(const BoundaryData& b);

}  // namespace slabte
