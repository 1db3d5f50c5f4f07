#pragma once

// Phase-space primitives for the slab R^{d-1} x (0,1).
//
// Positions carry the full lateral coordinates; the depth coordinate is
// always the last component. The outer normal is -e_d on the bottom face
// (depth 0) and +e_d on the top face (depth 1).

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace slabte {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kPi = 3.14159265358979323846;

/// Raised when an argument lies outside the phase space X or a
/// geometric precondition fails.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Point or vector in R^d, d in {2, 3}.
struct Vec {
  std::array<double, 3> c{0.0, 0.0, 0.0};
  int dim = 2;

  Vec() = default;
  Vec(double x1, double x2) : c{x1, x2, 0.0}, dim(2) {}
  Vec(double x1, double x2, double x3) : c{x1, x2, x3}, dim(3) {}

  static Vec zero(int d);

  double operator[](int i) const { return c[static_cast<std::size_t>(i)]; }
  double& operator[](int i) { return c[static_cast<std::size_t>(i)]; }

  double depth() const { return c[static_cast<std::size_t>(dim - 1)]; }
  double& depth() { return c[static_cast<std::size_t>(dim - 1)]; }
  int lateral_dims() const { return dim - 1; }

  double dot(const Vec& o) const;
  double norm() const { return std::sqrt(dot(*this)); }
};

Vec operator+(const Vec& a, const Vec& b);
Vec operator-(const Vec& a, const Vec& b);
Vec operator*(double s, const Vec& a);
Vec operator-(const Vec& a);

/// Unit vector on S^{d-1}. A direction whose depth component is exactly
/// zero is horizontal; constructors never perturb that zero.
class Direction {
 public:
  Direction() = default;

  /// d = 2: xi(theta) = (cos theta, sin theta). Angles that are exact
  /// multiples of pi/2 produce exact zero components.
  static Direction from_angle(double theta);

  /// d = 3: depth component cos(polar), lateral part sin(polar)(cos a, sin a).
  static Direction from_polar(double polar, double azimuth);

  /// Accepts a vector whose norm is 1 within 1e-12.
  static Direction from_unit(const Vec& v);

  /// Normalizes an arbitrary nonzero vector.
  static Direction normalized(const Vec& v);

  const Vec& vec() const { return v_; }
  int dim() const { return v_.dim; }
  double operator[](int i) const { return v_[i]; }
  double depth() const { return v_.depth(); }
  bool horizontal() const { return v_.depth() == 0.0; }

  /// Polar angle in [0, 2pi) for d = 2.
  double angle() const;

  Direction reversed() const;

 private:
  explicit Direction(const Vec& v) : v_(v) {}
  Vec v_;
};

struct PhasePoint {
  Vec x;
  Direction xi;
};

enum class Face { bottom, top };

/// Outer unit normal on a boundary face.
Vec outer_normal(Face face, int dim);

/// Axis-aligned box in R^{d-1}.
struct LateralWindow {
  std::vector<double> lower;
  std::vector<double> upper;

  double clamp(int axis, double v) const;
  bool contains(const Vec& x) const;
};

struct SlabDomain {
  int dimension = 2;
  LateralWindow window;

  /// Throws DomainError unless d in {2, 3} and the window matches d-1 axes
  /// with lower < upper.
  void validate() const;

  static SlabDomain with_window(int dim, double lo, double hi);
};

bool is_interior(const Vec& x);
bool on_boundary(const Vec& x);

/// Membership in X = (Omega x S^{d-1}) u Gamma_-.
bool in_phase_space(const PhasePoint& p);

/// Membership in Gamma_-: x on a face with n(x) . xi < 0.
bool on_incoming_boundary(const PhasePoint& p);

/// Backward exit time. +inf for horizontal directions.
double tau_minus(const PhasePoint& p);

/// Forward exit time. +inf for horizontal directions.
double tau_plus(const PhasePoint& p);

/// x + t xi.
Vec advance(const Vec& x, const Direction& xi, double t);

/// (x - tau_minus xi, xi) with the depth coordinate snapped to the face.
/// Throws DomainError for horizontal directions.
PhasePoint backtrace_foot(const PhasePoint& p);

}  // namespace slabte
