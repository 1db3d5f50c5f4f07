#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "slabte/boundary.hpp"
#include "slabte/medium.hpp"
#include "slabte/solver.hpp"

namespace slabte {

/// Malformed or inconsistent scenario file.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A file could not be read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sampling of the three solution slices written by `solve`.
struct SliceSpec {
  int lateral_samples = 41;   // along x_1 across the window
  int depth_samples = 21;     // interior depths, endpoints excluded
  int angle_samples = 36;     // theta (d = 2) or polar angle (d = 3), horizontal excluded
  double depth = 0.5;         // fixed depth slice
  double theta = 1.0;         // fixed direction: d = 2 angle, d = 3 polar angle
  double azimuth = 0.0;       // d = 3 only
  std::vector<double> position;  // fixed lateral position; window centre when empty
};

struct AnalysisSpec {
  std::vector<double> ray_parameters{0.25, 0.5, 0.75};
  std::vector<double> offsets{4e-3, 2e-3, 1e-3};
  int off_ray_probes = 8;
  Vec x_bar{0.0, 0.5};
  int mc_points = 10;
  std::size_t mc_samples = 100000;
};

struct Scenario {
  std::string name = "scenario";
  int dim = 2;
  Medium medium;
  BoundaryData boundary = BoundaryData::constant(2, 0.0);
  SlabDomain domain = SlabDomain::with_window(2, -1.0, 1.0);
  GridSpec grid;
  QuadratureSpec quadrature;
  SolverOptions solver;
  SliceSpec slices;
  AnalysisSpec analysis;
  std::string text;            // the bytes the scenario was parsed from
  std::uint64_t hash = 0;      // FNV-1a of `text`
};

/// Parses YAML scenario text. `base_dir` resolves relative grid paths.
Scenario parse_scenario(const std::string& text, const std::string& base_dir = ".");

/// Reads and parses a scenario file; IoError when unreadable.
Scenario load_scenario(const std::string& path);

std::uint64_t fnv1a64(const std::string& bytes);
std::string hex64(std::uint64_t v);

}  // namespace slabte
