#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "slabte/config.hpp"

namespace slabte {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitValidation = 2,
  kExitCertificate = 3,
  kExitIo = 4,
};

struct RunOptions {
  std::string config;
  std::filesystem::path out = ".";
  std::uint64_t seed = 1;
  int threads = 0;  // 0 keeps the OpenMP default
  std::optional<double> tol;
  bool dump_iterates = false;
};

/// Runs one subcommand (solve, disc, counterexample, validate, mc-check,
/// convergence) and maps failures to exit codes. Human-readable reports go
/// to `out`, diagnostics to `err`.
int run_command(const std::string& command, const RunOptions& opts, std::ostream& out, std::ostream& err);

int run_solve(const Scenario& s, const RunOptions& o, std::ostream& out);
int run_disc(const Scenario& s, const RunOptions& o, std::ostream& out);
int run_counterexample(const Scenario& s, const RunOptions& o, std::ostream& out);
int run_validate(const Scenario& s, const RunOptions& o, std::ostream& out);
int run_mc_check(const Scenario& s, const RunOptions& o, std::ostream& out);
int run_convergence(const Scenario& s, const RunOptions& o, std::ostream& out);

}  // namespace slabte
