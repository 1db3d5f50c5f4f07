#include <CLI11.hpp>

#include <iostream>

#include "slabte/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Stationary transport in a slab: Neumann-series solver and diagnostics"};
  app.require_subcommand(1);

  slabte::RunOptions opts;
  double tol = 0.0;
  struct Command {
    const char* name;
    const char* help;
  };
  const Command commands[] = {
      {"solve", "solve and write solution slices, convergence table and meta"},
      {"disc", "measure jumps along the seeded discontinuity rays"},
      {"counterexample", "derivative-mismatch diagnostics around x_bar (d = 2)"},
      {"validate", "check the medium assumptions and classify the boundary data"},
      {"mc-check", "compare the solver against the Monte Carlo estimator"},
      {"convergence", "solve and print the per-iterate convergence table"},
  };
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--config", opts.config, "scenario file (YAML)")->required();
    sub->add_option("--out", opts.out, "output directory")->capture_default_str();
    sub->add_option("--seed", opts.seed, "random seed")->capture_default_str();
    sub->add_option("--threads", opts.threads, "OpenMP threads (0 = default)")->check(CLI::NonNegativeNumber);
    sub->add_option("--tol", tol, "override the solver tolerance")->check(CLI::PositiveNumber);
    if (std::string(c.name) == "solve") sub->add_flag("--dump-iterates", opts.dump_iterates, "write nodal iterates");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? slabte::kExitOk : slabte::kExitUsage;
  }

  const CLI::App* chosen = app.get_subcommands().front();
  if (chosen->count("--tol") > 0) opts.tol = tol;
  return slabte::run_command(chosen->get_name(), opts, std::cout, std::cerr);
}
