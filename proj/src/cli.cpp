#include "slabte/cli.hpp"

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>

#include "slabte/analysis.hpp"
#include "slabte/io.hpp"

namespace slabte {

namespace {

using nlohmann::json;

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> r(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) r[static_cast<std::size_t>(i)] = n == 1 ? a : a + (b - a) * i / (n - 1);
  return r;
}

std::vector<std::string> phase_columns(int dim) {
  if (dim == 2) return {"x1", "x2", "theta"};
  return {"x1", "x2", "x3", "polar", "azimuth"};
}

std::vector<double> phase_cells(const PhasePoint& p) {
  if (p.x.dim == 2) return {p.x[0], p.x[1], p.xi.angle()};
  const double polar = std::acos(std::clamp(p.xi.depth(), -1.0, 1.0));
  double az = std::atan2(p.xi[1], p.xi[0]);
  if (az < 0.0) az += 2.0 * kPi;
  return {p.x[0], p.x[1], p.x[2], polar, az};
}

Direction slice_direction(int dim, double angle, double azimuth) {
  return dim == 2 ? Direction::from_angle(angle) : Direction::from_polar(angle, azimuth);
}

// Midpoint angles: never horizontal.
std::vector<double> slice_angles(int dim, int n) {
  std::vector<double> r;
  const double span = dim == 2 ? 2.0 * kPi : kPi;
  for (int k = 0; k < n; ++k) r.push_back((k + 0.5) * span / n);
  return r;
}

Vec lateral_point(const Scenario& s, double x1, double depth) {
  const LateralWindow& w = s.domain.window;
  if (s.dim == 2) return Vec(x1, depth);
  const double x2 = s.slices.position.size() == 2 ? s.slices.position[1] : 0.5 * (w.lower[1] + w.upper[1]);
  return Vec(x1, x2, depth);
}

SolutionField solve(const Scenario& s) {
  return neumann_solve(s.medium, s.boundary, s.quadrature, s.domain, s.grid, s.solver);
}

json solve_meta_json(const SolutionField& sol) {
  const SolveMeta& m = sol.meta();
  json j;
  j["iterations"] = m.iterations;
  j["final_increment"] = m.final_increment;
  j["certified_bound"] = m.certified_bound;
  j["certified_n"] = m.certified_n;
  j["albedo_bound"] = m.albedo_bound;
  j["mu_t_lower"] = m.mu_t_lower;
  j["sup_f0"] = m.sup_f0;
  j["s_max"] = m.s_max;
  j["tol"] = m.tol;
  json its = json::array();
  for (const auto& it : m.iterates)
    its.push_back({{"n", it.n}, {"sup_norm", it.sup_norm}, {"a_priori_bound", it.a_priori_bound}});
  j["iterates"] = its;
  return j;
}

CsvTable convergence_table(const SolutionField& sol) {
  CsvTable t({"n", "sup_norm", "ratio", "a_priori", "remainder"});
  for (const auto& r : convergence_report(sol))
    t.add({static_cast<double>(r.n), r.sup_norm, r.ratio, r.a_priori, r.remainder});
  return t;
}

void print_convergence(const SolutionField& sol, std::ostream& out) {
  out << "   n      sup|f^(n)|       ratio     M^n sup|f0|     remainder\n";
  for (const auto& r : convergence_report(sol)) {
    char line[160];
    std::snprintf(line, sizeof line, "%4d  %14.6e  %10.6f  %14.6e  %12.4e\n", r.n, r.sup_norm, r.ratio, r.a_priori,
                  r.remainder);
    out << line;
  }
}

// Evaluates F0, F1 at every point in parallel; rows keep the input order.
CsvTable evaluate_rows(const SolutionField& sol, const std::vector<PhasePoint>& pts) {
  std::vector<std::array<double, 2>> v(pts.size());
  const auto n = static_cast<long long>(pts.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (long long i = 0; i < n; ++i) {
    const auto& p = pts[static_cast<std::size_t>(i)];
    v[static_cast<std::size_t>(i)] = {sol.F0(p), sol.F1(p)};
  }
  auto header = phase_columns(sol.layout().dim());
  for (const char* c : {"f", "F0", "F1"}) header.emplace_back(c);
  CsvTable t(header);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    auto row = phase_cells(pts[i]);
    row.push_back(v[i][0] + v[i][1]);
    row.push_back(v[i][0]);
    row.push_back(v[i][1]);
    t.add(row);
  }
  return t;
}

void print_validation(const ValidationReport& r, std::ostream& out) {
  out << "validation: " << (r.passed ? "passed" : "FAILED") << "\n";
  if (!r.passed) out << "  violated: " << r.failure << "\n";
  out << "  inf(mu_t - mu_s)     " << fmt("%.6g", r.gap) << "\n"
      << "  inf mu_t             " << fmt("%.6g", r.mu_t_lower) << "\n"
      << "  sup mu_t             " << fmt("%.6g", r.mu_t_upper) << "\n"
      << "  sup mu_s             " << fmt("%.6g", r.mu_s_upper) << "\n"
      << "  M = sup mu_s/mu_t    " << fmt("%.6g", r.albedo_bound) << "\n"
      << "  sup p                " << fmt("%.6g", r.phase_upper) << "\n"
      << "  normalization error  " << fmt("%.3e", r.normalization_error) << "\n"
      << "  samples              " << r.samples << "\n";
}

json validation_json(const ValidationReport& r) {
  return {{"passed", r.passed},
          {"failure", r.failure},
          {"gap", r.gap},
          {"mu_t_lower", r.mu_t_lower},
          {"mu_t_upper", r.mu_t_upper},
          {"mu_s_upper", r.mu_s_upper},
          {"albedo_bound", r.albedo_bound},
          {"phase_upper", r.phase_upper},
          {"normalization_error", r.normalization_error},
          {"samples", r.samples}};
}

}  // namespace

int run_solve(const Scenario& s, const RunOptions& o, std::ostream& out) {
  const SolutionField sol = solve(s);
  const json meta = base_meta(s, "solve", o.seed);
  const SliceSpec& sl = s.slices;
  const LateralWindow& w = s.domain.window;
  const auto xs = linspace(w.lower[0], w.upper[0], sl.lateral_samples);
  const auto angles = slice_angles(s.dim, sl.angle_samples);
  std::vector<double> depths;
  for (int j = 0; j < sl.depth_samples; ++j) depths.push_back((j + 1.0) / (sl.depth_samples + 1.0));
  const double x_fixed = sl.position.empty() ? 0.5 * (w.lower[0] + w.upper[0]) : sl.position[0];

  std::vector<PhasePoint> a, b, c;
  for (double x1 : xs)
    for (double th : angles) a.push_back({lateral_point(s, x1, sl.depth), slice_direction(s.dim, th, sl.azimuth)});
  const Direction fixed = slice_direction(s.dim, sl.theta, sl.azimuth);
  for (double x1 : xs)
    for (double z : depths) b.push_back({lateral_point(s, x1, z), fixed});
  for (double z : depths)
    for (double th : angles) c.push_back({lateral_point(s, x_fixed, z), slice_direction(s.dim, th, sl.azimuth)});

  json m = meta;
  m["slice"] = {{"fixed", "depth"}, {"depth", sl.depth}};
  write_csv(o.out, "slice_depth", evaluate_rows(sol, a), m);
  m["slice"] = {{"fixed", "direction"}, {"angle", sl.theta}, {"azimuth", sl.azimuth}};
  write_csv(o.out, "slice_direction", evaluate_rows(sol, b), m);
  m["slice"] = {{"fixed", "lateral"}, {"x1", x_fixed}};
  write_csv(o.out, "slice_lateral", evaluate_rows(sol, c), m);
  write_csv(o.out, "convergence", convergence_table(sol), meta);

  if (o.dump_iterates) {
    const CollocationLayout& L = sol.layout();
    auto header = phase_columns(s.dim);
    header.emplace_back("value");
    for (std::size_t n = 0; n < sol.retained_iterates(); ++n) {
      const auto vals = sol.nodal_iterate(static_cast<int>(n));
      CsvTable t(header);
      for (std::size_t i = 0; i < L.spatial_size(); ++i)
        for (std::size_t k = 0; k < L.directions(); ++k) {
          auto row = phase_cells({L.position(i), L.angles()[k].xi});
          row.push_back(vals[i * L.directions() + k]);
          t.add(row);
        }
      json im = meta;
      im["iterate"] = n;
      char name[32];
      std::snprintf(name, sizeof name, "iterate_%03zu", n);
      write_csv(o.out, name, t, im);
    }
  }

  json j = meta;
  j["solver"] = solve_meta_json(sol);
  j["fixed_point_residual"] = sol.fixed_point_residual();
  write_json(o.out / "meta.json", j);

  const SolveMeta& sm = sol.meta();
  out << "solved '" << s.name << "': " << sm.iterations << " scattered iterates, last increment "
      << fmt("%.3e", sm.final_increment) << ", certified bound " << fmt("%.3e", sm.certified_bound)
      << " (a priori n = " << sm.certified_n << ")\n";
  print_convergence(sol, out);
  if (!(sm.certified_bound <= sm.tol)) return kExitCertificate;
  return kExitOk;
}

int run_convergence(const Scenario& s, const RunOptions& o, std::ostream& out) {
  const SolutionField sol = solve(s);
  json meta = base_meta(s, "convergence", o.seed);
  write_csv(o.out, "convergence", convergence_table(sol), meta);
  meta["solver"] = solve_meta_json(sol);
  write_json(o.out / "meta.json", meta);
  print_convergence(sol, out);
  return sol.meta().certified_bound <= sol.meta().tol ? kExitOk : kExitCertificate;
}

int run_disc(const Scenario& s, const RunOptions& o, std::ostream& out) {
  if (s.boundary.seeds().empty()) throw ConfigError("disc: the scenario declares no discontinuity seeds");
  const SolutionField sol = solve(s);
  const auto rays = seed_rays(s.boundary);
  const json meta = base_meta(s, "disc", o.seed);

  auto ray_header = std::vector<std::string>{"ray"};
  for (const char* c : {"x_star", "xi_star"})
    for (int i = 1; i <= s.dim; ++i) ray_header.push_back(std::string(c) + std::to_string(i));
  for (const char* c : {"jump", "length", "approach"}) ray_header.emplace_back(c);
  CsvTable geo(ray_header);
  for (std::size_t r = 0; r < rays.size(); ++r) {
    std::vector<double> row{static_cast<double>(r)};
    for (int i = 0; i < s.dim; ++i) row.push_back(rays[r].seed.x_star[i]);
    for (int i = 0; i < s.dim; ++i) row.push_back(rays[r].seed.xi_star[i]);
    row.push_back(rays[r].seed.jump);
    row.push_back(rays[r].length);
    row.push_back(rays[r].seed.approach == Approach::lateral ? 0.0 : 1.0);
    geo.add(row);
  }
  json gm = meta;
  gm["approach_codes"] = {{"0", "lateral"}, {"1", "angular"}};
  write_csv(o.out, "disc_rays", geo, gm);

  auto header = std::vector<std::string>{"ray", "t"};
  for (const auto& c : phase_columns(s.dim)) header.push_back(c);
  for (const char* c : {"measured", "predicted", "uncertainty", "survival", "f1_oscillation"}) header.emplace_back(c);
  CsvTable jumps(header);
  out << " ray      t      measured     predicted   uncertainty   F1 oscillation\n";
  for (std::size_t r = 0; r < rays.size(); ++r) {
    std::vector<double> ts{0.0};
    for (double t : s.analysis.ray_parameters)
      if (t > 0.0 && t < rays[r].length) ts.push_back(t);
    for (double t : ts) {
      const JumpEstimate e = measure_jump(sol, rays[r], t, s.analysis.offsets);
      const ContinuityScan c = f1_continuity_scan(sol, rays[r], t, s.analysis.offsets);
      std::vector<double> row{static_cast<double>(r), t};
      for (double v : phase_cells({rays[r].point(t), rays[r].seed.xi_star})) row.push_back(v);
      for (double v : {e.measured, e.predicted, e.uncertainty, e.survival, c.oscillation.back()}) row.push_back(v);
      jumps.add(row);
      char line[160];
      std::snprintf(line, sizeof line, "%4zu  %5.3f  %12.8f  %12.8f  %12.3e  %14.3e\n", r, t, e.measured, e.predicted,
                    e.uncertainty, c.oscillation.back());
      out << line;
    }
  }
  write_csv(o.out, "disc_jumps", jumps, meta);

  auto pheader = phase_columns(s.dim);
  for (const char* c : {"measured", "uncertainty"}) pheader.emplace_back(c);
  CsvTable probes(pheader);
  double worst = 0.0;
  for (const auto& p : off_ray_probes(sol, rays, s.analysis.off_ray_probes, o.seed, s.analysis.offsets)) {
    auto row = phase_cells(p.p);
    row.push_back(p.jump.measured);
    row.push_back(p.jump.uncertainty);
    probes.add(row);
    worst = std::max(worst, std::abs(p.jump.measured));
  }
  write_csv(o.out, "disc_off_ray", probes, meta);
  out << "off-ray probes: " << probes.rows() << ", largest |jump| " << fmt("%.3e", worst) << "\n";
  return kExitOk;
}

int run_counterexample(const Scenario& s, const RunOptions& o, std::ostream& out) {
  if (s.dim != 2) throw ConfigError("counterexample: requires dimension 2");
  const CounterexampleReport r = counterexample_report(s.medium, s.analysis.x_bar, s.quadrature, o.seed);
  const json meta = base_meta(s, "counterexample", o.seed);

  CsvTable g({"offset", "G_left", "G_right"});
  for (std::size_t i = 0; i < r.g_offsets.size(); ++i) g.add({r.g_offsets[i], r.g_left[i], r.g_right[i]});
  write_csv(o.out, "counterexample_G", g, meta);

  CsvTable q({"point", "x1", "x2", "theta", "h", "d_plus", "d_minus", "mismatch", "predicted"});
  auto add = [&](const std::string& label, const DifferenceQuotients& d) {
    for (std::size_t i = 0; i < d.h.size(); ++i)
      q.add(label, {d.x[0], d.x[1], d.theta, d.h[i], d.d_plus[i], d.d_minus[i], d.mismatch[i], d.predicted});
  };
  for (const auto& d : r.at_x_bar) add("x_bar", d);
  add("control", r.control);
  write_csv(o.out, "counterexample_quotients", q, meta);

  json j = meta;
  j["x_bar"] = {r.x_bar[0], r.x_bar[1]};
  j["g_minus_probes"] = r.g_minus_probes;
  j["g_minus_max"] = r.g_minus_max;
  j["g_at_x_bar"] = r.g_at_x_bar;
  j["g_jump"] = r.g_jump;
  j["regularity"] = {{"empirical", to_string(r.regularity.empirical)},
                     {"declared", to_string(Regularity::neither)},
                     {"condition1_jumps", r.regularity.condition1_jumps},
                     {"condition1_probes", r.regularity.condition1_probes},
                     {"condition2_jumps", r.regularity.condition2_jumps},
                     {"condition2_probes", r.regularity.condition2_probes}};
  j["mismatch_persists"] = r.mismatch_persists;
  j["control_decays"] = r.control_decays;
  j["conclusion"] = r.conclusion;
  write_json(o.out / "counterexample.json", j);

  out << "G_- max over " << r.g_minus_probes << " probes: " << fmt("%.3e", r.g_minus_max) << "\n"
      << "G at x_bar +- offset along e_1:\n";
  for (std::size_t i = 0; i < r.g_offsets.size(); ++i)
    out << "  " << fmt("%8.0e", r.g_offsets[i]) << "  left " << fmt("%.10f", r.g_left[i]) << "  right "
        << fmt("%.10f", r.g_right[i]) << "\n";
  out << "G jump (right - left): " << fmt("%.10f", r.g_jump) << "\n"
      << "one-sided quotients of f^(1) (mismatch = D+ - D-):\n";
  for (const auto& d : r.at_x_bar) {
    out << "  theta " << fmt("%6.4f", d.theta) << "  predicted " << fmt("%+.6f", d.predicted) << "  mismatch";
    for (double v : d.mismatch) out << " " << fmt("%+.6f", v);
    out << "\n";
  }
  out << "  control x_bar+(0.3,0)  mismatch";
  for (double v : r.control.mismatch) out << " " << fmt("%+.3e", v);
  out << "\n" << r.conclusion << "\n";
  return kExitOk;
}

int run_validate(const Scenario& s, const RunOptions& o, std::ostream& out) {
  const ValidationReport v = validate(s.medium, s.quadrature, s.domain);
  print_validation(v, out);
  const RegularityEvidence e = classify_regularity(s.boundary, s.domain, 16);
  out << "boundary data '" << s.boundary.name() << "': declared " << to_string(s.boundary.declared_regularity())
      << ", observed " << to_string(e.empirical) << (e.agrees_with_declared ? "" : " (disagrees)") << "\n";
  if (!e.note.empty()) out << "  " << e.note << "\n";
  const bool tails = s.boundary.declares_constant_tails() && check_constant_tails(s.boundary, s.domain, s.quadrature);
  out << "constant lateral tails: " << (tails ? "yes" : "no") << "\n";
  out << "continuity of mu_t, mu_s and p is assumed; sampling cannot verify it\n";

  json j = base_meta(s, "validate", o.seed);
  j["medium"] = validation_json(v);
  j["medium"]["continuity"] = "assumed, not verified by sampling";
  j["boundary"] = {{"name", s.boundary.name()},
                   {"declared", to_string(s.boundary.declared_regularity())},
                   {"observed", to_string(e.empirical)},
                   {"agrees", e.agrees_with_declared},
                   {"constant_tails", tails}};
  write_json(o.out / "validate.json", j);
  return v.passed ? kExitOk : kExitValidation;
}

int run_mc_check(const Scenario& s, const RunOptions& o, std::ostream& out) {
  const SolutionField sol = solve(s);
  const LateralWindow& w = s.domain.window;
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<PhasePoint> pts;
  while (static_cast<int>(pts.size()) < s.analysis.mc_points) {
    const double x1 = w.lower[0] + (w.upper[0] - w.lower[0]) * (0.25 + 0.5 * u(rng));
    const double z = 0.05 + 0.9 * u(rng);
    const Vec x = lateral_point(s, x1, z);
    const Direction xi = s.dim == 2 ? Direction::from_angle(2.0 * kPi * u(rng))
                                    : Direction::from_polar(std::acos(1.0 - 2.0 * u(rng)), 2.0 * kPi * u(rng));
    if (std::abs(xi.depth()) < 0.05) continue;
    pts.push_back({x, xi});
  }
  auto header = phase_columns(s.dim);
  for (const char* c : {"solver", "mc_mean", "mc_std_error", "z"}) header.emplace_back(c);
  CsvTable t(header);
  int within = 0;
  out << "  #        solver            mc      std err       z\n";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double f = sol.value(pts[i]);
    const MonteCarloEstimate e = mc_oracle(s.medium, s.boundary, pts[i], s.analysis.mc_samples, o.seed + 1000 + i,
                                           s.quadrature);
    const double diff = f - e.mean;
    const double z = e.std_error > 0.0 ? diff / e.std_error : (diff == 0.0 ? 0.0 : kInf);
    if (std::abs(z) <= 3.0) ++within;
    auto row = phase_cells(pts[i]);
    for (double v : {f, e.mean, e.std_error, z}) row.push_back(v);
    t.add(row);
    char line[160];
    std::snprintf(line, sizeof line, "%3zu  %12.8f  %12.8f  %11.3e  %6.2f\n", i, f, e.mean, e.std_error, z);
    out << line;
  }
  const int needed = static_cast<int>(std::ceil(0.9 * static_cast<double>(pts.size())));
  json meta = base_meta(s, "mc-check", o.seed);
  meta["samples_per_point"] = s.analysis.mc_samples;
  meta["within_3_sigma"] = within;
  meta["required"] = needed;
  write_csv(o.out, "mc_check", t, meta);
  out << "|z| <= 3 at " << within << " of " << pts.size() << " points (required " << needed << ")\n";
  return within >= needed ? kExitOk : kExitCertificate;
}

int run_command(const std::string& command, const RunOptions& opts, std::ostream& out, std::ostream& err) {
  using Runner = int (*)(const Scenario&, const RunOptions&, std::ostream&);
  Runner run = nullptr;
  if (command == "solve") run = run_solve;
  else if (command == "disc") run = run_disc;
  else if (command == "counterexample") run = run_counterexample;
  else if (command == "validate") run = run_validate;
  else if (command == "mc-check") run = run_mc_check;
  else if (command == "convergence") run = run_convergence;
  if (!run) {
    err << "unknown command '" << command << "'\n";
    return kExitUsage;
  }
  const auto start = std::chrono::steady_clock::now();
  try {
    Scenario s = load_scenario(opts.config);
    if (opts.tol) {
      if (!(*opts.tol > 0.0)) throw ConfigError("--tol must be positive");
      s.solver.tol = *opts.tol;
    }
    if (opts.threads < 0) throw ConfigError("--threads must be non-negative");
    if (opts.threads > 0) omp_set_num_threads(opts.threads);
    std::error_code ec;
    std::filesystem::create_directories(opts.out, ec);
    if (ec || !std::filesystem::is_directory(opts.out)) throw IoError("cannot create output directory " + opts.out.string());
    const int code = run(s, opts, out);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    json timing = base_meta(s, command, opts.seed);
    timing["wall_seconds"] = wall;
    timing["threads"] = omp_get_max_threads();
    write_json(opts.out / "timing.json", timing);
    return code;
  } catch (const ValidationError& e) {
    err << e.what() << "\n";
    print_validation(e.report(), err);
    return kExitValidation;
  } catch (const ConvergenceError& e) {
    err << e.what() << " (after " << e.iterations << " iterates, increment " << fmt("%.3e", e.increment)
        << ", certified " << fmt("%.3e", e.certified) << ")\n";
    return kExitCertificate;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace slabte
