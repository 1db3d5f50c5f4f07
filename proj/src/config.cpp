#include "slabte/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace slabte {

namespace {

std::string where(const YAML::Node& n) {
  const auto m = n.Mark();
  if (m.is_null()) return "";
  return " (line " + std::to_string(m.line + 1) + ")";
}

template <class T>
T as(const YAML::Node& n, const std::string& ctx) {
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(ctx + ": bad value" + where(n));
  }
}

template <class T>
T get(const YAML::Node& parent, const std::string& key, const std::string& ctx) {
  const YAML::Node n = parent[key];
  if (!n) throw ConfigError(ctx + ": missing key '" + key + "'" + where(parent));
  return as<T>(n, ctx + "." + key);
}

template <class T>
T get_or(const YAML::Node& parent, const std::string& key, T fallback, const std::string& ctx) {
  if (!parent || !parent[key]) return fallback;
  return get<T>(parent, key, ctx);
}

void check_keys(const YAML::Node& n, const std::set<std::string>& allowed, const std::string& ctx) {
  if (!n) return;
  if (!n.IsMap()) throw ConfigError(ctx + ": expected a mapping" + where(n));
  for (const auto& kv : n) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) throw ConfigError(ctx + ": unknown key '" + key + "'" + where(kv.first));
  }
}

Vec to_vec(const std::vector<double>& v, int dim, const std::string& ctx) {
  if (static_cast<int>(v.size()) != dim) throw ConfigError(ctx + ": expected " + std::to_string(dim) + " coordinates");
  return dim == 2 ? Vec(v[0], v[1]) : Vec(v[0], v[1], v[2]);
}

ScalarField parse_field(const YAML::Node& n, int dim, const std::string& ctx, const std::string& base_dir) {
  if (!n) throw ConfigError(ctx + ": missing");
  if (n.IsScalar()) return ScalarField::constant(as<double>(n, ctx));
  const auto type = get<std::string>(n, "type", ctx);
  if (type == "constant") {
    check_keys(n, {"type", "value"}, ctx);
    return ScalarField::constant(get<double>(n, "value", ctx));
  }
  if (type == "depth_affine") {
    check_keys(n, {"type", "bottom", "top"}, ctx);
    return ScalarField::depth_affine(get<double>(n, "bottom", ctx), get<double>(n, "top", ctx));
  }
  if (type == "bump") {
    check_keys(n, {"type", "base", "amplitude", "center", "width"}, ctx);
    return ScalarField::bump(get<double>(n, "base", ctx), get<double>(n, "amplitude", ctx),
                             to_vec(get<std::vector<double>>(n, "center", ctx), dim, ctx + ".center"),
                             get<double>(n, "width", ctx));
  }
  if (type == "grid") {
    check_keys(n, {"type", "path"}, ctx);
    std::filesystem::path p = get<std::string>(n, "path", ctx);
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    try {
      return ScalarField::grid(load_grid_csv(p.string()));
    } catch (const DomainError& e) {
      throw ConfigError(ctx + ": " + e.what());
    } catch (const std::runtime_error& e) {
      throw IoError(ctx + ": " + e.what());
    }
  }
  throw ConfigError(ctx + ": unknown field type '" + type + "'");
}

PhaseFunction parse_phase(const YAML::Node& n, int dim, const std::string& ctx) {
  if (!n) return PhaseFunction::isotropic(dim);
  const auto type = get<std::string>(n, "type", ctx);
  if (type == "isotropic") {
    check_keys(n, {"type"}, ctx);
    return PhaseFunction::isotropic(dim);
  }
  if (type == "linear") {
    check_keys(n, {"type", "g"}, ctx);
    return PhaseFunction::linear(dim, get<double>(n, "g", ctx));
  }
  if (type == "henyey_greenstein") {
    check_keys(n, {"type", "g"}, ctx);
    return PhaseFunction::henyey_greenstein(dim, get<double>(n, "g", ctx));
  }
  if (type == "tabulated") {
    check_keys(n, {"type", "values"}, ctx);
    return PhaseFunction::tabulated(dim, get<std::vector<double>>(n, "values", ctx));
  }
  throw ConfigError(ctx + ": unknown phase type '" + type + "'");
}

Direction parse_direction(const YAML::Node& n, int dim, const std::string& ctx) {
  if (n["angle"]) {
    if (dim != 2) throw ConfigError(ctx + ": 'angle' is for d = 2; use 'direction'");
    return Direction::from_angle(get<double>(n, "angle", ctx));
  }
  if (n["direction"]) {
    try {
      return Direction::normalized(to_vec(get<std::vector<double>>(n, "direction", ctx), dim, ctx + ".direction"));
    } catch (const DomainError& e) {
      throw ConfigError(ctx + ": " + e.what());
    }
  }
  throw ConfigError(ctx + ": needs 'angle' or 'direction'" + where(n));
}

BoundaryData parse_boundary(const YAML::Node& n, int dim, const std::string& ctx) {
  if (!n) throw ConfigError(ctx + ": missing");
  const auto type = get<std::string>(n, "type", ctx);
  const std::set<std::string> common{"type", "seeds", "regularity", "exceptional_angles", "exceptional_positions"};
  auto keys = [&](std::initializer_list<const char*> extra) {
    std::set<std::string> k = common;
    for (const char* e : extra) k.insert(e);
    check_keys(n, k, ctx);
  };
  auto d2 = [&] {
    if (dim != 2) throw ConfigError(ctx + ": preset '" + type + "' is two-dimensional");
  };

  std::optional<BoundaryData> b;
  if (type == "constant") {
    keys({"value"});
    b = BoundaryData::constant(dim, get<double>(n, "value", ctx));
  } else if (type == "faces") {
    keys({"bottom", "top"});
    b = BoundaryData::faces(dim, get<double>(n, "bottom", ctx), get<double>(n, "top", ctx));
  } else if (type == "lateral_step") {
    keys({"position", "left", "right", "top"});
    b = BoundaryData::lateral_step(dim, get<double>(n, "position", ctx), get<double>(n, "left", ctx),
                                   get<double>(n, "right", ctx), get_or<double>(n, "top", 0.0, ctx));
  } else if (type == "angular_step") {
    d2();
    keys({"cut", "below", "above", "top"});
    b = BoundaryData::angular_step(get<double>(n, "cut", ctx), get<double>(n, "below", ctx),
                                   get<double>(n, "above", ctx), get_or<double>(n, "top", 0.0, ctx));
  } else if (type == "smooth_ramp") {
    keys({"center", "width", "lo", "hi", "tilt", "top"});
    b = BoundaryData::smooth_ramp(dim, get<double>(n, "center", ctx), get<double>(n, "width", ctx),
                                  get<double>(n, "lo", ctx), get<double>(n, "hi", ctx),
                                  get_or<double>(n, "tilt", 0.0, ctx), get_or<double>(n, "top", 0.0, ctx));
  } else if (type == "counterexample") {
    d2();
    keys({"x_bar"});
    b = BoundaryData::counterexample(to_vec(get<std::vector<double>>(n, "x_bar", ctx), 2, ctx + ".x_bar"));
  } else if (type == "piecewise") {
    d2();
    keys({"pieces", "bottom", "top"});
    std::vector<BoundaryData::Piece> pieces;
    const YAML::Node list = n["pieces"];
    if (!list || !list.IsSequence()) throw ConfigError(ctx + ": 'pieces' must be a list" + where(n));
    for (std::size_t i = 0; i < list.size(); ++i) {
      const YAML::Node pn = list[i];
      const std::string pc = ctx + ".pieces[" + std::to_string(i) + "]";
      check_keys(pn, {"face", "x", "theta", "value"}, pc);
      BoundaryData::Piece p;
      const auto face = get_or<std::string>(pn, "face", "bottom", pc);
      if (face != "bottom" && face != "top") throw ConfigError(pc + ": face must be bottom or top");
      p.face = face == "bottom" ? Face::bottom : Face::top;
      if (pn["x"]) {
        const auto r = get<std::vector<double>>(pn, "x", pc);
        if (r.size() != 2) throw ConfigError(pc + ": x needs [lo, hi]");
        p.x_lo = r[0];
        p.x_hi = r[1];
      }
      if (pn["theta"]) {
        const auto r = get<std::vector<double>>(pn, "theta", pc);
        if (r.size() != 2) throw ConfigError(pc + ": theta needs [lo, hi]");
        p.theta_lo = r[0];
        p.theta_hi = r[1];
      }
      p.value = get<double>(pn, "value", pc);
      pieces.push_back(p);
    }
    Regularity decl = Regularity::neither;
    if (n["regularity"]) decl = parse_regularity(get<std::string>(n, "regularity", ctx));
    b = BoundaryData::piecewise(std::move(pieces), get_or<double>(n, "bottom", 0.0, ctx),
                                get_or<double>(n, "top", 0.0, ctx), decl);
  } else {
    throw ConfigError(ctx + ": unknown boundary preset '" + type + "'");
  }

  if (n["regularity"] && type != "piecewise") {
    const auto decl = parse_regularity(get<std::string>(n, "regularity", ctx));
    if (decl != b->declared_regularity())
      throw ConfigError(ctx + ": preset '" + type + "' declares " + to_string(b->declared_regularity()) +
                        ", not " + to_string(decl));
  }
  b->exceptional_angles = get_or<std::vector<double>>(n, "exceptional_angles", b->exceptional_angles, ctx);
  b->exceptional_positions = get_or<std::vector<double>>(n, "exceptional_positions", b->exceptional_positions, ctx);

  if (const YAML::Node seeds = n["seeds"]) {
    if (!seeds.IsSequence()) throw ConfigError(ctx + ": 'seeds' must be a list" + where(seeds));
    std::vector<DiscSeed> out;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      const YAML::Node s = seeds[i];
      const std::string sc = ctx + ".seeds[" + std::to_string(i) + "]";
      check_keys(s, {"x", "angle", "direction", "jump", "approach"}, sc);
      DiscSeed seed;
      seed.x_star = to_vec(get<std::vector<double>>(s, "x", sc), dim, sc + ".x");
      seed.xi_star = parse_direction(s, dim, sc);
      seed.jump = get<double>(s, "jump", sc);
      seed.approach = parse_approach(get_or<std::string>(s, "approach", "lateral", sc));
      out.push_back(seed);
    }
    try {
      b->set_seeds(std::move(out));
    } catch (const DomainError& e) {
      throw ConfigError(ctx + ".seeds: " + e.what());
    }
  }
  return std::move(*b);
}

SlabDomain parse_domain(const YAML::Node& n, int dim, const std::string& ctx) {
  SlabDomain d = SlabDomain::with_window(dim, -1.0, 1.0);
  if (!n) return d;
  check_keys(n, {"window"}, ctx);
  const YAML::Node w = n["window"];
  if (!w) return d;
  if (!w.IsSequence() || w.size() == 0) throw ConfigError(ctx + ": window must be a list" + where(w));
  if (w[0].IsScalar()) {
    const auto r = as<std::vector<double>>(w, ctx + ".window");
    if (r.size() != 2) throw ConfigError(ctx + ": window needs [lo, hi]");
    d = SlabDomain::with_window(dim, r[0], r[1]);
  } else {
    if (static_cast<int>(w.size()) != dim - 1) throw ConfigError(ctx + ": window needs one [lo, hi] per lateral axis");
    for (std::size_t a = 0; a < w.size(); ++a) {
      const auto r = as<std::vector<double>>(w[a], ctx + ".window");
      if (r.size() != 2) throw ConfigError(ctx + ": window needs [lo, hi]");
      d.window.lower[a] = r[0];
      d.window.upper[a] = r[1];
    }
  }
  try {
    d.validate();
  } catch (const DomainError& e) {
    throw ConfigError(ctx + ": " + e.what());
  }
  return d;
}

}  // namespace

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

Scenario parse_scenario(const std::string& text, const std::string& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("scenario is not valid YAML: ") + e.what());
  }
  if (!root.IsMap()) throw ConfigError("scenario must be a mapping");
  check_keys(root, {"name", "dimension", "medium", "boundary", "domain", "grid", "quadrature", "solver", "output",
                    "analysis"},
             "scenario");

  Scenario s;
  s.text = text;
  s.hash = fnv1a64(text);
  s.name = get_or<std::string>(root, "name", s.name, "scenario");
  s.dim = get_or<int>(root, "dimension", 2, "scenario");
  if (s.dim != 2 && s.dim != 3) throw ConfigError("scenario: dimension must be 2 or 3");
  const int d = s.dim;

  const YAML::Node med = root["medium"];
  if (!med) throw ConfigError("scenario: missing 'medium'");
  check_keys(med, {"mu_t", "mu_s", "phase"}, "medium");
  try {
    s.medium = Medium{d, parse_field(med["mu_t"], d, "medium.mu_t", base_dir),
                      parse_field(med["mu_s"], d, "medium.mu_s", base_dir), parse_phase(med["phase"], d, "medium.phase")};
    s.boundary = parse_boundary(root["boundary"], d, "boundary");
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  s.domain = parse_domain(root["domain"], d, "domain");

  const YAML::Node grid = root["grid"];
  check_keys(grid, {"lateral_nodes", "depth_nodes"}, "grid");
  s.grid.lateral_nodes = get_or<int>(grid, "lateral_nodes", s.grid.lateral_nodes, "grid");
  s.grid.depth_nodes = get_or<int>(grid, "depth_nodes", s.grid.depth_nodes, "grid");

  const YAML::Node q = root["quadrature"];
  check_keys(q, {"angular_nodes", "azimuth_nodes", "ray_panels", "tail_epsilon"}, "quadrature");
  s.quadrature.angular_nodes = get_or<int>(q, "angular_nodes", s.quadrature.angular_nodes, "quadrature");
  s.quadrature.azimuth_nodes = get_or<int>(q, "azimuth_nodes", s.quadrature.azimuth_nodes, "quadrature");
  s.quadrature.ray_panels = get_or<int>(q, "ray_panels", s.quadrature.ray_panels, "quadrature");
  s.quadrature.tail_epsilon = get_or<double>(q, "tail_epsilon", s.quadrature.tail_epsilon, "quadrature");

  const YAML::Node so = root["solver"];
  check_keys(so, {"tol", "max_iterations", "min_iterations", "first_collision_refinement", "keep_iterates"}, "solver");
  s.solver.tol = get_or<double>(so, "tol", s.solver.tol, "solver");
  s.solver.max_iterations = get_or<int>(so, "max_iterations", s.solver.max_iterations, "solver");
  s.solver.min_iterations = get_or<int>(so, "min_iterations", s.solver.min_iterations, "solver");
  s.solver.first_collision_refinement =
      get_or<int>(so, "first_collision_refinement", s.solver.first_collision_refinement, "solver");
  s.solver.keep_iterates = get_or<bool>(so, "keep_iterates", s.solver.keep_iterates, "solver");

  const YAML::Node out = root["output"];
  check_keys(out, {"lateral_samples", "depth_samples", "angle_samples", "depth", "theta", "azimuth", "position"},
             "output");
  s.slices.lateral_samples = get_or<int>(out, "lateral_samples", s.slices.lateral_samples, "output");
  s.slices.depth_samples = get_or<int>(out, "depth_samples", s.slices.depth_samples, "output");
  s.slices.angle_samples = get_or<int>(out, "angle_samples", s.slices.angle_samples, "output");
  s.slices.depth = get_or<double>(out, "depth", s.slices.depth, "output");
  s.slices.theta = get_or<double>(out, "theta", s.slices.theta, "output");
  s.slices.azimuth = get_or<double>(out, "azimuth", s.slices.azimuth, "output");
  s.slices.position = get_or<std::vector<double>>(out, "position", s.slices.position, "output");
  if (s.slices.lateral_samples < 2 || s.slices.depth_samples < 1 || s.slices.angle_samples < 1)
    throw ConfigError("output: sample counts too small");
  if (!(s.slices.depth > 0.0 && s.slices.depth < 1.0)) throw ConfigError("output: depth must lie in (0, 1)");
  if (!s.slices.position.empty() && static_cast<int>(s.slices.position.size()) != d - 1)
    throw ConfigError("output: position needs one coordinate per lateral axis");

  const YAML::Node an = root["analysis"];
  check_keys(an, {"ray_parameters", "offsets", "off_ray_probes", "x_bar", "mc_points", "mc_samples"}, "analysis");
  s.analysis.ray_parameters = get_or(an, "ray_parameters", s.analysis.ray_parameters, "analysis");
  s.analysis.offsets = get_or(an, "offsets", s.analysis.offsets, "analysis");
  s.analysis.off_ray_probes = get_or<int>(an, "off_ray_probes", s.analysis.off_ray_probes, "analysis");
  if (an && an["x_bar"]) s.analysis.x_bar = to_vec(get<std::vector<double>>(an, "x_bar", "analysis"), 2, "analysis.x_bar");
  s.analysis.mc_points = get_or<int>(an, "mc_points", s.analysis.mc_points, "analysis");
  s.analysis.mc_samples = get_or<std::size_t>(an, "mc_samples", s.analysis.mc_samples, "analysis");
  if (s.analysis.offsets.size() < 2) throw ConfigError("analysis: at least two offsets are needed");
  if (s.analysis.mc_points < 1 || s.analysis.mc_samples < 1) throw ConfigError("analysis: mc counts must be positive");

  try {
    s.grid.validate(d);
    s.quadrature.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  if (!(s.solver.tol > 0.0)) throw ConfigError("solver: tol must be positive");
  if (s.solver.max_iterations < 1 || s.solver.min_iterations < 0) throw ConfigError("solver: bad iteration limits");
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("cannot read " + path);
  const auto dir = std::filesystem::path(path).parent_path();
  return parse_scenario(buf.str(), dir.empty() ? "." : dir.string());
}

}  // namespace slabte
