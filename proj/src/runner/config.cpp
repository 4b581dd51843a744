#include "ncdg/runner/config.hpp"

#include "ncdg/common/errors.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>
#include <vector>

namespace ncdg {

std::string to_string(CaseKind k) {
  switch (k) {
  case CaseKind::Hill:
    return "hill";
  case CaseKind::Rest:
    return "rest";
  case CaseKind::Manufactured:
    return "manufactured";
  }
  return "hill";
}

CaseKind case_kind_from_string(const std::string& s) {
  if (s == "hill")
    return CaseKind::Hill;
  if (s == "rest")
    return CaseKind::Rest;
  if (s == "manufactured")
    return CaseKind::Manufactured;
  throw ConfigError("case.kind: unknown case '" + s + "'");
}

std::array<double, 3> RunConfig::extents() const {
  if (kind == CaseKind::Manufactured)
    return {manufactured.L, manufactured.L, dim == 3 ? manufactured.L : 0.0};
  return hill.extents;
}

void RunConfig::validate() const {
  auto fail = [](const std::string& key, const std::string& what) { throw ConfigError(key + ": " + what); };
  if (dim != 2 && dim != 3)
    fail("case.dim", "must be 2 or 3");
  if (degree < 1 || degree > 8)
    fail("case.degree", "must lie in [1, 8]");
  if (geometric_degree < 1 || geometric_degree > 8)
    fail("case.geometric_degree", "must lie in [1, 8]");
  if (quadrature_points != 0 && (quadrature_points < degree + 1 || quadrature_points > 2 * degree + 2))
    fail("case.quadrature_points", "must be 0 or lie in [degree+1, 2 degree+2]");
  if (!(dt > 0))
    fail("time.dt", "must be positive");
  if (!(final_time > 0))
    fail("time.final_time", "must be positive");
  if (max_steps < 0)
    fail("time.max_steps", "must be non-negative");
  if (scheme != "ars222" && scheme != "rk4")
    fail("time.scheme", "must be ars222 or rk4");
  if (gravity != "implicit" && gravity != "explicit")
    fail("solver.gravity", "must be implicit or explicit");
  if (workers < 1)
    fail("run.workers", "must be >= 1");
  for (int a = 0; a < dim; ++a)
    if (mesh.roots[a] < 1)
      fail("mesh.roots", "root counts must be >= 1");
  if (mesh.level < 0 || mesh.level > 12 || mesh.refine_levels < 0 || mesh.level + mesh.refine_levels > 12)
    fail("mesh.level", "refinement levels must lie in [0, 12]");
  if (output.diagnostics_every < 1)
    fail("output.diagnostics_every", "must be >= 1");
  if (output.snapshot_every < 0)
    fail("output.snapshot_every", "must be non-negative");
  if (output.name.empty() || output.name.find('/') != std::string::npos)
    fail("output.name", "must be a plain file stem");
  solver.validate();
  if (kind == CaseKind::Manufactured) {
    if (manufactured.dim != dim)
      fail("case.dim", "manufactured dimension mismatch");
    manufactured.validate();
  } else {
    if (hill.dim != dim)
      fail("case.dim", "hill dimension mismatch");
    hill.validate();
    if (kind == CaseKind::Hill && !hill.terrain)
      fail("case.kind", "hill case needs terrain");
    sponge_cfg.validate();
  }
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

double to_double(const std::string& key, const std::string& s) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size())
      throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + s + "'");
  }
}

int to_int(const std::string& key, const std::string& s) {
  const double v = to_double(key, s);
  if (v != double(int(v)))
    throw ConfigError(key + ": expected an integer, got '" + s + "'");
  return int(v);
}

bool to_bool(const std::string& key, const std::string& s) {
  if (s == "true" || s == "1" || s == "yes" || s == "on")
    return true;
  if (s == "false" || s == "0" || s == "no" || s == "off")
    return false;
  throw ConfigError(key + ": expected a boolean, got '" + s + "'");
}

struct Key {
  std::string name;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};


template <class Ref>
Key number(const std::string& name, Ref ref) {
  return {name, [ref](const RunConfig& c) { return fmt(*ref(const_cast<RunConfig&>(c))); },
          [ref, name](RunConfig& c, const std::string& s) { *ref(c) = to_double(name, s); }};
}
template <class Ref>
Key integer(const std::string& name, Ref ref) {
  return {name, [ref](const RunConfig& c) { return std::to_string(*ref(const_cast<RunConfig&>(c))); },
          [ref, name](RunConfig& c, const std::string& s) { *ref(c) = to_int(name, s); }};
}
template <class Ref>
Key boolean(const std::string& name, Ref ref) {
  return {name, [ref](const RunConfig& c) { return std::string(*ref(const_cast<RunConfig&>(c)) ? "true" : "false"); },
          [ref, name](RunConfig& c, const std::string& s) { *ref(c) = to_bool(name, s); }};
}
template <class Ref>
Key text(const std::string& name, Ref ref) {
  return {name, [ref](const RunConfig& c) { return *ref(const_cast<RunConfig&>(c)); },
          [ref](RunConfig& c, const std::string& s) { *ref(c) = s; }};
}

const std::vector<Key>& keys() {
  static const std::vector<Key> k = {
      {"case.kind", [](const RunConfig& c) { return to_string(c.kind); },
       [](RunConfig& c, const std::string& s) { c.kind = case_kind_from_string(s); }},
      {"case.dim", [](const RunConfig& c) { return std::to_string(c.dim); },
       [](RunConfig& c, const std::string& s) {
         c.dim = to_int("case.dim", s);
         c.hill.dim = c.dim;
         c.manufactured.dim = c.dim;
       }},
      integer("case.degree", [](RunConfig& c) { return &c.degree; }),
      integer("case.geometric_degree", [](RunConfig& c) { return &c.geometric_degree; }),
      integer("case.quadrature_points", [](RunConfig& c) { return &c.quadrature_points; }),
      number("case.h_c", [](RunConfig& c) { return &c.hill.h_c; }),
      number("case.a_c", [](RunConfig& c) { return &c.hill.a_c; }),
      number("case.x_c", [](RunConfig& c) { return &c.hill.x_c; }),
      number("case.y_c", [](RunConfig& c) { return &c.hill.y_c; }),
      number("case.N", [](RunConfig& c) { return &c.hill.N; }),
      number("case.u_bar", [](RunConfig& c) { return &c.hill.u_bar; }),
      number("case.p_ref", [](RunConfig& c) { return &c.hill.p_ref; }),
      number("case.T_ref", [](RunConfig& c) { return &c.hill.T_ref; }),
      number("case.extent_x", [](RunConfig& c) { return &c.hill.extents[0]; }),
      number("case.extent_y", [](RunConfig& c) { return &c.hill.extents[1]; }),
      number("case.extent_z", [](RunConfig& c) { return &c.hill.extents[2]; }),
      number("case.mms_length", [](RunConfig& c) { return &c.manufactured.L; }),
      number("case.mms_omega", [](RunConfig& c) { return &c.manufactured.omega; }),
      number("case.mms_amplitude_rho", [](RunConfig& c) { return &c.manufactured.a_rho; }),
      number("case.mms_amplitude_u", [](RunConfig& c) { return &c.manufactured.a_u; }),
      number("case.mms_amplitude_p", [](RunConfig& c) { return &c.manufactured.a_p; }),
      integer("case.seed", [](RunConfig& c) { return &c.seed; }),
      boolean("boundary.lateral_farfield", [](RunConfig& c) { return &c.lateral_farfield; }),
      boolean("boundary.sponge", [](RunConfig& c) { return &c.sponge; }),
      number("boundary.sponge_top_depth", [](RunConfig& c) { return &c.sponge_cfg.top_depth; }),
      number("boundary.sponge_lateral_width", [](RunConfig& c) { return &c.sponge_cfg.lateral_width; }),
      number("boundary.sponge_sigma_max", [](RunConfig& c) { return &c.sponge_cfg.sigma_max; }),
      integer("mesh.roots_x", [](RunConfig& c) { return &c.mesh.roots[0]; }),
      integer("mesh.roots_y", [](RunConfig& c) { return &c.mesh.roots[1]; }),
      integer("mesh.roots_z", [](RunConfig& c) { return &c.mesh.roots[2]; }),
      integer("mesh.level", [](RunConfig& c) { return &c.mesh.level; }),
      integer("mesh.refine_levels", [](RunConfig& c) { return &c.mesh.refine_levels; }),
      number("mesh.refine_x0", [](RunConfig& c) { return &c.mesh.refine_lower[0]; }),
      number("mesh.refine_x1", [](RunConfig& c) { return &c.mesh.refine_upper[0]; }),
      number("mesh.refine_y0", [](RunConfig& c) { return &c.mesh.refine_lower[1]; }),
      number("mesh.refine_y1", [](RunConfig& c) { return &c.mesh.refine_upper[1]; }),
      number("mesh.refine_z0", [](RunConfig& c) { return &c.mesh.refine_lower[2]; }),
      number("mesh.refine_z1", [](RunConfig& c) { return &c.mesh.refine_upper[2]; }),
      number("time.dt", [](RunConfig& c) { return &c.dt; }),
      number("time.final_time", [](RunConfig& c) { return &c.final_time; }),
      integer("time.max_steps", [](RunConfig& c) { return &c.max_steps; }),
      text("time.scheme", [](RunConfig& c) { return &c.scheme; }),
      number("solver.picard_tol", [](RunConfig& c) { return &c.solver.picard_tol; }),
      integer("solver.picard_max", [](RunConfig& c) { return &c.solver.picard_max; }),
      number("solver.krylov_tol", [](RunConfig& c) { return &c.solver.krylov_tol; }),
      integer("solver.krylov_restart", [](RunConfig& c) { return &c.solver.krylov_restart; }),
      integer("solver.krylov_max", [](RunConfig& c) { return &c.solver.krylov_max; }),
      text("solver.gravity", [](RunConfig& c) { return &c.gravity; }),
      boolean("solver.preconditioner", [](RunConfig& c) { return &c.solver.preconditioner; }),
      integer("solver.preconditioner_refresh", [](RunConfig& c) { return &c.solver.preconditioner_refresh; }),
      integer("run.workers", [](RunConfig& c) { return &c.workers; }),
      text("output.directory", [](RunConfig& c) { return &c.output.directory; }),
      text("output.name", [](RunConfig& c) { return &c.output.name; }),
      integer("output.diagnostics_every", [](RunConfig& c) { return &c.output.diagnostics_every; }),
      integer("output.snapshot_every", [](RunConfig& c) { return &c.output.snapshot_every; }),
      boolean("output.vtk", [](RunConfig& c) { return &c.output.vtk; }),
      boolean("output.timings", [](RunConfig& c) { return &c.output.timings; }),
  };
  return k;
}

} // namespace

RunConfig preset_config(const std::string& name) {
  RunConfig c;
  c.preset = name;
  if (name == "paper2d") {
    c.hill = HillCaseConfig::paper2d();
    c.mesh.roots = {15, 4, 1};
    c.mesh.level = 1;
  } else if (name == "paper3d" || name == "paper3d-small") {
    c.dim = 3;
    c.hill = HillCaseConfig::paper3d();
    c.mesh.roots = {15, 10, 4};
    c.mesh.level = name == "paper3d" ? 2 : 0;
    if (name == "paper3d-small") {
      c.degree = c.geometric_degree = 3;
      c.dt = 4.0;
      c.final_time = 120.0;
    }
  } else if (name == "hydrostatic-rest") {
    c.kind = CaseKind::Rest;
    c.hill = HillCaseConfig::hydrostatic_rest();
    c.mesh.roots = {15, 4, 1};
    c.mesh.level = 1;
    c.lateral_farfield = false;
    c.sponge = false;
  } else if (name == "manufactured") {
    c.kind = CaseKind::Manufactured;
    c.mesh.roots = {8, 8, 1};
    c.mesh.level = 0;
    c.dt = 0.01;
    c.final_time = 0.1;
    c.lateral_farfield = false;
    c.sponge = false;
    c.solver.picard_tol = 1e-10;
    c.solver.picard_max = 30;
    c.solver.krylov_tol = 1e-12;
  } else {
    throw ConfigError("case.preset: unknown preset '" + name + "'");
  }
  c.hill.dim = c.dim;
  c.manufactured.dim = c.dim;
  c.dt = name == "manufactured" || name == "paper3d-small" ? c.dt : c.hill.dt;
  if (name != "manufactured" && name != "paper3d-small")
    c.final_time = c.hill.T_f;
  c.output.name = name;
  return c;
}

RunConfig parse_config(std::istream& is) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(is, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  const std::string preset = tree.get<std::string>("case.preset", "paper2d");
  RunConfig cfg = preset_config(preset);
  // dim first: other keys may depend on it.
  if (auto d = tree.get_optional<std::string>("case.dim"))
    keys()[1].set(cfg, *d);
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw ConfigError("config: key '" + section + "' outside a section");
    for (const auto& [key, value] : body) {
      const std::string full = section + "." + key;
      if (full == "case.preset" || full == "case.dim")
        continue;
      bool found = false;
      for (const Key& k : keys())
        if (k.name == full) {
          k.set(cfg, value.data());
          found = true;
          break;
        }
      if (!found)
        throw ConfigError("config: unknown key '" + full + "'");
    }
  }
  cfg.validate();
  return cfg;
}

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  for (const Key& k : keys())
    if (k.name == key) {
      k.set(cfg, value);
      return;
    }
  throw ConfigError("config: unknown key '" + key + "'");
}

RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is)
    throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(is);
}

void write_config(std::ostream& os, const RunConfig& cfg) {
  std::string section;
  os << "[case]\npreset = " << cfg.preset << "\n";
  section = "case";
  for (const Key& k : keys()) {
    const std::string s = k.name.substr(0, k.name.find('.'));
    if (s != section) {
      os << "\n[" << s << "]\n";
      section = s;
    }
    os << k.name.substr(k.name.find('.') + 1) << " = " << k.get(cfg) << "\n";
  }
}

std::string resolve_output_directory(const OutputSpec& out) {
  if (!out.directory.empty())
    return out.directory;
  if (const char* env = std::getenv("NCDG_OUTPUT_DIR"); env && *env)
    return env;
  return "output";
}

} // namespace ncdg
