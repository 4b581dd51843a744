#include "ncdg/runner/run.hpp"

#include "ncdg/common/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace ncdg {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::array<bool, 3> periodicity(const RunConfig& cfg) {
  if (cfg.kind == CaseKind::Manufactured)
    return {true, true, cfg.dim == 3};
  return {false, false, false};
}

bool inside_box(const LeafBox& b, const MeshSpec& m, int dim) {
  for (int a = 0; a < dim; ++a) {
    const double tol = 1e-9 * std::max(1.0, std::abs(b.upper[a]));
    if (b.lower[a] < m.refine_lower[a] - tol || b.upper[a] > m.refine_upper[a] + tol)
      return false;
  }
  return true;
}

} // namespace

ForestMesh build_mesh(const RunConfig& cfg) {
  std::array<int, 3> roots = cfg.mesh.roots;
  if (cfg.dim == 2)
    roots[2] = 1;
  ForestMesh m = build_uniform_mesh(cfg.dim, cfg.extents(), roots, periodicity(cfg));
  if (cfg.mesh.level > 0)
    m = refine_region(m, [](const LeafBox&) { return true; }, cfg.mesh.level);
  const int base = cfg.mesh.level;
  for (int l = 0; l < cfg.mesh.refine_levels; ++l)
    m = refine_region(m, [&](const LeafBox& b) { return b.level == base + l && inside_box(b, cfg.mesh, cfg.dim); });
  return m;
}

Discretisation Discretisation::build(const RunConfig& cfg) { return from_mesh(cfg, build_mesh(cfg)); }

Discretisation Discretisation::from_mesh(const RunConfig& cfg, ForestMesh mesh) {
  Discretisation d;
  d.mesh = std::make_unique<ForestMesh>(std::move(mesh));
  d.basis = std::make_unique<ReferenceBasis>(cfg.degree, cfg.quadrature_points);
  if (cfg.kind == CaseKind::Hill) {
    const HillCaseConfig hill = cfg.hill;
    d.mapping = std::make_unique<TerrainMapping>(
        *d.mesh, [hill](double x, double y) { return hill_profile(x, y, hill); }, hill.height(),
        cfg.geometric_degree);
  } else {
    d.mapping = std::make_unique<TerrainMapping>(*d.mesh);
  }
  d.geo = std::make_unique<MeshGeometry>(*d.mesh, *d.basis, *d.mapping);
  return d;
}

namespace {

PhysicalConstants constants_of(const RunConfig& cfg) {
  return cfg.kind == CaseKind::Manufactured ? cfg.manufactured.constants() : cfg.hill.constants;
}

BoundaryConditions boundaries_of(const RunConfig& cfg) {
  BoundaryConditions bc;
  if (cfg.kind != CaseKind::Manufactured && cfg.lateral_farfield)
    for (int a = 0; a + 1 < cfg.dim; ++a)
      bc.kind[2 * a] = bc.kind[2 * a + 1] = BoundaryKind::FarField;
  return bc;
}

// Node index sets used by the diagnostics probes.
struct Probes {
  std::vector<std::pair<int, int>> sponge_base, interface;
};

Probes make_probes(const RunConfig& cfg, const MeshGeometry& geo) {
  Probes p;
  const ForestMesh& mesh = geo.mesh();
  const int d = geo.dim(), nn = geo.nodes_per_leaf(), nfq = geo.qpoints_per_face();
  if (cfg.kind != CaseKind::Manufactured && cfg.sponge && cfg.sponge_cfg.top_depth > 0) {
    const double base = cfg.hill.height() - cfg.sponge_cfg.top_depth;
    for (int e = 0; e < mesh.num_leaves(); ++e) {
      auto xs = geo.node_coords(e);
      for (int i = 0; i < nn; ++i) {
        const double z = xs[i * d + d - 1];
        if (z <= base && z >= base - 1000.0)
          p.sponge_base.push_back({e, i});
      }
    }
  }
  std::vector<std::array<double, 3>> pts;
  for (int e = 0; e < mesh.num_leaves(); ++e) {
    const auto slots = mesh.slots(e);
    for (std::size_t s = 0; s < slots.size(); ++s)
      if (mesh.faces()[slots[s].face].kind == FaceKind::Hanging) {
        auto fc = geo.face_coords(mesh.slot_offset(e) + int(s));
        for (int q = 0; q < nfq; ++q) {
          std::array<double, 3> x{0, 0, 0};
          for (int a = 0; a < d; ++a)
            x[a] = fc[q * d + a];
          pts.push_back(x);
        }
      }
  }
  if (!pts.empty())
    for (int e = 0; e < mesh.num_leaves(); ++e) {
      auto xs = geo.node_coords(e);
      for (int i = 0; i < nn; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& x : pts) {
          double r2 = 0.0;
          for (int a = 0; a < d; ++a)
            r2 += (xs[i * d + a] - x[a]) * (xs[i * d + a] - x[a]);
          best = std::min(best, r2);
        }
        if (best <= 1000.0 * 1000.0)
          p.interface.push_back({e, i});
      }
    }
  return p;
}

double max_w(const Field& U, int d, const std::vector<std::pair<int, int>>* nodes) {
  double m = 0.0;
  if (nodes) {
    for (auto [e, i] : *nodes)
      m = std::max(m, std::abs(U.var(e, d)[i] / U.var(e, 0)[i]));
    return m;
  }
  for (int e = 0; e < U.leaves(); ++e)
    for (int i = 0; i < U.nodes(); ++i)
      m = std::max(m, std::abs(U.var(e, d)[i] / U.var(e, 0)[i]));
  return m;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream os(path);
  if (!os)
    throw InputError("cannot write '" + path + "'");
  os << content;
  if (!os)
    throw InputError("write failed for '" + path + "'");
}

} // namespace

RunResult run(const RunConfig& cfg, const RunOptions& opt) {
  const auto t_setup = Clock::now();
  cfg.validate();
  RunResult res;
  auto disc = std::make_shared<Discretisation>(Discretisation::build(cfg));
  const MeshGeometry& geo = *disc->geo;
  const int d = cfg.dim;
  res.leaves = disc->mesh->num_leaves();
  res.dofs_per_variable = disc->dofs_per_variable();

  const Partition part = partition_leaves(*disc->mesh, cfg.workers);
  WorkerPool pool(cfg.workers);
  DGOperator op(geo, part, pool, boundaries_of(cfg));
  BlockTimer timer;
  op.set_timer(&timer);
  const PhysicalConstants constants = constants_of(cfg);
  const EquationCoefficients eq =
      cfg.kind == CaseKind::Manufactured ? cfg.manufactured.eq : EquationCoefficients::dimensional(constants);
  SplitOperators S(op, eq, constants);
  S.set_implicit_gravity(cfg.gravity == "implicit");
  Field U;
  if (cfg.kind == CaseKind::Manufactured) {
    S.set_gravity(false);
    S.set_source(manufactured_source(geo, cfg.manufactured));
    U = manufactured_field(geo, 0.0, cfg.manufactured);
  } else {
    const Field bg = hydrostatic_field(geo, cfg.hill);
    S.set_background(bg);
    if (cfg.sponge)
      S.set_sponge(sponge_field(geo, cfg.hill.extents, cfg.sponge_cfg));
    U = bg;
  }
  std::unique_ptr<ImexIntegrator> imex;
  if (cfg.scheme == "ars222")
    imex = std::make_unique<ImexIntegrator>(S, ButcherTableau::ars222(), cfg.solver);
  const Probes probes = make_probes(cfg, geo);

  std::string dir;
  if (opt.write_files) {
    dir = resolve_output_directory(cfg.output);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
      throw InputError("cannot create output directory '" + dir + "': " + ec.message());
    std::ostringstream os;
    write_config(os, cfg);
    const std::string path = dir + "/" + cfg.output.name + ".cfg";
    write_text_file(path, os.str());
    res.artifacts.push_back(path);
  }
  res.output_directory = dir;

  const double m0 = integrate_conserved(geo, U)[0];
  double outflow = 0.0;
  auto record = [&](int step, double t, const Field& X, int pic, int kry) {
    DiagnosticsRow r;
    r.step = step;
    r.t = t;
    r.mass = integrate_conserved(geo, X)[0];
    r.mass_drift = (r.mass - m0) / m0;
    r.mass_defect = (r.mass - m0 + outflow) / m0;
    r.max_w = cfg.kind == CaseKind::Manufactured ? 0.0 : max_w(X, d, nullptr);
    r.w_sponge_base = probes.sponge_base.empty() ? 0.0 : max_w(X, d, &probes.sponge_base);
    r.w_interface = probes.interface.empty() ? 0.0 : max_w(X, d, &probes.interface);
    r.picard = pic;
    r.krylov = kry;
    res.diagnostics.push_back(r);
  };
  auto snapshot = [&](const std::string& tag, const Field& X, double t) {
    if (!opt.write_files)
      return;
    ScopedBlock sb(&timer, Block::Output);
    std::ostringstream os;
    write_snapshot(os, cfg, *disc->mesh, X, t);
    const std::string path = dir + "/" + cfg.output.name + "_" + tag + ".snap";
    write_text_file(path, os.str());
    res.artifacts.push_back(path);
    if (cfg.output.vtk) {
      const std::string vtk = dir + "/" + cfg.output.name + "_" + tag + ".vtk";
      write_field_vtk(vtk, geo, X, constants);
      res.artifacts.push_back(vtk);
    }
  };
  record(0, 0.0, U, 0, 0);

  double T_f = cfg.final_time;
  if (cfg.max_steps > 0)
    T_f = std::min(T_f, cfg.max_steps * cfg.dt);
  StepFunction step = [&](double t, double dt, Field& X) -> StepStats {
    if (imex)
      return imex->step(t, dt, X);
    rk4_step(S, t, dt, X);
    check_positivity(X, constants, eq.kinetic);
    StepStats st;
    st.t = t;
    st.dt = dt;
    return st;
  };
  res.setup_seconds = seconds_since(t_setup);
  timer.reset();
  const auto t_loop = Clock::now();
  auto last = t_loop;
  auto prev_blocks = timer.totals();
  const int expected_steps = int(std::ceil(T_f / cfg.dt - 1e-10));
  StepCallback cb = [&](int n, double t, const Field& X, const StepStats& st) {
    outflow += st.boundary_mass;
    if (n % cfg.output.diagnostics_every == 0 || n == expected_steps)
      record(n, t, X, st.total_picard(), st.total_krylov());
    if (cfg.output.snapshot_every > 0 && n % cfg.output.snapshot_every == 0) {
      char tag[32];
      std::snprintf(tag, sizeof tag, "step%06d", n);
      snapshot(tag, X, t);
    }
    const auto now = Clock::now();
    const auto blocks = timer.totals();
    std::array<double, static_cast<int>(Block::Count) + 1> row{};
    for (int b = 0; b < static_cast<int>(Block::Count); ++b)
      row[b] = blocks[b] - prev_blocks[b];
    row.back() = std::chrono::duration<double>(now - last).count();
    res.timers.per_step.push_back(row);
    prev_blocks = blocks;
    last = now;
  };
  const TimeLoopResult loop = run_time_loop(U, cfg.dt, T_f, step, cb, false);
  res.steps = loop.steps;
  res.t_final = loop.t_final;
  if (loop.failed) {
    res.exit_status = 1;
    res.error = loop.error;
  }
  snapshot("final", U, loop.t_final);
  res.timers.blocks = timer.totals();
  res.timers.total = seconds_since(t_loop);

  if (opt.write_files) {
    std::ostringstream os;
    write_diagnostics_csv(os, res.diagnostics);
    const std::string path = dir + "/" + cfg.output.name + "_diagnostics.csv";
    write_text_file(path, os.str());
    res.artifacts.push_back(path);
    if (cfg.output.timings) {
      std::ostringstream ts;
      write_timings_csv(ts, res.timers);
      const std::string tp = dir + "/" + cfg.output.name + "_timings.csv";
      write_text_file(tp, ts.str());
      res.artifacts.push_back(tp);
    }
  }
  if (opt.keep_state) {
    res.disc = disc;
    res.state = std::move(U);
  }
  return res;
}

void write_diagnostics_csv(std::ostream& os, const std::vector<DiagnosticsRow>& rows) {
  os << "step,t,mass,mass_drift,mass_defect,max_w,w_sponge_base,w_interface,picard,krylov\n";
  char buf[512];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%d\n", r.step, r.t, r.mass,
                  r.mass_drift, r.mass_defect, r.max_w, r.w_sponge_base, r.w_interface, r.picard, r.krylov);
    os << buf;
  }
}

void write_timings_csv(std::ostream& os, const TimerReport& t) {
  os << "step";
  for (auto n : kBlockNames)
    os << "," << n;
  os << ",total\n";
  os << std::setprecision(9);
  for (std::size_t s = 0; s < t.per_step.size(); ++s) {
    os << s + 1;
    for (double v : t.per_step[s])
      os << "," << v;
    os << "\n";
  }
  os << "all";
  for (double v : t.blocks)
    os << "," << v;
  os << "," << t.total << "\n";
}

void write_snapshot(std::ostream& os, const RunConfig& cfg, const ForestMesh& mesh, const Field& U, double t) {
  std::ostringstream cs;
  write_config(cs, cfg);
  const std::string ctext = cs.str();
  os << "ncdg-snapshot 1\n";
  os << "t " << std::setprecision(17) << t << "\n";
  os << "config " << ctext.size() << "\n" << ctext;
  os << "mesh\n";
  write_mesh(os, mesh);
  os << "field " << U.nvar() << " " << U.leaves() << " " << U.nodes() << "\n";
  char buf[32];
  for (std::size_t k = 0; k < U.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g\n", U.values()[k]);
    os << buf;
  }
  if (!os)
    throw InputError("snapshot write failed");
}

Snapshot read_snapshot(std::istream& is) {
  std::string tag;
  int version = 0;
  if (!(is >> tag >> version) || tag != "ncdg-snapshot" || version != 1)
    throw InputError("not a snapshot file (or unsupported version)");
  Snapshot s;
  std::size_t nbytes = 0;
  if (!(is >> tag >> s.t) || tag != "t" || !(is >> tag >> nbytes) || tag != "config")
    throw InputError("snapshot: malformed header");
  is.get();
  std::string ctext(nbytes, '\0');
  is.read(ctext.data(), std::streamsize(nbytes));
  std::istringstream cs(ctext);
  s.config = parse_config(cs);
  if (!(is >> tag) || tag != "mesh")
    throw InputError("snapshot: missing mesh section");
  is.get();
  ForestMesh mesh = read_mesh(is);
  auto disc = std::make_shared<Discretisation>(Discretisation::from_mesh(s.config, std::move(mesh)));
  int nvar = 0, nl = 0, nn = 0;
  if (!(is >> tag >> nvar >> nl >> nn) || tag != "field")
    throw InputError("snapshot: missing field section");
  if (nl != disc->mesh->num_leaves() || nn != disc->geo->nodes_per_leaf())
    throw InputError("snapshot: field does not match its mesh");
  s.field = Field(*disc->geo, nvar);
  for (double& v : s.field.values())
    if (!(is >> v))
      throw InputError("snapshot: truncated field data");
  s.disc = disc;
  return s;
}

Snapshot load_snapshot(const std::string& path) {
  std::ifstream is(path);
  if (!is)
    throw InputError("cannot open snapshot '" + path + "'");
  return read_snapshot(is);
}

double derived_variable(const double* U, int dim, const std::string& name, const PhysicalConstants& c) {
  if (name == "rho")
    return U[0];
  if (name == "u")
    return U[1] / U[0];
  if (name == "v") {
    if (dim != 3)
      throw UsageError("variable 'v' needs a 3D field");
    return U[2] / U[0];
  }
  if (name == "w")
    return U[dim] / U[0];
  if (name == "E")
    return U[dim + 1];
  const PrimitiveState W = conserved_to_primitive(U, dim, c);
  if (name == "p")
    return W.p;
  if (name == "T")
    return W.T;
  if (name == "theta")
    return W.T * std::pow(1e5 / W.p, c.Gamma());
  throw UsageError("unknown variable '" + name + "'");
}

Slice extract_slice(const MeshGeometry& geo, const Field& U, int axis, double coordinate, const std::string& variable,
                    int samples, const PhysicalConstants& c) {
  const int d = geo.dim();
  if (axis < 0 || axis >= d)
    throw UsageError("slice axis out of range");
  if (samples < 2)
    throw UsageError("slice needs at least two samples per axis");
  const auto& ext = geo.mesh().extents();
  if (!(coordinate >= 0.0 && coordinate <= ext[axis]))
    throw UsageError("slice plane lies outside the domain");
  Slice s;
  s.axis = axis;
  s.coordinate = coordinate;
  s.variable = variable;
  int k = 0;
  for (int a = 0; a < d; ++a)
    if (a != axis)
      s.plane_axes[k++] = a;
  s.counts = {samples, d == 3 ? samples : 1};
  std::vector<double> vals(U.nvar());
  for (int j = 0; j < s.counts[1]; ++j)
    for (int i = 0; i < s.counts[0]; ++i) {
      std::array<double, 3> x{0, 0, 0};
      x[axis] = coordinate;
      x[s.plane_axes[0]] = ext[s.plane_axes[0]] * i / (samples - 1);
      if (d == 3)
        x[s.plane_axes[1]] = ext[s.plane_axes[1]] * j / (samples - 1);
      s.points.push_back(x);
      const auto hit = geo.locate(x);
      if (!hit) {
        s.values.push_back(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      evaluate_at(geo, U, hit->first, hit->second, vals.data());
      s.values.push_back(derived_variable(vals.data(), d, variable, c));
    }
  // Unknown names fail even when no point was inside.
  if (s.values.empty() || std::all_of(s.values.begin(), s.values.end(), [](double v) { return std::isnan(v); })) {
    double probe[5] = {1, 0, 0, 0, 1};
    derived_variable(probe, d, variable, c);
  }
  return s;
}

void write_slice_csv(std::ostream& os, const Slice& s) {
  const char* names = "xyz";
  const int d = int(s.points.empty() ? 2 : (s.counts[1] > 1 ? 3 : 2));
  for (int a = 0; a < d; ++a)
    os << names[a] << ",";
  os << s.variable << "\n";
  char buf[64];
  for (std::size_t k = 0; k < s.points.size(); ++k) {
    for (int a = 0; a < d; ++a) {
      std::snprintf(buf, sizeof buf, "%.17g,", s.points[k][a]);
      os << buf;
    }
    std::snprintf(buf, sizeof buf, "%.17g\n", s.values[k]);
    os << buf;
  }
}

void write_field_vtk(const std::string& path, const MeshGeometry& geo, const Field& U, const PhysicalConstants& c) {
  std::ofstream os(path);
  if (!os)
    throw InputError("cannot write '" + path + "'");
  const int d = geo.dim(), nn = geo.nodes_per_leaf(), n = geo.basis().n(), r = n - 1;
  const int nl = U.leaves();
  const long npts = long(nl) * nn;
  const int sub = d == 2 ? r * r : r * r * r;
  const long ncells = long(nl) * sub;
  os << "# vtk DataFile Version 3.0\nncdg field\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << npts << " double\n";
  char buf[128];
  for (int e = 0; e < nl; ++e) {
    auto xs = geo.node_coords(e);
    for (int i = 0; i < nn; ++i) {
      std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", xs[i * d], xs[i * d + 1], d == 3 ? xs[i * d + 2] : 0.0);
      os << buf;
    }
  }
  const int per = d == 2 ? 4 : 8;
  os << "CELLS " << ncells << " " << ncells * (per + 1) << "\n";
  for (int e = 0; e < nl; ++e) {
    const long o = long(e) * nn;
    auto id = [&](int i, int j, int k) { return o + i + n * (j + n * k); };
    for (int k = 0; k < (d == 3 ? r : 1); ++k)
      for (int j = 0; j < r; ++j)
        for (int i = 0; i < r; ++i) {
          if (d == 2)
            os << "4 " << id(i, j, 0) << " " << id(i + 1, j, 0) << " " << id(i + 1, j + 1, 0) << " "
               << id(i, j + 1, 0) << "\n";
          else
            os << "8 " << id(i, j, k) << " " << id(i + 1, j, k) << " " << id(i + 1, j + 1, k) << " "
               << id(i, j + 1, k) << " " << id(i, j, k + 1) << " " << id(i + 1, j, k + 1) << " "
               << id(i + 1, j + 1, k + 1) << " " << id(i, j + 1, k + 1) << "\n";
        }
  }
  os << "CELL_TYPES " << ncells << "\n";
  for (long k = 0; k < ncells; ++k)
    os << (d == 2 ? 9 : 12) << "\n";
  os << "POINT_DATA " << npts << "\n";
  std::vector<double> u(U.nvar());
  auto scalar = [&](const std::string& name) {
    os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (int e = 0; e < nl; ++e)
      for (int i = 0; i < nn; ++i) {
        for (int v = 0; v < U.nvar(); ++v)
          u[v] = U.var(e, v)[i];
        std::snprintf(buf, sizeof buf, "%.17g\n", derived_variable(u.data(), d, name, c));
        os << buf;
      }
  };
  scalar("rho");
  scalar("p");
  scalar("T");
  scalar("theta");
  scalar("w");
  os << "VECTORS velocity double\n";
  for (int e = 0; e < nl; ++e)
    for (int i = 0; i < nn; ++i) {
      const double rho = U.var(e, 0)[i];
      std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", U.var(e, 1)[i] / rho, U.var(e, 2)[i] / rho,
                    d == 3 ? U.var(e, 3)[i] / rho : 0.0);
      os << buf;
    }
  if (!os)
    throw InputError("write failed for '" + path + "'");
}

std::string mesh_info(const RunConfig& cfg) {
  cfg.validate();
  const Discretisation disc = Discretisation::build(cfg);
  const ForestMesh& m = *disc.mesh;
  std::vector<int> per_level(m.max_level() + 1, 0);
  for (const Leaf& l : m.leaves())
    ++per_level[l.level];
  std::ostringstream os;
  os << "dim " << m.dim() << "\nleaves " << m.num_leaves() << "\n";
  for (std::size_t l = 0; l < per_level.size(); ++l)
    os << "level " << l << " " << per_level[l] << "\n";
  os << "interior_faces " << m.num_interior_faces() << "\nboundary_faces " << m.num_boundary_faces()
     << "\nhanging_subfaces " << m.num_hanging_faces() << "\n";
  os << "degree " << cfg.degree << "\nnodes_per_leaf " << disc.geo->nodes_per_leaf() << "\n";
  os << "dofs_per_variable " << disc.dofs_per_variable() << "\nunknowns " << disc.dofs_per_variable() * (cfg.dim + 2)
     << "\n";
  os << "min_diameter " << disc.geo->min_diameter() << "\n";
  if (cfg.kind != CaseKind::Manufactured) {
    const Field U = hydrostatic_field(*disc.geo, cfg.hill);
    const CourantReport c = courant_numbers(U, *disc.geo, cfg.dt, cfg.degree, cfg.hill.constants);
    os << "courant_acoustic " << c.acoustic << "\ncourant_advective " << c.advective << "\n";
  }
  return os.str();
}

} // namespace ncdg
