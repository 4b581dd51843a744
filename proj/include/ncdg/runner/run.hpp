#pragma once

#include "ncdg/runner/config.hpp"

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace ncdg {

ForestMesh build_mesh(const RunConfig& cfg);

// Owns the mesh and everything that refers to it.
struct Discretisation {
  std::unique_ptr<ForestMesh> mesh;
  std::unique_ptr<ReferenceBasis> basis;
  std::unique_ptr<TerrainMapping> mapping;
  std::unique_ptr<MeshGeometry> geo;

  static Discretisation build(const RunConfig& cfg);
  static Discretisation from_mesh(const RunConfig& cfg, ForestMesh mesh);
  long dofs_per_variable() const { return long(mesh->num_leaves()) * geo->nodes_per_leaf(); }
};

struct DiagnosticsRow {
  int step = 0;
  double t = 0.0;
  double mass = 0.0;
  double mass_drift = 0.0;    // (M - M_0) / M_0
  double mass_defect = 0.0;   // (M - M_0 + boundary outflow) / M_0
  double max_w = 0.0;
  double w_sponge_base = 0.0;  // max |w| within 1 km below the top sponge
  double w_interface = 0.0;    // max |w| within 1 km of a resolution change
  int picard = 0;
  int krylov = 0;
};

struct TimerReport {
  std::array<double, static_cast<int>(Block::Count)> blocks{};
  double total = 0.0;
  std::vector<std::array<double, static_cast<int>(Block::Count) + 1>> per_step;  // blocks..., total
};

struct RunResult {
  int exit_status = 0;
  std::string error;
  int steps = 0;
  double t_final = 0.0;
  int leaves = 0;
  long dofs_per_variable = 0;
  std::vector<DiagnosticsRow> diagnostics;
  TimerReport timers;
  double setup_seconds = 0.0;
  std::string output_directory;
  std::vector<std::string> artifacts;
  // Final state, kept when requested.
  std::shared_ptr<const Discretisation> disc;
  std::optional<Field> state;
};

struct RunOptions {
  bool write_files = true;
  bool keep_state = false;
};

// Mesh build, initial condition, time loop, output. Errors during setup
// propagate; a failing time step is reported through exit_status/error with the
// partial diagnostics kept.
RunResult run(const RunConfig& cfg, const RunOptions& opt = {});

void write_diagnostics_csv(std::ostream& os, const std::vector<DiagnosticsRow>& rows);
void write_timings_csv(std::ostream& os, const TimerReport& t);

// Field plus the configuration needed to rebuild its geometry.
struct Snapshot {
  RunConfig config;
  double t = 0.0;
  std::shared_ptr<const Discretisation> disc;
  Field field;
};

void write_snapshot(std::ostream& os, const RunConfig& cfg, const ForestMesh& mesh, const Field& U, double t);
Snapshot read_snapshot(std::istream& is);
Snapshot load_snapshot(const std::string& path);

// Named derived variables: rho, u, v, w (vertical velocity), p, T, theta, E.
double derived_variable(const double* U, int dim, const std::string& name, const PhysicalConstants& c);

struct Slice {
  int axis = 0;  // normal axis of the plane
  double coordinate = 0.0;
  std::string variable;
  std::array<int, 2> counts{0, 0};  // samples along the in-plane axes (second is 1 in 2D)
  std::array<int, 2> plane_axes{0, 1};
  std::vector<std::array<double, 3>> points;
  std::vector<double> values;  // NaN where the point is outside the mapped domain
};

// Samples on a uniform grid of the plane x_axis = coordinate. Points on element
// boundaries take the value of the lowest-index containing leaf.
Slice extract_slice(const MeshGeometry& geo, const Field& U, int axis, double coordinate, const std::string& variable,
                    int samples, const PhysicalConstants& c);
void write_slice_csv(std::ostream& os, const Slice& s);

// Legacy VTK unstructured grid: each leaf subdivided at its nodes.
void write_field_vtk(const std::string& path, const MeshGeometry& geo, const Field& U, const PhysicalConstants& c);

std::string mesh_info(const RunConfig& cfg);

} // namespace ncdg
