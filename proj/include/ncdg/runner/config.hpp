#pragma once

#include "ncdg/cases/cases.hpp"
#include "ncdg/time/imex.hpp"

#include <array>
#include <iosfwd>
#include <string>

namespace ncdg {

enum class CaseKind { Hill, Rest, Manufactured };

std::string to_string(CaseKind k);
CaseKind case_kind_from_string(const std::string& s);

// Uniform base level over the root grid plus optional extra levels inside an
// axis-aligned box (reference coordinates, vertical axis last).
struct MeshSpec {
  std::array<int, 3> roots{15, 4, 1};
  int level = 1;
  int refine_levels = 0;
  std::array<double, 3> refine_lower{0, 0, 0};
  std::array<double, 3> refine_upper{0, 0, 0};
};

struct OutputSpec {
  std::string directory;  // empty: $NCDG_OUTPUT_DIR or "./output"
  std::string name = "run";
  int diagnostics_every = 1;
  int snapshot_every = 0;  // 0: final snapshot only
  bool vtk = false;
  bool timings = true;
};

struct RunConfig {
  std::string preset = "paper2d";
  CaseKind kind = CaseKind::Hill;
  int dim = 2;
  int degree = 4;
  int geometric_degree = 4;
  // Gauss points per axis for volume and face integrals; 0 means degree + 1.
  int quadrature_points = 0;
  HillCaseConfig hill;
  ManufacturedConfig manufactured;
  bool lateral_farfield = true;
  bool sponge = true;
  SpongeConfig sponge_cfg;
  MeshSpec mesh;
  double dt = 2.0;
  double final_time = 3600.0;
  int max_steps = 0;  // 0: run to final_time
  std::string scheme = "ars222";  // or "rk4"
  std::string gravity = "implicit";  // or "explicit"
  ImplicitSolveConfig solver;
  int workers = 1;
  unsigned seed = 1;
  OutputSpec output;

  // Domain extents of the active case.
  std::array<double, 3> extents() const;
  // Throws ConfigError naming the offending key.
  void validate() const;
};

// Named defaults: paper2d, paper3d, paper3d-small, hydrostatic-rest, manufactured.
RunConfig preset_config(const std::string& name);

// Sectioned key-value file ([case], [boundary], [mesh], [time], [solver], [run],
// [output]). `case.preset` selects the defaults every other key overrides.
RunConfig parse_config(std::istream& is);
RunConfig load_config(const std::string& path);
// Sets one "section.key" entry (no validation; call validate() afterwards).
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);
// Fully resolved configuration in the same format.
void write_config(std::ostream& os, const RunConfig& cfg);

// Output directory after applying the environment default.
std::string resolve_output_directory(const OutputSpec& out);

} // namespace ncdg
