#pragma once

#include "ncdg/runner/run.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace ncdg {

enum class ScalingMode { Strong, Weak };

struct ScalingRow {
  std::string label;
  int workers = 1;
  int leaves = 0;
  long dofs_per_variable = 0;
  int steps = 0;
  double seconds = 0.0;     // time-loop wall clock
  double speedup = 1.0;     // strong: T1/TP; weak: P T1/TP
  double efficiency = 1.0;  // strong: speedup/P; weak: T1/TP
  std::array<double, static_cast<int>(Block::Count)> blocks{};
  bool failed = false;
  std::string error;
};

// Problem for P workers in weak mode: the root grid and every horizontal
// coordinate along x are stretched by P.
RunConfig weak_scaled(const RunConfig& base, int workers);

// One fresh run per worker count (ascending, >= 1). Output files are not written.
std::vector<ScalingRow> scaling_harness(const RunConfig& base, const std::vector<int>& workers, ScalingMode mode,
                                        const std::string& label = "");
void write_scaling_csv(std::ostream& os, const std::vector<ScalingRow>& rows);

struct ComparisonReport {
  double uniform_seconds = 0.0;
  double nonconforming_seconds = 0.0;
  double time_ratio = 0.0;  // nonconforming / uniform
  long uniform_dofs = 0;
  long nonconforming_dofs = 0;
  double dof_ratio = 0.0;
  double max_w_uniform = 0.0;  // over the refined region
  double max_dw = 0.0;
  double agreement = 0.0;  // max_dw / max_w_uniform
  // |w| near internal resolution changes increases at every sample of the second half.
  bool interface_monotone_growth = false;
  bool sponge_monotone_growth = false;
  int sample_points = 0;
  std::string error;
};

// Finest leaf size of a configuration's mesh along every axis.
std::array<double, 3> finest_resolution(const RunConfig& cfg);

// Runs both configurations and compares w over the finest-level leaves of the
// non-conforming mesh. Throws UsageError when case, degree, dt, final time or
// finest resolution differ.
ComparisonReport efficiency_comparison(const RunConfig& uniform, const RunConfig& nonconforming);
void write_comparison(std::ostream& os, const ComparisonReport& r);

// True if the series strictly increases over its second half, sampled at
// about `samples` points.
bool grows_monotonically(const std::vector<double>& series, int samples = 16);

} // namespace ncdg
