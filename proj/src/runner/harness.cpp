#include "ncdg/runner/harness.hpp"

#include "ncdg/common/errors.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace ncdg {

RunConfig weak_scaled(const RunConfig& base, int workers) {
  RunConfig c = base;
  const double f = workers;
  c.mesh.roots[0] *= workers;
  if (c.kind == CaseKind::Manufactured) {
    // Periodic box: refine the whole grid instead of stretching it (length is shared by all axes).
    return c;
  }
  c.hill.extents[0] *= f;
  c.hill.x_c *= f;
  c.mesh.refine_lower[0] *= f;
  c.mesh.refine_upper[0] *= f;
  return c;
}

std::vector<ScalingRow> scaling_harness(const RunConfig& base, const std::vector<int>& workers, ScalingMode mode,
                                        const std::string& label) {
  if (workers.empty())
    throw UsageError("scaling harness needs at least one worker count");
  for (std::size_t k = 0; k < workers.size(); ++k)
    if (workers[k] < 1 || (k > 0 && workers[k] <= workers[k - 1]))
      throw UsageError("worker counts must be >= 1 and ascending");
  std::vector<ScalingRow> rows;
  double t1 = 0.0;
  for (int P : workers) {
    RunConfig c = mode == ScalingMode::Weak ? weak_scaled(base, P) : base;
    c.workers = P;
    ScalingRow row;
    row.label = label;
    row.workers = P;
    try {
      RunOptions opt;
      opt.write_files = false;
      const RunResult r = run(c, opt);
      row.leaves = r.leaves;
      row.dofs_per_variable = r.dofs_per_variable;
      row.steps = r.steps;
      row.seconds = r.timers.total;
      row.blocks = r.timers.blocks;
      if (r.exit_status != 0) {
        row.failed = true;
        row.error = r.error;
      }
    } catch (const std::exception& e) {
      row.failed = true;
      row.error = e.what();
    }
    if (rows.empty())
      t1 = row.seconds;
    if (!row.failed && row.seconds > 0.0 && t1 > 0.0) {
      if (mode == ScalingMode::Strong) {
        row.speedup = t1 / row.seconds;
        row.efficiency = row.speedup / P;
      } else {
        row.efficiency = t1 / row.seconds;
        row.speedup = P * row.efficiency;
      }
    } else if (row.failed) {
      row.speedup = row.efficiency = 0.0;
    }
    if (rows.empty() && !row.failed)
      row.speedup = row.efficiency = 1.0;
    rows.push_back(row);
  }
  return rows;
}

void write_scaling_csv(std::ostream& os, const std::vector<ScalingRow>& rows) {
  os << "label,workers,leaves,dofs_per_variable,steps,seconds,speedup,efficiency";
  for (auto n : kBlockNames)
    os << "," << n;
  os << ",failed,error\n";
  for (const auto& r : rows) {
    os << r.label << "," << r.workers << "," << r.leaves << "," << r.dofs_per_variable << "," << r.steps << ","
       << r.seconds << "," << r.speedup << "," << r.efficiency;
    for (double b : r.blocks)
      os << "," << b;
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    os << "," << (r.failed ? 1 : 0) << "," << err << "\n";
  }
}

std::array<double, 3> finest_resolution(const RunConfig& cfg) {
  std::array<double, 3> h{0, 0, 0};
  const int top = cfg.mesh.level + cfg.mesh.refine_levels;
  const auto ext = cfg.extents();
  for (int a = 0; a < cfg.dim; ++a)
    h[a] = ext[a] / cfg.mesh.roots[a] / std::pow(2.0, top);
  return h;
}

bool grows_monotonically(const std::vector<double>& series, int samples) {
  const std::size_t n = series.size();
  if (n < 4)
    return false;
  const std::size_t first = n / 2;
  const std::size_t stride = std::max<std::size_t>(1, (n - first) / std::max(2, samples));
  double prev = series[first];
  int compared = 0;
  for (std::size_t k = first + stride; k < n; k += stride) {
    if (!(series[k] > prev))
      return false;
    prev = series[k];
    ++compared;
  }
  return compared > 0;
}

ComparisonReport efficiency_comparison(const RunConfig& uniform, const RunConfig& nonconforming) {
  const auto hu = finest_resolution(uniform), hn = finest_resolution(nonconforming);
  bool same = uniform.kind == nonconforming.kind && uniform.dim == nonconforming.dim &&
              uniform.degree == nonconforming.degree && uniform.dt == nonconforming.dt &&
              uniform.final_time == nonconforming.final_time && uniform.max_steps == nonconforming.max_steps &&
              uniform.mesh.roots == nonconforming.mesh.roots;
  for (int a = 0; a < uniform.dim; ++a)
    same = same && std::abs(hu[a] - hn[a]) <= 1e-9 * hu[a];
  if (!same)
    throw UsageError("comparison configs must share case, degree, dt, final time, root grid and finest resolution");

  ComparisonReport rep;
  RunOptions opt;
  opt.write_files = false;
  opt.keep_state = true;
  const RunResult ru = run(uniform, opt);
  const RunResult rn = run(nonconforming, opt);
  if (ru.exit_status != 0 || rn.exit_status != 0)
    rep.error = "run failed: " + (ru.exit_status ? ru.error : rn.error);
  rep.uniform_seconds = ru.timers.total;
  rep.nonconforming_seconds = rn.timers.total;
  rep.time_ratio = rn.timers.total / ru.timers.total;
  rep.uniform_dofs = ru.dofs_per_variable;
  rep.nonconforming_dofs = rn.dofs_per_variable;
  rep.dof_ratio = double(rn.dofs_per_variable) / double(ru.dofs_per_variable);

  // w at the interior Gauss points of the finest non-conforming leaves. Each
  // such point lies inside exactly one leaf of either mesh, so DG jumps across
  // faces do not enter the difference.
  const MeshGeometry& gn = *rn.disc->geo;
  const MeshGeometry& gu = *ru.disc->geo;
  const Field& Un = *rn.state;
  const Field& Uu = *ru.state;
  const int d = uniform.dim;
  const int top = gn.mesh().max_level();
  const auto& gp = gn.basis().qpoints();
  const int nq = int(gp.size());
  const int total = d == 2 ? nq * nq : nq * nq * nq;
  std::vector<double> vu(Uu.nvar()), vn(Un.nvar());
  for (int e = 0; e < gn.mesh().num_leaves(); ++e) {
    if (gn.mesh().leaf(e).level != top)
      continue;
    const LeafBox box = gn.mesh().box(e);
    for (int q = 0; q < total; ++q) {
      const std::array<double, 3> xi{gp[q % nq], gp[(q / nq) % nq], d == 3 ? gp[q / (nq * nq)] : 0.0};
      const std::array<double, 3> x = gn.mapping().map(box, xi);
      const auto hit = gu.locate(x);
      if (!hit)
        continue;
      evaluate_at(gu, Uu, hit->first, hit->second, vu.data());
      evaluate_at(gn, Un, e, xi, vn.data());
      const double wu = vu[d] / vu[0];
      const double wn = vn[d] / vn[0];
      rep.max_w_uniform = std::max(rep.max_w_uniform, std::abs(wu));
      rep.max_dw = std::max(rep.max_dw, std::abs(wu - wn));
      ++rep.sample_points;
    }
  }
  rep.agreement = rep.max_w_uniform > 0.0 ? rep.max_dw / rep.max_w_uniform : 0.0;
  std::vector<double> wi, ws;
  for (const auto& row : rn.diagnostics) {
    wi.push_back(row.w_interface);
    ws.push_back(row.w_sponge_base);
  }
  rep.interface_monotone_growth = grows_monotonically(wi);
  rep.sponge_monotone_growth = grows_monotonically(ws);
  return rep;
}

void write_comparison(std::ostream& os, const ComparisonReport& r) {
  os << "uniform_seconds " << r.uniform_seconds << "\nnonconforming_seconds " << r.nonconforming_seconds
     << "\ntime_ratio " << r.time_ratio << "\nuniform_dofs " << r.uniform_dofs << "\nnonconforming_dofs "
     << r.nonconforming_dofs << "\ndof_ratio " << r.dof_ratio << "\nmax_w_uniform " << r.max_w_uniform
     << "\nmax_dw " << r.max_dw << "\nagreement " << r.agreement << "\nsample_points " << r.sample_points
     << "\ninterface_monotone_growth " << (r.interface_monotone_growth ? "yes" : "no")
     << "\nsponge_monotone_growth " << (r.sponge_monotone_growth ? "yes" : "no") << "\n";
  if (!r.error.empty())
    os << "error " << r.error << "\n";
}

} // namespace ncdg
