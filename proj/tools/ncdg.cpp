#include "ncdg/common/errors.hpp"
#include "ncdg/runner/harness.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

using namespace ncdg;

namespace {

RunConfig configure(const std::string& path, const std::string& preset, const std::vector<std::string>& sets) {
  RunConfig cfg = path.empty() ? preset_config(preset.empty() ? "paper2d" : preset) : load_config(path);
  for (const std::string& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw UsageError("--set expects section.key=value, got '" + kv + "'");
    set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  cfg.validate();
  return cfg;
}

std::vector<int> parse_workers(const std::string& s) {
  std::vector<int> w;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    try {
      w.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw UsageError("--workers expects a comma-separated list of integers");
    }
  return w;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Non-conforming DG solver for atmospheric flows over orography"};
  app.require_subcommand(1);

  std::string config, preset, output;
  std::vector<std::string> sets;
  int workers = 0;
  auto common = [&](CLI::App* c, bool positional, bool worker_count = true) {
    if (positional)
      c->add_option("config", config, "configuration file (omit to use --preset)");
    c->add_option("--preset", preset, "preset when no file is given");
    c->add_option("--set", sets, "override section.key=value")->take_all();
    if (worker_count)
      c->add_option("--workers", workers, "worker threads");
    c->add_option("--output", output, "output directory");
  };

  auto* run_cmd = app.add_subcommand("run", "run a case");
  common(run_cmd, true);

  auto* scale_cmd = app.add_subcommand("scale", "strong or weak scaling study");
  common(scale_cmd, true, false);
  std::string mode = "strong", worker_list = "1,2,4,8", scale_csv;
  scale_cmd->add_option("--mode", mode, "strong|weak")->check(CLI::IsMember({"strong", "weak"}));
  scale_cmd->add_option("--workers", worker_list, "comma-separated worker counts");
  scale_cmd->add_option("--csv", scale_csv, "write the table to this file");

  auto* cmp_cmd = app.add_subcommand("compare", "uniform vs non-conforming efficiency comparison");
  std::string ucfg, ncfg;
  cmp_cmd->add_option("uniform", ucfg, "uniform mesh config")->required();
  cmp_cmd->add_option("nonconforming", ncfg, "non-conforming mesh config")->required();

  auto* info_cmd = app.add_subcommand("mesh-info", "mesh statistics and Courant numbers");
  common(info_cmd, true);

  auto* slice_cmd = app.add_subcommand("slice", "sample a snapshot on a plane");
  std::string snap, plane, var = "w", slice_out;
  int samples = 121;
  slice_cmd->add_option("snapshot", snap, "snapshot file")->required();
  slice_cmd->add_option("--plane", plane, "axis=coordinate, e.g. z=800")->required();
  slice_cmd->add_option("--var", var, "rho, u, v, w, p, T, theta or E");
  slice_cmd->add_option("--samples", samples, "samples per in-plane axis");
  slice_cmd->add_option("--out", slice_out, "CSV output (stdout if omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd || *info_cmd || *scale_cmd) {
      RunConfig cfg = configure(config, preset, sets);
      if (workers > 0)
        cfg.workers = workers;
      if (!output.empty())
        cfg.output.directory = output;
      if (*info_cmd) {
        std::cout << mesh_info(cfg);
        return 0;
      }
      if (*scale_cmd) {
        const auto rows = scaling_harness(cfg, parse_workers(worker_list),
                                          mode == "weak" ? ScalingMode::Weak : ScalingMode::Strong, cfg.preset);
        write_scaling_csv(std::cout, rows);
        if (!scale_csv.empty()) {
          std::ofstream os(scale_csv);
          write_scaling_csv(os, rows);
        }
        return 0;
      }
      const RunResult r = run(cfg);
      std::cout << "steps " << r.steps << "\nt_final " << r.t_final << "\nleaves " << r.leaves
                << "\ndofs_per_variable " << r.dofs_per_variable << "\nwall_seconds " << r.timers.total << "\n";
      if (!r.diagnostics.empty())
        std::cout << "max_w " << r.diagnostics.back().max_w << "\nmass_drift " << r.diagnostics.back().mass_drift
                  << "\n";
      for (const auto& a : r.artifacts)
        std::cout << "wrote " << a << "\n";
      if (r.exit_status != 0) {
        std::cerr << "error: " << r.error << "\n";
        return r.exit_status;
      }
      return 0;
    }
    if (*cmp_cmd) {
      const ComparisonReport rep = efficiency_comparison(load_config(ucfg), load_config(ncfg));
      write_comparison(std::cout, rep);
      return rep.error.empty() ? 0 : 1;
    }
    if (*slice_cmd) {
      const auto eq = plane.find('=');
      if (eq == std::string::npos || eq != 1 || std::string("xyz").find(plane[0]) == std::string::npos)
        throw UsageError("--plane expects x=..., y=... or z=...");
      const Snapshot s = load_snapshot(snap);
      const int d = s.config.dim;
      int axis = plane[0] == 'x' ? 0 : plane[0] == 'y' ? 1 : 2;
      if (d == 2 && plane[0] == 'z')
        axis = 1;
      else if (d == 2 && plane[0] == 'y')
        throw UsageError("2D fields have axes x and z");
      const double coord = std::stod(plane.substr(2));
      const PhysicalConstants c =
          s.config.kind == CaseKind::Manufactured ? s.config.manufactured.constants() : s.config.hill.constants;
      const Slice sl = extract_slice(*s.disc->geo, s.field, axis, coord, var, samples, c);
      if (slice_out.empty()) {
        write_slice_csv(std::cout, sl);
      } else {
        std::ofstream os(slice_out);
        if (!os)
          throw InputError("cannot write '" + slice_out + "'");
        write_slice_csv(os, sl);
      }
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
