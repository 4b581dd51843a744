#include "ncdg/cases/cases.hpp"

#include "ncdg/common/errors.hpp"
#include "ncdg/physics/providers.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace ncdg {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

void HillCaseConfig::validate() const {
  if (dim != 2 && dim != 3)
    throw ConfigError("hill case: dim must be 2 or 3");
  for (int a = 0; a < dim; ++a)
    if (!(extents[a] > 0))
      throw ConfigError("hill case: domain extents must be positive");
  if (!(a_c > 0))
    throw ConfigError("hill case: a_c must be positive");
  if (terrain && !(h_c > 0 && h_c < height()))
    throw ConfigError("hill case: h_c must lie in (0, domain height)");
  if (!(N > 0) || !(p_ref > 0) || !(T_ref > 0))
    throw ConfigError("hill case: N, p_ref and T_ref must be positive");
  if (!(T_f > 0) || !(dt > 0))
    throw ConfigError("hill case: T_f and dt must be positive");
  if (height() >= hydrostatic_height_limit(*this)) {
    std::ostringstream os;
    os << "hill case: domain too tall for the stratified profile (height " << height() << " m, limit "
       << hydrostatic_height_limit(*this) << " m)";
    throw ConfigError(os.str());
  }
}

HillCaseConfig HillCaseConfig::paper3d() {
  HillCaseConfig c;
  c.dim = 3;
  c.extents = {60000.0, 40000.0, 16000.0};
  return c;
}

HillCaseConfig HillCaseConfig::paper2d() { return HillCaseConfig{}; }

HillCaseConfig HillCaseConfig::hydrostatic_rest() {
  HillCaseConfig c;
  c.terrain = false;
  c.h_c = 0.0;
  c.u_bar = 0.0;
  return c;
}

double hill_profile(double x, double y, const HillCaseConfig& cfg) {
  const double sx = (x - cfg.x_c) / cfg.a_c;
  double q = 1.0 + sx * sx;
  if (cfg.dim == 3) {
    const double sy = (y - cfg.y_c) / cfg.a_c;
    q += sy * sy;
  }
  return cfg.h_c / (q * std::sqrt(q));
}

double hydrostatic_height_limit(const HillCaseConfig& cfg) {
  const double g = cfg.constants.g, N2 = cfg.N * cfg.N;
  const double c = g * g / N2 * cfg.constants.Gamma() * cfg.rho_ref() / cfg.p_ref;
  if (c <= 1.0)
    return std::numeric_limits<double>::infinity();
  return -g / N2 * std::log(1.0 - 1.0 / c);
}

PrimitiveState hydrostatic_state(double z, const HillCaseConfig& cfg) {
  const PhysicalConstants& k = cfg.constants;
  const double g = k.g, N2 = cfg.N * cfg.N, G = k.Gamma();
  const double decay = std::exp(-N2 * z / g);
  const double bracket = 1.0 - g * g / N2 * G * cfg.rho_ref() / cfg.p_ref * (1.0 - decay);
  if (!(bracket > 0.0)) {
    std::ostringstream os;
    os << "domain too tall: hydrostatic pressure bracket is " << bracket << " at z = " << z << " m";
    throw ConfigError(os.str());
  }
  const double p = cfg.p_ref * std::pow(bracket, 1.0 / G);
  const double rho = cfg.rho_ref() * std::pow(p / cfg.p_ref, 1.0 / k.gamma) * decay;
  return make_primitive(rho, {cfg.u_bar, 0.0, 0.0}, p, k);
}

void apply_wall_bc(const double* U, const double* n, int dim, double* ghost) {
  for (int v = 0; v < dim + 2; ++v)
    ghost[v] = U[v];
  mirror_momentum(U + 1, n, dim, ghost + 1);
}

void SpongeConfig::validate() const {
  if (top_depth < 0 || lateral_width < 0 || sigma_max < 0)
    throw ConfigError("sponge: depth, width and rate must be non-negative");
}

double sponge_rate(const std::array<double, 3>& x, int dim, const std::array<double, 3>& extents,
                   const SpongeConfig& cfg) {
  auto ramp = [&](double depth, double width) {
    if (width <= 0.0 || depth <= 0.0)
      return 0.0;
    const double s = std::min(depth / width, 1.0);
    const double r = std::sin(0.5 * kPi * s);
    return cfg.sigma_max * r * r;
  };
  double sigma = 0.0;
  const int v = dim - 1;
  if (cfg.top)
    sigma = std::max(sigma, ramp(x[v] - (extents[v] - cfg.top_depth), cfg.top_depth));
  if (cfg.lateral)
    for (int a = 0; a < v; ++a) {
      sigma = std::max(sigma, ramp(cfg.lateral_width - x[a], cfg.lateral_width));
      sigma = std::max(sigma, ramp(x[a] - (extents[a] - cfg.lateral_width), cfg.lateral_width));
    }
  return sigma;
}

std::vector<double> sponge_field(const MeshGeometry& geo, const std::array<double, 3>& extents,
                                 const SpongeConfig& cfg) {
  cfg.validate();
  const int nl = geo.mesh().num_leaves(), nn = geo.nodes_per_leaf(), d = geo.dim();
  std::vector<double> s(std::size_t(nl) * nn);
  for (int e = 0; e < nl; ++e) {
    auto xs = geo.node_coords(e);
    for (int i = 0; i < nn; ++i) {
      std::array<double, 3> x{0, 0, 0};
      for (int a = 0; a < d; ++a)
        x[a] = xs[i * d + a];
      s[std::size_t(e) * nn + i] = sponge_rate(x, d, extents, cfg);
    }
  }
  return s;
}

Field hydrostatic_field(const MeshGeometry& geo, const HillCaseConfig& cfg) {
  const int d = geo.dim();
  return project_initial_data(
      geo,
      [&](const std::array<double, 3>& x, double* out) {
        primitive_to_conserved(hydrostatic_state(x[d - 1], cfg), d, 1.0, out);
      },
      d + 2);
}

void apply_sponge(Field& R, const Field& U, const Field& background, const std::vector<double>& sigma) {
  if (!R.compatible(U) || !U.compatible(background))
    throw UsageError("apply_sponge: fields live on different meshes");
  const int nn = U.nodes();
  for (int e = 0; e < U.leaves(); ++e) {
    const double* s = &sigma[std::size_t(e) * nn];
    for (int v = 1; v < U.nvar(); ++v)
      for (int i = 0; i < nn; ++i)
        R.var(e, v)[i] -= s[i] * (U.var(e, v)[i] - background.var(e, v)[i]);
  }
}

PhysicalConstants ManufacturedConfig::constants() const {
  PhysicalConstants c;
  c.gamma = eq.gamma;
  c.g = 0.0;
  return c;
}

void ManufacturedConfig::validate() const {
  if (dim != 2 && dim != 3)
    throw ConfigError("manufactured case: dim must be 2 or 3");
  if (!(L > 0) || !(rho0 > 0) || !(p0 > 0))
    throw ConfigError("manufactured case: L, rho0 and p0 must be positive");
  if (!(std::abs(a_rho) < 1) || !(std::abs(a_p) < 1))
    throw ConfigError("manufactured case: density and pressure amplitudes must be below one");
  if (eq.gravity != 0.0)
    throw ConfigError("manufactured case is gravity-free");
}

namespace {

struct Wave {
  double rho, drho;
  double u[3], du[3];
  double p, dp;
};

// Fields and their phi-derivatives.
Wave wave(const std::array<double, 3>& x, double t, const ManufacturedConfig& c) {
  double s = 0.0;
  for (int a = 0; a < c.dim; ++a)
    s += x[a];
  const double phi = 2.0 * kPi * s / c.L - c.omega * t;
  Wave w{};
  w.rho = c.rho0 * (1.0 + c.a_rho * std::sin(phi));
  w.drho = c.rho0 * c.a_rho * std::cos(phi);
  for (int i = 0; i < c.dim; ++i) {
    w.u[i] = c.u0[i] + c.a_u * std::sin(phi + i);
    w.du[i] = c.a_u * std::cos(phi + i);
  }
  w.p = c.p0 * (1.0 + c.a_p * std::cos(phi));
  w.dp = -c.p0 * c.a_p * std::sin(phi);
  return w;
}

} // namespace

PrimitiveState manufactured_primitive(const std::array<double, 3>& x, double t, const ManufacturedConfig& cfg) {
  const Wave w = wave(x, t, cfg);
  return make_primitive(w.rho, {w.u[0], w.u[1], cfg.dim == 3 ? w.u[2] : 0.0}, w.p, cfg.constants());
}

void manufactured_state(const std::array<double, 3>& x, double t, const ManufacturedConfig& cfg, double* U) {
  primitive_to_conserved(manufactured_primitive(x, t, cfg), cfg.dim, cfg.eq.kinetic, U);
}

void manufactured_forcing(const std::array<double, 3>& x, double t, const ManufacturedConfig& cfg, double* S) {
  const int d = cfg.dim;
  const Wave w = wave(x, t, cfg);
  const double P = cfg.eq.pressure, K = cfg.eq.kinetic, gm1 = cfg.eq.gamma - 1.0;
  const double kx = 2.0 * kPi / cfg.L;  // d phi / d x_a for every a
  const double wt = -cfg.omega;         // d phi / d t
  double k = 0.0, dk = 0.0;
  for (int i = 0; i < d; ++i) {
    k += 0.5 * w.u[i] * w.u[i];
    dk += w.u[i] * w.du[i];
  }
  const double E = w.p / gm1 + K * w.rho * k;
  const double dE = w.dp / gm1 + K * (w.drho * k + w.rho * dk);

  // Continuity.
  double divm = 0.0;
  for (int a = 0; a < d; ++a)
    divm += w.drho * w.u[a] + w.rho * w.du[a];
  S[0] = wt * w.drho + kx * divm;
  // Momentum.
  for (int i = 0; i < d; ++i) {
    double div = 0.0;
    for (int a = 0; a < d; ++a)
      div += w.drho * w.u[i] * w.u[a] + w.rho * w.du[i] * w.u[a] + w.rho * w.u[i] * w.du[a];
    div += P * w.dp;
    S[1 + i] = wt * (w.drho * w.u[i] + w.rho * w.du[i]) + kx * div;
  }
  // Energy.
  double div = 0.0;
  for (int a = 0; a < d; ++a)
    div += (dE + w.dp) * w.u[a] + (E + w.p) * w.du[a];
  S[d + 1] = wt * dE + kx * div;
}

Field manufactured_field(const MeshGeometry& geo, double t, const ManufacturedConfig& cfg) {
  return project_initial_data(
      geo, [&](const std::array<double, 3>& x, double* out) { manufactured_state(x, t, cfg, out); }, cfg.dim + 2);
}

SourceTerm manufactured_source(const MeshGeometry& geo, const ManufacturedConfig& cfg) {
  const MeshGeometry* g = &geo;
  return [g, cfg](double t, const Field&, Field& R) {
    const int d = g->dim(), nn = g->nodes_per_leaf();
    double S[5];
    for (int e = 0; e < R.leaves(); ++e) {
      auto xs = g->node_coords(e);
      for (int i = 0; i < nn; ++i) {
        std::array<double, 3> x{0, 0, 0};
        for (int a = 0; a < d; ++a)
          x[a] = xs[i * d + a];
        manufactured_forcing(x, t, cfg, S);
        for (int v = 0; v < d + 2; ++v)
          R.var(e, v)[i] += S[v];
      }
    }
  };
}

double manufactured_l2_error(const Field& U, const MeshGeometry& geo, double t, const ManufacturedConfig& cfg,
                             int variable) {
  const int d = geo.dim(), nn = geo.qpoints_per_leaf(), nv = U.nvar();
  const ReferenceBasis& b = geo.basis();
  const int n = b.nq();
  std::vector<double> uq(std::size_t(nv) * nn);
  double sum = 0.0, ex[5];
  for (int e = 0; e < U.leaves(); ++e) {
    interpolate_to_quadrature(geo, U, e, uq.data());
    const LeafBox box = geo.mesh().box(e);
    auto jxw = geo.jxw(e);
    for (int q = 0; q < nn; ++q) {
      std::array<double, 3> xi{0, 0, 0};
      int r = q;
      for (int a = 0; a < d; ++a) {
        xi[a] = b.qpoints()[r % n];
        r /= n;
      }
      manufactured_state(geo.mapping().map(box, xi), t, cfg, ex);
      for (int v = 0; v < nv; ++v) {
        if (variable >= 0 && v != variable)
          continue;
        const double diff = uq[std::size_t(v) * nn + q] - ex[v];
        sum += jxw[q] * diff * diff;
      }
    }
  }
  return std::sqrt(sum);
}

} // namespace ncdg
