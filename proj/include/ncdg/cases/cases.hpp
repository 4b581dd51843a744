#pragma once

#include "ncdg/physics/euler.hpp"
#include "ncdg/time/split.hpp"

#include <array>
#include <string>
#include <vector>

namespace ncdg {

// Bell-shaped hill over a stably stratified atmosphere with uniform wind.
struct HillCaseConfig {
  int dim = 2;
  double h_c = 400.0;
  double a_c = 1000.0;
  double x_c = 30000.0;
  double y_c = 20000.0;  // unused for dim = 2
  double N = 0.01;
  double u_bar = 10.0;
  double p_ref = 1e5;
  double T_ref = 293.15;
  std::array<double, 3> extents{60000.0, 16000.0, 0.0};  // last used axis is vertical
  double T_f = 3600.0;
  double dt = 2.0;
  bool terrain = true;  // false: flat bottom (hydrostatic-rest)
  PhysicalConstants constants;

  double rho_ref() const { return p_ref / (constants.R * T_ref); }
  double height() const { return extents[dim - 1]; }
  // Throws ConfigError for invalid parameters or a domain too tall for the profile.
  void validate() const;

  static HillCaseConfig paper3d();
  static HillCaseConfig paper2d();
  static HillCaseConfig hydrostatic_rest();
};

// h = h_c / [1 + ((x-x_c)/a_c)^2 + ((y-y_c)/a_c)^2]^(3/2); y ignored for dim = 2.
double hill_profile(double x, double y, const HillCaseConfig& cfg);

// Stratified hydrostatic state with constant buoyancy frequency, u = (u_bar, 0, 0).
// Throws ConfigError if the pressure bracket is non-positive at z.
PrimitiveState hydrostatic_state(double z, const HillCaseConfig& cfg);
// Height at which the pressure bracket vanishes.
double hydrostatic_height_limit(const HillCaseConfig& cfg);

// Slip wall: reflects the normal momentum of a conserved state [rho, m, rho E].
void apply_wall_bc(const double* U, const double* n, int dim, double* ghost);

struct SpongeConfig {
  double top_depth = 4000.0;
  double lateral_width = 10000.0;
  double sigma_max = 0.05;
  bool top = true;
  bool lateral = true;
  void validate() const;
};

// sigma_max sin^2(pi/2 s) with s the normalised penetration depth into the
// sponge; the largest of the top and lateral contributions.
double sponge_rate(const std::array<double, 3>& x, int dim, const std::array<double, 3>& extents,
                   const SpongeConfig& cfg);
// Rate at every leaf node, laid out as [leaf][node].
std::vector<double> sponge_field(const MeshGeometry& geo, const std::array<double, 3>& extents,
                                 const SpongeConfig& cfg);
// Nodal interpolant of the hydrostatic state (conserved variables, dimensional).
Field hydrostatic_field(const MeshGeometry& geo, const HillCaseConfig& cfg);
// Adds -sigma (U - U_bg) to the momentum and energy rows of R.
void apply_sponge(Field& R, const Field& U, const Field& background, const std::vector<double>& sigma);

// Smooth travelling-wave solution on a periodic box [0, L]^d without gravity.
// Every field depends on phi = 2 pi (x_1 + .. + x_d) / L - omega t:
//   rho = rho0 (1 + a_rho sin phi), u_i = u0_i + a_u sin(phi + i), p = p0 (1 + a_p cos phi),
// sustained by the matching forcing S = dU/dt + div F(U).
struct ManufacturedConfig {
  int dim = 2;
  double L = 1.0;
  double rho0 = 1.0;
  double p0 = 1.0 / 1.4;
  std::array<double, 3> u0{0.1, 0.05, 0.025};
  double a_rho = 0.2;
  double a_u = 0.05;
  double a_p = 0.1;
  double omega = 2.0 * 3.14159265358979323846;
  EquationCoefficients eq{1.0, 1.0, 0.0, 1.4};

  PhysicalConstants constants() const;
  void validate() const;
};

PrimitiveState manufactured_primitive(const std::array<double, 3>& x, double t, const ManufacturedConfig& cfg);
void manufactured_state(const std::array<double, 3>& x, double t, const ManufacturedConfig& cfg, double* U);
void manufactured_forcing(const std::array<double, 3>& x, double t, const ManufacturedConfig& cfg, double* S);
// Nodal interpolant of the exact state at time t.
Field manufactured_field(const MeshGeometry& geo, double t, const ManufacturedConfig& cfg);
// Source term adding the nodal forcing to the residual.
SourceTerm manufactured_source(const MeshGeometry& geo, const ManufacturedConfig& cfg);

// L2 norm of U - exact(t) over the mesh, using the volume quadrature.
double manufactured_l2_error(const Field& U, const MeshGeometry& geo, double t, const ManufacturedConfig& cfg,
                             int variable = -1);

} // namespace ncdg
