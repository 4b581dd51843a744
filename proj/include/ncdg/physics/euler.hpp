#pragma once

#include "ncdg/dg/field.hpp"
#include "ncdg/mesh/geometry.hpp"

#include <array>

namespace ncdg {

struct PhysicalConstants {
  double R = 287.0;
  double g = 9.81;
  double gamma = 1.4;
  double Gamma() const { return (gamma - 1.0) / gamma; }
};

// Reference scales of the non-dimensional system. Pressure and energy are
// scaled by density * sound_speed^2, so M = velocity / sound_speed.
struct ScalingNumbers {
  double length = 1.0;
  double velocity = 1.0;
  double density = 1.0;
  double sound_speed = 1.0;
  double gravity = 9.81;

  double mach() const { return velocity / sound_speed; }
  double froude() const;
  double pressure_scale() const { return density * sound_speed * sound_speed; }
  double time_scale() const { return length / velocity; }

  // Throws ConfigError unless every reference is positive.
  void validate() const;
  // Scales whose M and Fr are both one (scaled system equals the dimensional one).
  static ScalingNumbers unit(double gravity);
};

// Coefficients of the (possibly scaled) equations:
//   d(rho u)/dt + div(rho u x u) + P grad p = -G rho k
//   d(rho E)/dt + div[(rho e + K rho k + p) u] = -K G rho w,   rho E = rho e + K rho k.
// Dimensional: P = K = 1, G = g. Scaled: P = 1/M^2, K = M^2, G = 1/Fr^2.
struct EquationCoefficients {
  double pressure = 1.0;
  double kinetic = 1.0;
  double gravity = 9.81;
  double gamma = 1.4;

  static EquationCoefficients dimensional(const PhysicalConstants& c);
  static EquationCoefficients scaled(const ScalingNumbers& s, const PhysicalConstants& c);
};

struct PrimitiveState {
  double rho = 1.0;
  std::array<double, 3> u{0, 0, 0};
  double p = 1.0;
  double T = 0.0;
  double e = 0.0;  // internal energy per unit mass
  double k = 0.0;  // kinetic energy per unit mass
};

PrimitiveState make_primitive(double rho, std::array<double, 3> u, double p, const PhysicalConstants& c);

// U = [rho, rho u_1..rho u_d, rho E]. Throws PositivityError (with the
// given location) if rho <= 0 or p <= 0.
PrimitiveState conserved_to_primitive(const double* U, int dim, const PhysicalConstants& c, double kinetic = 1.0,
                                      int leaf = -1, int node = -1);
void primitive_to_conserved(const PrimitiveState& W, int dim, double kinetic, double* U);

// Rows [rho u; rho u x u + P p I; (rho e + K rho k + p) u], F[row * dim + axis].
void inviscid_flux(const PrimitiveState& W, int dim, const EquationCoefficients& eq, double* F);
// [0; -G rho k; -K G rho w].
void gravity_source(const PrimitiveState& W, int dim, const EquationCoefficients& eq, double* S);

// Conserved state scaling (and its inverse) between the dimensional and scaled systems.
void nondimensionalize(const double* U, int dim, const ScalingNumbers& s, double* out);
void redimensionalize(const double* U, int dim, const ScalingNumbers& s, double* out);

struct CourantReport {
  double acoustic = 0.0;
  double advective = 0.0;
  double dt = 0.0;
  int degree = 0;
  int dim = 0;
  double h_min = 0.0;
  double max_sound_speed = 0.0;
  double max_velocity = 0.0;
};

// C = r c_max dt / (H_min sqrt(d)), C_u = r |u|_max dt / (H_min sqrt(d)); maxima over
// the volume quadrature points, H_min the smallest leaf diameter.
CourantReport courant_numbers(const Field& U, const MeshGeometry& geo, double dt, int degree,
                              const PhysicalConstants& c, double kinetic = 1.0);

// Checks every node; throws PositivityError at the first failing node.
void check_positivity(const Field& U, const PhysicalConstants& c, double kinetic = 1.0);

} // namespace ncdg
