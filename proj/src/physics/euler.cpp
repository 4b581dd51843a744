#include "ncdg/physics/euler.hpp"

#include "ncdg/common/errors.hpp"

#include <algorithm>
#include <cmath>

namespace ncdg {

double ScalingNumbers::froude() const { return velocity / std::sqrt(gravity * length); }

void ScalingNumbers::validate() const {
  if (!(length > 0) || !(velocity > 0) || !(density > 0) || !(sound_speed > 0) || !(gravity > 0))
    throw ConfigError("scaling references must be positive");
}

ScalingNumbers ScalingNumbers::unit(double gravity) {
  ScalingNumbers s;
  s.gravity = gravity;
  s.velocity = 1.0;
  s.sound_speed = 1.0;
  s.length = 1.0 / gravity;
  s.density = 1.0;
  return s;
}

EquationCoefficients EquationCoefficients::dimensional(const PhysicalConstants& c) {
  return {1.0, 1.0, c.g, c.gamma};
}

EquationCoefficients EquationCoefficients::scaled(const ScalingNumbers& s, const PhysicalConstants& c) {
  s.validate();
  const double M = s.mach(), Fr = s.froude();
  return {1.0 / (M * M), M * M, 1.0 / (Fr * Fr), c.gamma};
}

PrimitiveState make_primitive(double rho, std::array<double, 3> u, double p, const PhysicalConstants& c) {
  PrimitiveState W;
  W.rho = rho;
  W.u = u;
  W.p = p;
  W.T = p / (rho * c.R);
  W.e = p / ((c.gamma - 1.0) * rho);
  W.k = 0.5 * (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
  return W;
}

PrimitiveState conserved_to_primitive(const double* U, int dim, const PhysicalConstants& c, double kinetic,
                                      int leaf, int node) {
  PrimitiveState W;
  W.rho = U[0];
  if (!(W.rho > 0.0))
    throw PositivityError("non-positive density " + std::to_string(W.rho), leaf, node);
  double k = 0.0;
  for (int a = 0; a < dim; ++a) {
    W.u[a] = U[1 + a] / W.rho;
    k += W.u[a] * W.u[a];
  }
  W.k = 0.5 * k;
  W.e = U[dim + 1] / W.rho - kinetic * W.k;
  W.p = (c.gamma - 1.0) * W.rho * W.e;
  if (!(W.p > 0.0))
    throw PositivityError("non-positive pressure " + std::to_string(W.p), leaf, node);
  W.T = W.p / (W.rho * c.R);
  return W;
}

void primitive_to_conserved(const PrimitiveState& W, int dim, double kinetic, double* U) {
  U[0] = W.rho;
  double k = 0.0;
  for (int a = 0; a < dim; ++a) {
    U[1 + a] = W.rho * W.u[a];
    k += W.u[a] * W.u[a];
  }
  U[dim + 1] = W.rho * W.e + kinetic * W.rho * 0.5 * k;
}

void inviscid_flux(const PrimitiveState& W, int dim, const EquationCoefficients& eq, double* F) {
  const double rho_e = W.p / (eq.gamma - 1.0);
  double k = 0.0;
  for (int a = 0; a < dim; ++a)
    k += 0.5 * W.u[a] * W.u[a];
  const double energy = rho_e + eq.kinetic * W.rho * k + W.p;
  for (int a = 0; a < dim; ++a) {
    F[a] = W.rho * W.u[a];
    for (int i = 0; i < dim; ++i)
      F[(1 + i) * dim + a] = W.rho * W.u[i] * W.u[a] + (i == a ? eq.pressure * W.p : 0.0);
    F[(dim + 1) * dim + a] = energy * W.u[a];
  }
}

void gravity_source(const PrimitiveState& W, int dim, const EquationCoefficients& eq, double* S) {
  for (int i = 0; i < dim + 2; ++i)
    S[i] = 0.0;
  S[dim] = -eq.gravity * W.rho;
  S[dim + 1] = -eq.kinetic * eq.gravity * W.rho * W.u[dim - 1];
}

void nondimensionalize(const double* U, int dim, const ScalingNumbers& s, double* out) {
  s.validate();
  out[0] = U[0] / s.density;
  for (int a = 0; a < dim; ++a)
    out[1 + a] = U[1 + a] / (s.density * s.velocity);
  out[dim + 1] = U[dim + 1] / s.pressure_scale();
}

void redimensionalize(const double* U, int dim, const ScalingNumbers& s, double* out) {
  s.validate();
  out[0] = U[0] * s.density;
  for (int a = 0; a < dim; ++a)
    out[1 + a] = U[1 + a] * (s.density * s.velocity);
  out[dim + 1] = U[dim + 1] * s.pressure_scale();
}

CourantReport courant_numbers(const Field& U, const MeshGeometry& geo, double dt, int degree,
                              const PhysicalConstants& c, double kinetic) {
  const int d = geo.dim();
  const int nn = geo.qpoints_per_leaf();
  const int nv = U.nvar();
  std::vector<double> q(std::size_t(nv) * nn);
  std::vector<double> s(nv);
  CourantReport r;
  r.dt = dt;
  r.degree = degree;
  r.dim = d;
  r.h_min = geo.min_diameter();
  for (int e = 0; e < U.leaves(); ++e) {
    interpolate_to_quadrature(geo, U, e, q.data());
    for (int k = 0; k < nn; ++k) {
      for (int v = 0; v < nv; ++v)
        s[v] = q[v * nn + k];
      const PrimitiveState W = conserved_to_primitive(s.data(), d, c, kinetic, e, k);
      r.max_sound_speed = std::max(r.max_sound_speed, std::sqrt(c.gamma * W.p / W.rho));
      r.max_velocity = std::max(r.max_velocity, std::sqrt(2.0 * W.k));
    }
  }
  const double denom = r.h_min * std::sqrt(double(d));
  r.acoustic = degree * r.max_sound_speed * dt / denom;
  r.advective = degree * r.max_velocity * dt / denom;
  return r;
}

void check_positivity(const Field& U, const PhysicalConstants& c, double kinetic) {
  const int nn = U.nodes();
  const int nv = U.nvar();
  const int d = nv - 2;
  std::vector<double> s(nv);
  for (int e = 0; e < U.leaves(); ++e)
    for (int k = 0; k < nn; ++k) {
      for (int v = 0; v < nv; ++v)
        s[v] = U.var(e, v)[k];
      conserved_to_primitive(s.data(), d, c, kinetic, e, k);
    }
}

} // namespace ncdg
