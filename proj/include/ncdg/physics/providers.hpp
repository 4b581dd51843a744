#pragma once

#include "ncdg/dg/operator.hpp"
#include "ncdg/physics/euler.hpp"

#include <algorithm>
#include <cmath>

namespace ncdg {

// Reflects the momentum components m[0..dim) about the plane with normal n.
inline void mirror_momentum(const double* m, const double* n, int dim, double* out) {
  double mn = 0.0;
  for (int a = 0; a < dim; ++a)
    mn += m[a] * n[a];
  for (int a = 0; a < dim; ++a)
    out[a] = m[a] - 2.0 * mn * n[a];
}

// Far-field ghost of the implicit (acoustic) operators: the exterior state, or
// zero when none is given, which is the homogeneous part of the affine
// operator. Copying the interior trace instead leaves the boundary term
// -int p' m'.n of the acoustic energy without a sign.
inline void far_field_ghost(const double* ext, int n, double* g) {
  for (int v = 0; v < n; ++v)
    g[v] = ext ? ext[v] : 0.0;
}

// Explicit part on U = [rho, m, rho E]: mass flux m, advective momentum flux
// m x u, kinetic energy flux K rho k u. Rusanov flux with the advective speed
// max |u.n| of both sides; the acoustic part lives in the implicit operator.
struct ExplicitEulerFlux {
  int dim = 2;
  EquationCoefficients eq;

  int nin() const { return dim + 2; }
  int nout() const { return dim + 2; }

  void flux(const double* U, double* F) const {
    const double rho = U[0];
    double u[3] = {0, 0, 0};
    double k = 0.0;
    for (int a = 0; a < dim; ++a) {
      u[a] = U[1 + a] / rho;
      k += 0.5 * u[a] * u[a];
    }
    for (int a = 0; a < dim; ++a) {
      F[a] = U[1 + a];
      for (int i = 0; i < dim; ++i)
        F[(1 + i) * dim + a] = U[1 + i] * u[a];
      F[(dim + 1) * dim + a] = eq.kinetic * rho * k * u[a];
    }
  }

  void numerical_flux(const double* Uo, const double* Ux, const double* n, double* fn) const {
    double Fo[5 * 3], Fx[5 * 3];
    flux(Uo, Fo);
    flux(Ux, Fx);
    double uno = 0.0, unx = 0.0;
    for (int a = 0; a < dim; ++a) {
      uno += Uo[1 + a] * n[a];
      unx += Ux[1 + a] * n[a];
    }
    const double lambda = std::max(std::abs(uno / Uo[0]), std::abs(unx / Ux[0]));
    for (int v = 0; v < dim + 2; ++v) {
      double s = 0.0;
      for (int a = 0; a < dim; ++a)
        s += 0.5 * (Fo[v * dim + a] + Fx[v * dim + a]) * n[a];
      fn[v] = s - 0.5 * lambda * (Ux[v] - Uo[v]);
    }
  }

  void ghost(BoundaryKind kind, int, const double* Uo, const double* n, const double* ext, double* Ug) const {
    if (kind == BoundaryKind::FarField && ext) {
      for (int v = 0; v < dim + 2; ++v)
        Ug[v] = ext[v];
      return;
    }
    for (int v = 0; v < dim + 2; ++v)
      Ug[v] = Uo[v];
    if (kind == BoundaryKind::Wall)
      mirror_momentum(Uo + 1, n, dim, Ug + 1);
  }
};

// Implicit part on [p, h, m] with h = (rho e + p)/rho: momentum flux P p I and
// energy flux h m, centred numerical flux. Outputs [m_1..m_d, rho E].
struct ImplicitEulerFlux {
  int dim = 2;
  double pressure = 1.0;

  int nin() const { return dim + 2; }
  int nout() const { return dim + 1; }

  void flux(const double* in, double* F) const {
    const double p = in[0], h = in[1];
    for (int a = 0; a < dim; ++a) {
      for (int i = 0; i < dim; ++i)
        F[i * dim + a] = i == a ? pressure * p : 0.0;
      F[dim * dim + a] = h * in[2 + a];
    }
  }

  void numerical_flux(const double* o, const double* x, const double* n, double* fn) const {
    const double pm = 0.5 * pressure * (o[0] + x[0]);
    double hm = 0.0;
    for (int a = 0; a < dim; ++a) {
      fn[a] = pm * n[a];
      hm += 0.5 * (o[1] * o[2 + a] + x[1] * x[2 + a]) * n[a];
    }
    fn[dim] = hm;
  }

  void ghost(BoundaryKind kind, int, const double* o, const double* n, const double* ext, double* g) const {
    if (kind == BoundaryKind::FarField) {
      far_field_ghost(ext, dim + 2, g);
      return;
    }
    for (int v = 0; v < dim + 2; ++v)
      g[v] = o[v];
    mirror_momentum(o + 2, n, dim, g + 2);
  }
};

// Weak gradient of a scalar (flux p I), centred; wall traces are copied.
struct GradientFlux {
  int dim = 2;
  int nin() const { return 1; }
  int nout() const { return dim; }
  void flux(const double* p, double* F) const {
    for (int i = 0; i < dim; ++i)
      for (int a = 0; a < dim; ++a)
        F[i * dim + a] = i == a ? p[0] : 0.0;
  }
  void numerical_flux(const double* o, const double* x, const double* n, double* fn) const {
    for (int a = 0; a < dim; ++a)
      fn[a] = 0.5 * (o[0] + x[0]) * n[a];
  }
  void ghost(BoundaryKind kind, int, const double* o, const double*, const double* ext, double* g) const {
    if (kind == BoundaryKind::FarField)
      far_field_ghost(ext, 1, g);
    else
      g[0] = o[0];
  }
};

// Weak divergence of h m on inputs [h, m], centred; walls mirror m.
struct WeightedDivergenceFlux {
  int dim = 2;
  int nin() const { return dim + 1; }
  int nout() const { return 1; }
  void flux(const double* in, double* F) const {
    for (int a = 0; a < dim; ++a)
      F[a] = in[0] * in[1 + a];
  }
  void numerical_flux(const double* o, const double* x, const double* n, double* fn) const {
    double s = 0.0;
    for (int a = 0; a < dim; ++a)
      s += 0.5 * (o[0] * o[1 + a] + x[0] * x[1 + a]) * n[a];
    fn[0] = s;
  }
  void ghost(BoundaryKind kind, int, const double* o, const double* n, const double* ext, double* g) const {
    if (kind == BoundaryKind::FarField) {
      far_field_ghost(ext, dim + 1, g);
      return;
    }
    for (int v = 0; v < dim + 1; ++v)
      g[v] = o[v];
    mirror_momentum(o + 1, n, dim, g + 1);
  }
};

// Full Euler flux on [U, p, h] (volume term from the physical flux of U), with the
// face flux built as advective Rusanov plus centred pressure terms. Reference
// operator for the splitting consistency check.
struct MonolithicEulerFlux {
  int dim = 2;
  EquationCoefficients eq;
  PhysicalConstants constants;

  int nin() const { return dim + 4; }
  int nout() const { return dim + 2; }

  // Sum of the explicit and implicit volume fluxes on the same inputs.
  void flux(const double* in, double* F) const {
    ExplicitEulerFlux{dim, eq}.flux(in, F);
    for (int a = 0; a < dim; ++a) {
      F[(1 + a) * dim + a] += eq.pressure * in[dim + 2];
      F[(dim + 1) * dim + a] += in[dim + 3] * in[1 + a];
    }
  }
  void numerical_flux(const double* o, const double* x, const double* n, double* fn) const {
    ExplicitEulerFlux ex{dim, eq};
    ex.numerical_flux(o, x, n, fn);
    for (int a = 0; a < dim; ++a)
      fn[1 + a] += 0.5 * eq.pressure * (o[dim + 2] + x[dim + 2]) * n[a];
    double hm = 0.0;
    for (int a = 0; a < dim; ++a)
      hm += 0.5 * (o[dim + 3] * o[1 + a] + x[dim + 3] * x[1 + a]) * n[a];
    fn[dim + 1] += hm;
  }
  void ghost(BoundaryKind kind, int, const double* o, const double* n, const double* ext, double* g) const {
    for (int v = 0; v < dim + 4; ++v)
      g[v] = o[v];
    if (kind == BoundaryKind::Wall) {
      mirror_momentum(o + 1, n, dim, g + 1);
    } else if (ext) {
      double m2 = 0.0;
      for (int v = 0; v < dim + 2; ++v)
        g[v] = ext[v];
      for (int a = 0; a < dim; ++a)
        m2 += ext[1 + a] * ext[1 + a];
      const double gm1 = eq.gamma - 1.0;
      g[dim + 2] = gm1 * (ext[dim + 1] - 0.5 * eq.kinetic * m2 / ext[0]);
      g[dim + 3] = eq.gamma / gm1 * g[dim + 2] / ext[0];
    }
  }
};

} // namespace ncdg
