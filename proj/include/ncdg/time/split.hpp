#pragma once

#include "ncdg/dg/operator.hpp"
#include "ncdg/physics/euler.hpp"

#include <functional>
#include <vector>

namespace ncdg {

// Adds a source term at time t to the residual R of state U.
using SourceTerm = std::function<void(double t, const Field& U, Field& R)>;

// Explicit/implicit split of the semi-discrete Euler system:
//   explicit: continuity, advective momentum and kinetic-energy fluxes,
//             sponge relaxation, optional forcing (Rusanov flux)
//   implicit: pressure gradient and enthalpy flux div(h m) (centred flux)
// Gravity sits in the implicit part unless set_implicit_gravity(false).
// Residuals are M^-1 applied to the weak forms, i.e. dU/dt = E(U) + I(U).
class SplitOperators {
public:
  SplitOperators(const DGOperator& op, EquationCoefficients eq, PhysicalConstants constants);

  const DGOperator& op() const { return *op_; }
  const MeshGeometry& geometry() const { return op_->geometry(); }
  const EquationCoefficients& equations() const { return eq_; }
  const PhysicalConstants& constants() const { return constants_; }
  int dim() const { return op_->dim(); }
  int nvar() const { return op_->dim() + 2; }

  void set_gravity(bool on) { gravity_ = on; }
  bool gravity() const { return gravity_; }
  void set_implicit_gravity(bool on) { implicit_gravity_ = on; }
  bool implicit_gravity() const { return gravity_ && implicit_gravity_; }
  // Exterior state on far-field faces and the sponge reference.
  void set_background(const Field& bg);
  const Field* background() const { return has_background_ ? &background_ : nullptr; }
  // Relaxation rate per leaf node (size leaves * nodes); requires a background.
  void set_sponge(std::vector<double> sigma);
  const std::vector<double>& sponge() const { return sigma_; }
  void set_source(SourceTerm s) { source_ = std::move(s); }

  // E(U). If `boundary_flux` is given it receives the outward boundary flux
  // integral of every variable (size d+2), summed in leaf order.
  void explicit_residual(double t, const Field& U, Field& R, std::vector<double>* boundary_flux = nullptr) const;
  // I(U); the density component is zero.
  void implicit_residual(const Field& U, Field& R) const;
  // Single-pass residual of the full system on the same discrete fluxes (reference for tests).
  void monolithic_residual(double t, const Field& U, Field& R) const;

  // Nodal auxiliaries [p, h, m_1..m_d] with h = (rho e + p) / rho.
  void auxiliary(const Field& U, Field& aux) const;
  // Discrete gradient M^-1 (weak grad), output d variables. Far-field faces
  // see the background pressure, or zero if `homogeneous`.
  void gradient(const Field& p, Field& G, bool homogeneous = false) const;
  // Discrete divergence M^-1 (weak div) of h m from inputs [h, m], output one
  // variable. Far-field faces see the background h m, or zero if `homogeneous`.
  void weighted_divergence(const Field& hm, Field& D, bool homogeneous = false) const;

private:
  void add_sources(double t, const Field& U, Field& R, bool with_gravity) const;
  void add_gravity(const Field& U, Field& R) const;

  const DGOperator* op_;
  EquationCoefficients eq_;
  PhysicalConstants constants_;
  bool gravity_ = true;
  bool implicit_gravity_ = true;
  bool has_background_ = false;
  Field background_;
  std::vector<double> bg_traces_;
  // Background [p, h, m] traces and the p and [h, m] slices of them.
  std::vector<double> aux_traces_, p_traces_, hm_traces_;
  std::vector<double> sigma_;
  SourceTerm source_;
  mutable std::vector<double> bflux_;
};

} // namespace ncdg
