#pragma once

#include "ncdg/mesh/geometry.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace ncdg {

// Per-leaf nodal coefficients, layout [leaf][variable][node]. A conserved
// StateField has d+2 variables: rho, rho*u_1..rho*u_d, rho*E.
class Field {
public:
  Field() = default;
  Field(const MeshGeometry& geo, int nvar);

  int nvar() const { return nvar_; }
  int nodes() const { return nn_; }
  int leaves() const { return nleaves_; }
  std::uint64_t mesh_fingerprint() const { return fingerprint_; }
  int degree() const { return degree_; }
  std::size_t size() const { return values_.size(); }

  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }
  double* leaf(int e) { return values_.data() + std::size_t(e) * nvar_ * nn_; }
  const double* leaf(int e) const { return values_.data() + std::size_t(e) * nvar_ * nn_; }
  double* var(int e, int v) { return leaf(e) + v * nn_; }
  const double* var(int e, int v) const { return leaf(e) + v * nn_; }

  bool compatible(const Field& other) const {
    return fingerprint_ == other.fingerprint_ && nn_ == other.nn_ && nleaves_ == other.nleaves_ &&
           degree_ == other.degree_;
  }
  void fill(double v);

private:
  int nvar_ = 0;
  int nn_ = 0;
  int nleaves_ = 0;
  int degree_ = 0;
  std::uint64_t fingerprint_ = 0;
  std::vector<double> values_;
};

using PointFunction = std::function<void(const std::array<double, 3>& x, double* out)>;

// Nodal interpolation of `f` (nvar components) at the mapped GLL nodes.
Field project_initial_data(const MeshGeometry& geo, const PointFunction& f, int nvar);

// Sum over leaves (fixed order) and variables of quadrature-weighted products.
double global_inner_product(const MeshGeometry& geo, const Field& a, const Field& b);

// Integral of every variable over the domain.
std::vector<double> integrate_conserved(const MeshGeometry& geo, const Field& f);

// Values of every variable at the volume quadrature points of one leaf, [var][q].
void interpolate_to_quadrature(const MeshGeometry& geo, const Field& f, int leaf, double* out);

// Evaluates all variables at reference point xi of a leaf.
void evaluate_at(const MeshGeometry& geo, const Field& f, int leaf, const std::array<double, 3>& xi, double* out);

} // namespace ncdg
