#pragma once

#include <vector>

namespace ncdg {

// 1D rules on the unit interval [0,1].
struct QuadratureRule {
  std::vector<double> points;
  std::vector<double> weights;
};

QuadratureRule gauss_legendre(int npoints);
QuadratureRule gauss_lobatto(int npoints);

// Lagrange polynomials through `nodes`, evaluated at `x` (values and first derivatives).
void lagrange_values(const std::vector<double>& nodes, double x, double* values);
void lagrange_derivatives(const std::vector<double>& nodes, double x, double* derivs);

// Dense row-major matrix M(q, i) = phi_i(points[q]).
std::vector<double> interpolation_matrix(const std::vector<double>& nodes, const std::vector<double>& points);
std::vector<double> derivative_matrix(const std::vector<double>& nodes, const std::vector<double>& points);

// Nodal Lagrange basis of degree r on Gauss-Lobatto-Legendre nodes, with a
// Gauss-Legendre rule of `quadrature_points` points per axis (default r+1) for
// volume and face integrals.
class ReferenceBasis {
public:
  explicit ReferenceBasis(int degree, int quadrature_points = 0);

  int degree() const { return degree_; }
  int n() const { return degree_ + 1; }
  int nq() const { return static_cast<int>(quad_.points.size()); }

  const std::vector<double>& nodes() const { return nodes_.points; }
  const std::vector<double>& lobatto_weights() const { return nodes_.weights; }
  const std::vector<double>& qpoints() const { return quad_.points; }
  const std::vector<double>& qweights() const { return quad_.weights; }

  // nq x n, row = quadrature point, column = node.
  const double* interp() const { return interp_.data(); }
  const double* deriv() const { return deriv_.data(); }
  // Coarse trace evaluated at the Gauss points of half-interval `half` (0 or 1).
  const double* sub_interp(int half) const { return sub_interp_[half].data(); }
  // Nodal derivative matrix D(j, i) = phi_i'(node_j).
  const double* nodal_deriv() const { return nodal_deriv_.data(); }

private:
  int degree_;
  QuadratureRule nodes_;
  QuadratureRule quad_;
  std::vector<double> interp_;
  std::vector<double> deriv_;
  std::vector<double> sub_interp_[2];
  std::vector<double> nodal_deriv_;
};

} // namespace ncdg
