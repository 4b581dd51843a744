#include "ncdg/dg/basis.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ncdg {

namespace {

// Legendre P_n and P_n' on [-1,1].
void legendre(int n, double x, double& p, double& dp) {
  double p0 = 1.0, p1 = x;
  if (n == 0) {
    p = 1.0;
    dp = 0.0;
    return;
  }
  for (int k = 2; k <= n; ++k) {
    const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = pk;
  }
  p = p1;
  dp = n * (x * p1 - p0) / (x * x - 1.0);
}

} // namespace

QuadratureRule gauss_legendre(int npoints) {
  if (npoints < 1)
    throw std::invalid_argument("gauss_legendre: npoints < 1");
  QuadratureRule rule;
  rule.points.resize(npoints);
  rule.weights.resize(npoints);
  for (int i = 0; i < npoints; ++i) {
    double x = -std::cos(std::numbers::pi * (i + 0.75) / (npoints + 0.5));
    double p = 0, dp = 0;
    for (int it = 0; it < 100; ++it) {
      legendre(npoints, x, p, dp);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16)
        break;
    }
    legendre(npoints, x, p, dp);
    rule.points[i] = 0.5 * (x + 1.0);
    rule.weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

QuadratureRule gauss_lobatto(int npoints) {
  if (npoints < 2)
    throw std::invalid_argument("gauss_lobatto: npoints < 2");
  const int n = npoints - 1;
  QuadratureRule rule;
  rule.points.resize(npoints);
  rule.weights.resize(npoints);
  rule.points.front() = 0.0;
  rule.points.back() = 1.0;
  // Interior nodes are the roots of P_n'.
  for (int i = 1; i < n; ++i) {
    double x = -std::cos(std::numbers::pi * i / n);
    for (int it = 0; it < 100; ++it) {
      double p, dp;
      legendre(n, x, p, dp);
      // d2p from the Legendre ODE: (1-x^2)p'' = 2x p' - n(n+1) p
      const double d2p = (2.0 * x * dp - n * (n + 1.0) * p) / (1.0 - x * x);
      const double dx = dp / d2p;
      x -= dx;
      if (std::abs(dx) < 1e-16)
        break;
    }
    rule.points[i] = 0.5 * (x + 1.0);
  }
  for (int i = 0; i <= n; ++i) {
    const double x = 2.0 * rule.points[i] - 1.0;
    double p, dp;
    legendre(n, x, p, dp);
    if (i == 0 || i == n)
      p = (i == 0 && n % 2 == 1) ? -1.0 : 1.0;
    rule.weights[i] = 1.0 / (n * (n + 1.0) * p * p);
  }
  return rule;
}

void lagrange_values(const std::vector<double>& nodes, double x, double* values) {
  const int n = static_cast<int>(nodes.size());
  for (int i = 0; i < n; ++i) {
    double v = 1.0;
    for (int j = 0; j < n; ++j)
      if (j != i)
        v *= (x - nodes[j]) / (nodes[i] - nodes[j]);
    values[i] = v;
  }
}

void lagrange_derivatives(const std::vector<double>& nodes, double x, double* derivs) {
  const int n = static_cast<int>(nodes.size());
  for (int i = 0; i < n; ++i) {
    double sum = 0.0;
    for (int k = 0; k < n; ++k) {
      if (k == i)
        continue;
      double prod = 1.0 / (nodes[i] - nodes[k]);
      for (int j = 0; j < n; ++j)
        if (j != i && j != k)
          prod *= (x - nodes[j]) / (nodes[i] - nodes[j]);
      sum += prod;
    }
    derivs[i] = sum;
  }
}

std::vector<double> interpolation_matrix(const std::vector<double>& nodes, const std::vector<double>& points) {
  const std::size_t n = nodes.size();
  std::vector<double> m(points.size() * n);
  for (std::size_t q = 0; q < points.size(); ++q)
    lagrange_values(nodes, points[q], &m[q * n]);
  return m;
}

std::vector<double> derivative_matrix(const std::vector<double>& nodes, const std::vector<double>& points) {
  const std::size_t n = nodes.size();
  std::vector<double> m(points.size() * n);
  for (std::size_t q = 0; q < points.size(); ++q)
    lagrange_derivatives(nodes, points[q], &m[q * n]);
  return m;
}

ReferenceBasis::ReferenceBasis(int degree, int quadrature_points) : degree_(degree) {
  if (degree < 1)
    throw std::invalid_argument("ReferenceBasis: degree must be >= 1");
  if (quadrature_points == 0)
    quadrature_points = degree + 1;
  if (quadrature_points < degree + 1)
    throw std::invalid_argument("ReferenceBasis: fewer than degree+1 quadrature points");
  nodes_ = gauss_lobatto(degree + 1);
  quad_ = gauss_legendre(quadrature_points);
  interp_ = interpolation_matrix(nodes_.points, quad_.points);
  deriv_ = derivative_matrix(nodes_.points, quad_.points);
  for (int half = 0; half < 2; ++half) {
    std::vector<double> pts(quad_.points.size());
    for (std::size_t q = 0; q < pts.size(); ++q)
      pts[q] = 0.5 * (quad_.points[q] + half);
    sub_interp_[half] = interpolation_matrix(nodes_.points, pts);
  }
  nodal_deriv_ = derivative_matrix(nodes_.points, nodes_.points);
}

} // namespace ncdg
