#include "ncdg/dg/field.hpp"

#include "ncdg/common/errors.hpp"
#include "ncdg/dg/tensor.hpp"

#include <cmath>
#include <sstream>

namespace ncdg {

Field::Field(const MeshGeometry& geo, int nvar)
    : nvar_(nvar), nn_(geo.nodes_per_leaf()), nleaves_(geo.mesh().num_leaves()), degree_(geo.basis().degree()),
      fingerprint_(geo.mesh().fingerprint()), values_(std::size_t(nvar) * nn_ * nleaves_, 0.0) {}

void Field::fill(double v) { std::fill(values_.begin(), values_.end(), v); }

Field project_initial_data(const MeshGeometry& geo, const PointFunction& f, int nvar) {
  Field out(geo, nvar);
  const int nn = geo.nodes_per_leaf();
  const int d = geo.dim();
  std::vector<double> buf(nvar);
  for (int e = 0; e < out.leaves(); ++e) {
    const auto xs = geo.node_coords(e);
    for (int i = 0; i < nn; ++i) {
      std::array<double, 3> x{0, 0, 0};
      for (int b = 0; b < d; ++b)
        x[b] = xs[i * d + b];
      f(x, buf.data());
      for (int v = 0; v < nvar; ++v) {
        if (!std::isfinite(buf[v])) {
          std::ostringstream os;
          os << "initial data not finite: variable " << v << " at (" << x[0] << ", " << x[1] << ", " << x[2]
             << "), leaf " << e << " node " << i;
          throw InputError(os.str());
        }
        out.var(e, v)[i] = buf[v];
      }
    }
  }
  return out;
}

void interpolate_to_quadrature(const MeshGeometry& geo, const Field& f, int leaf, double* out) {
  const int n = geo.basis().n(), nq = geo.basis().nq();
  const int d = geo.dim();
  const int nqv = geo.qpoints_per_leaf();
  thread_local std::vector<double> tmp;
  tmp.resize(nqv);
  for (int v = 0; v < f.nvar(); ++v)
    interpolate_tensor(geo.basis().interp(), f.var(leaf, v), out + v * nqv, tmp.data(), nq, n, d);
}

double global_inner_product(const MeshGeometry& geo, const Field& a, const Field& b) {
  if (!a.compatible(b) || a.nvar() != b.nvar() || a.mesh_fingerprint() != geo.mesh().fingerprint())
    throw UsageError("global_inner_product: fields live on different meshes");
  const int nn = geo.qpoints_per_leaf();
  std::vector<double> qa(std::size_t(a.nvar()) * nn), qb(qa.size());
  double total = 0.0;
  for (int e = 0; e < a.leaves(); ++e) {
    interpolate_to_quadrature(geo, a, e, qa.data());
    interpolate_to_quadrature(geo, b, e, qb.data());
    const auto w = geo.jxw(e);
    double s = 0.0;
    for (int v = 0; v < a.nvar(); ++v)
      for (int q = 0; q < nn; ++q)
        s += w[q] * qa[v * nn + q] * qb[v * nn + q];
    total += s;
  }
  return total;
}

std::vector<double> integrate_conserved(const MeshGeometry& geo, const Field& f) {
  if (f.mesh_fingerprint() != geo.mesh().fingerprint())
    throw UsageError("integrate_conserved: field lives on a different mesh");
  const int nn = geo.qpoints_per_leaf();
  std::vector<double> q(std::size_t(f.nvar()) * nn);
  std::vector<double> totals(f.nvar(), 0.0);
  for (int e = 0; e < f.leaves(); ++e) {
    interpolate_to_quadrature(geo, f, e, q.data());
    const auto w = geo.jxw(e);
    for (int v = 0; v < f.nvar(); ++v) {
      double s = 0.0;
      for (int k = 0; k < nn; ++k)
        s += w[k] * q[v * nn + k];
      totals[v] += s;
    }
  }
  return totals;
}

void evaluate_at(const MeshGeometry& geo, const Field& f, int leaf, const std::array<double, 3>& xi, double* out) {
  const int n = geo.basis().n();
  const int d = geo.dim();
  std::vector<double> p0(n), p1(n), p2(n, 1.0);
  lagrange_values(geo.basis().nodes(), xi[0], p0.data());
  lagrange_values(geo.basis().nodes(), xi[1], p1.data());
  if (d == 3)
    lagrange_values(geo.basis().nodes(), xi[2], p2.data());
  const int n2 = d == 3 ? n : 1;
  for (int v = 0; v < f.nvar(); ++v) {
    const double* u = f.var(leaf, v);
    double s = 0.0;
    for (int k = 0; k < n2; ++k)
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
          s += u[i + n * (j + n * k)] * p0[i] * p1[j] * (d == 3 ? p2[k] : 1.0);
    out[v] = s;
  }
}

} // namespace ncdg
