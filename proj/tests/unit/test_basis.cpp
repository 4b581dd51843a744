#include "ncdg/dg/basis.hpp"
#include "ncdg/dg/mortar.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace ncdg;

namespace {

double poly(const std::vector<double>& c, double x) {
  double s = 0.0;
  for (std::size_t k = c.size(); k-- > 0;)
    s = s * x + c[k];
  return s;
}

double dpoly(const std::vector<double>& c, double x) {
  double s = 0.0;
  for (std::size_t k = c.size(); k-- > 1;)
    s = s * x + k * c[k];
  return s;
}

} // namespace

TEST_CASE("gauss rules integrate monomials up to their exact degree") {
  for (int np = 1; np <= 8; ++np) {
    const auto g = gauss_legendre(np);
    for (int k = 0; k <= 2 * np - 1; ++k) {
      double s = 0.0;
      for (int i = 0; i < np; ++i)
        s += g.weights[i] * std::pow(g.points[i], k);
      CHECK(s == doctest::Approx(1.0 / (k + 1)).epsilon(1e-13));
    }
  }
  for (int np = 2; np <= 8; ++np) {
    const auto l = gauss_lobatto(np);
    CHECK(l.points.front() == 0.0);
    CHECK(l.points.back() == doctest::Approx(1.0).epsilon(1e-15));
    for (int k = 0; k <= 2 * np - 3; ++k) {
      double s = 0.0;
      for (int i = 0; i < np; ++i)
        s += l.weights[i] * std::pow(l.points[i], k);
      CHECK(s == doctest::Approx(1.0 / (k + 1)).epsilon(1e-13));
    }
  }
}

TEST_CASE("reference basis reproduces polynomials of degree r") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int r = 1; r <= 6; ++r) {
    ReferenceBasis b(r);
    const int n = b.n();
    std::vector<double> c(n);
    for (auto& x : c)
      x = U(rng);
    std::vector<double> nodal(n);
    for (int i = 0; i < n; ++i)
      nodal[i] = poly(c, b.nodes()[i]);
    for (int q = 0; q < n; ++q) {
      double v = 0.0, dv = 0.0;
      for (int i = 0; i < n; ++i) {
        v += b.interp()[q * n + i] * nodal[i];
        dv += b.deriv()[q * n + i] * nodal[i];
      }
      CHECK(std::abs(v - poly(c, b.qpoints()[q])) < 1e-13);
      CHECK(std::abs(dv - dpoly(c, b.qpoints()[q])) < 1e-11);
    }
    // Derivative of constants vanishes.
    for (int q = 0; q < n; ++q) {
      double s = 0.0;
      for (int i = 0; i < n; ++i)
        s += b.deriv()[q * n + i];
      CHECK(std::abs(s) < 1e-12);
    }
    // Sub-face interpolation evaluates at the mapped half-interval points.
    for (int half = 0; half < 2; ++half)
      for (int q = 0; q < n; ++q) {
        double v = 0.0;
        for (int i = 0; i < n; ++i)
          v += b.sub_interp(half)[q * n + i] * nodal[i];
        CHECK(std::abs(v - poly(c, 0.5 * (b.qpoints()[q] + half))) < 1e-13);
      }
  }
}

TEST_CASE("degree below one is rejected") { CHECK_THROWS(ReferenceBasis(0)); }

TEST_CASE("mortar projection is exact and adjoint to the weighted lift") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int dim : {2, 3})
    for (int r : {1, 2, 4}) {
      ReferenceBasis b(r);
      const int n = b.n();
      const int nf = dim == 2 ? n : n * n;
      const int nsub = dim == 2 ? 2 : 4;
      // Polynomial trace of degree r per tangential axis.
      std::vector<double> c0(n), c1(n);
      for (auto& x : c0)
        x = U(rng);
      for (auto& x : c1)
        x = U(rng);
      auto f = [&](double s, double t) { return poly(c0, s) * (dim == 3 ? poly(c1, t) : 1.0); };
      std::vector<double> nodal(nf), vals(nf), tmp(nf), lifted(nf);
      for (int j = 0; j < nf; ++j)
        nodal[j] = f(b.nodes()[j % n], b.nodes()[j / n]);
      for (int sub = 0; sub < nsub; ++sub) {
        mortar_project(b, dim, sub, nodal.data(), vals.data(), tmp.data());
        for (int q = 0; q < nf; ++q) {
          const double s = 0.5 * (b.qpoints()[q % n] + (sub & 1));
          const double t = 0.5 * (b.qpoints()[q / n] + ((sub >> 1) & 1));
          CHECK(std::abs(vals[q] - f(s, t)) < 1e-13);
        }
        // <P u, v> = <u, P^T v>.
        std::vector<double> v(nf), u(nf);
        for (auto& x : v)
          x = U(rng);
        for (auto& x : u)
          x = U(rng);
        mortar_project(b, dim, sub, u.data(), vals.data(), tmp.data());
        mortar_lift(b, dim, sub, v.data(), lifted.data(), tmp.data());
        double lhs = 0.0, rhs = 0.0;
        for (int k = 0; k < nf; ++k) {
          lhs += vals[k] * v[k];
          rhs += u[k] * lifted[k];
        }
        CHECK(std::abs(lhs - rhs) < 1e-13);
      }
      // Constant flux: lifting over all sub-faces equals the conforming lift.
      std::vector<double> w(nf), conf(nf), hang(nf, 0.0);
      for (int q = 0; q < nf; ++q)
        w[q] = b.qweights()[q % n] * (dim == 3 ? b.qweights()[q / n] : 1.0);
      mortar_lift(b, dim, -1, w.data(), conf.data(), tmp.data());
      std::vector<double> ws(nf);
      for (int q = 0; q < nf; ++q)
        ws[q] = w[q] / nsub;
      for (int sub = 0; sub < nsub; ++sub) {
        mortar_lift(b, dim, sub, ws.data(), lifted.data(), tmp.data());
        for (int k = 0; k < nf; ++k)
          hang[k] += lifted[k];
      }
      for (int k = 0; k < nf; ++k)
        CHECK(std::abs(conf[k] - hang[k]) < 1e-13);
    }
}
