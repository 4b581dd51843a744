#include "ncdg/time/split.hpp"

#include "ncdg/common/errors.hpp"
#include "ncdg/physics/providers.hpp"

namespace ncdg {

SplitOperators::SplitOperators(const DGOperator& op, EquationCoefficients eq, PhysicalConstants constants)
    : op_(&op), eq_(eq), constants_(constants) {}

void SplitOperators::set_background(const Field& bg) {
  if (bg.mesh_fingerprint() != geometry().mesh().fingerprint() || bg.nvar() != nvar())
    throw UsageError("background field does not match the operator");
  background_ = bg;
  bg_traces_ = op_->boundary_traces(bg);
  // Auxiliaries evaluated pointwise on the state traces.
  const int d = dim(), na = d + 2;
  const double gm1 = eq_.gamma - 1.0;
  const std::size_t n = bg_traces_.size() / na;
  aux_traces_.resize(n * na);
  p_traces_.resize(n);
  hm_traces_.resize(n * (na - 1));
  for (std::size_t k = 0; k < n; ++k) {
    const double* u = &bg_traces_[k * na];
    double m2 = 0.0;
    for (int a = 0; a < d; ++a)
      m2 += u[1 + a] * u[1 + a];
    const double p = gm1 * (u[d + 1] - 0.5 * eq_.kinetic * m2 / u[0]);
    double* x = &aux_traces_[k * na];
    x[0] = p;
    x[1] = eq_.gamma / gm1 * p / u[0];
    for (int a = 0; a < d; ++a)
      x[2 + a] = u[1 + a];
    p_traces_[k] = p;
    for (int v = 1; v < na; ++v)
      hm_traces_[k * (na - 1) + v - 1] = x[v];
  }
  has_background_ = true;
}

void SplitOperators::set_sponge(std::vector<double> sigma) {
  const std::size_t expect = std::size_t(geometry().mesh().num_leaves()) * geometry().nodes_per_leaf();
  if (sigma.size() != expect)
    throw UsageError("sponge field has the wrong size");
  if (!has_background_)
    throw UsageError("sponge needs a background state");
  sigma_ = std::move(sigma);
}

void SplitOperators::add_gravity(const Field& U, Field& R) const {
  const int d = dim();
  const int nn = geometry().nodes_per_leaf();
  const double G = eq_.gravity, K = eq_.kinetic;
  op_->for_each_leaf([&](int e) {
    const double* rho = U.var(e, 0);
    const double* w = U.var(e, d);
    double* Rw = R.var(e, d);
    double* RE = R.var(e, d + 1);
    for (int i = 0; i < nn; ++i) {
      Rw[i] -= G * rho[i];
      RE[i] -= K * G * w[i];
    }
  });
}

void SplitOperators::add_sources(double t, const Field& U, Field& R, bool with_gravity) const {
  const int d = dim();
  const int nn = geometry().nodes_per_leaf();
  const bool sponge = !sigma_.empty();
  if (with_gravity)
    add_gravity(U, R);
  if (sponge)
    op_->for_each_leaf([&](int e) {
      const double* s = &sigma_[std::size_t(e) * nn];
      for (int v = 1; v < d + 2; ++v) {
        const double* u = U.var(e, v);
        const double* b = background_.var(e, v);
        double* r = R.var(e, v);
        for (int i = 0; i < nn; ++i)
          r[i] -= s[i] * (u[i] - b[i]);
      }
    });
  if (source_)
    source_(t, U, R);
}

void SplitOperators::explicit_residual(double t, const Field& U, Field& R, std::vector<double>* boundary_flux) const {
  ScopedBlock sb(op_->timer(), Block::ExplicitResidual);
  ExplicitEulerFlux flux{dim(), eq_};
  DivergenceOptions opt;
  opt.scale = -1.0;
  if (has_background_) {
    opt.boundary_values = &bg_traces_;
    opt.boundary_nvar = nvar();
  }
  if (boundary_flux)
    opt.boundary_flux = &bflux_;
  op_->weak_divergence(U, R, flux, opt);
  if (boundary_flux) {
    boundary_flux->assign(nvar(), 0.0);
    const int nl = geometry().mesh().num_leaves();
    for (int e = 0; e < nl; ++e)
      for (int v = 0; v < nvar(); ++v)
        (*boundary_flux)[v] += bflux_[std::size_t(e) * nvar() + v];
  }
  add_sources(t, U, R, gravity_ && !implicit_gravity_);
}

void SplitOperators::auxiliary(const Field& U, Field& aux) const {
  const int d = dim();
  const int nn = geometry().nodes_per_leaf();
  if (!aux.compatible(U) || aux.nvar() != d + 2)
    aux = Field(geometry(), d + 2);
  const double gm1 = eq_.gamma - 1.0;
  const double K = eq_.kinetic;
  op_->for_each_leaf([&](int e) {
    const double* rho = U.var(e, 0);
    const double* E = U.var(e, d + 1);
    double* p = aux.var(e, 0);
    double* h = aux.var(e, 1);
    for (int i = 0; i < nn; ++i) {
      double m2 = 0.0;
      for (int a = 0; a < d; ++a) {
        const double m = U.var(e, 1 + a)[i];
        m2 += m * m;
        aux.var(e, 2 + a)[i] = m;
      }
      p[i] = gm1 * (E[i] - 0.5 * K * m2 / rho[i]);
      h[i] = eq_.gamma / gm1 * p[i] / rho[i];
    }
  });
}

void SplitOperators::implicit_residual(const Field& U, Field& R) const {
  Field aux;
  auxiliary(U, aux);
  ImplicitEulerFlux flux{dim(), eq_.pressure};
  DivergenceOptions opt;
  opt.scale = -1.0;
  opt.out_offset = 1;
  if (has_background_) {
    opt.boundary_values = &aux_traces_;
    opt.boundary_nvar = dim() + 2;
  }
  op_->weak_divergence(aux, R, flux, opt);
  op_->for_each_leaf([&](int e) {
    double* r = R.var(e, 0);
    for (int i = 0; i < U.nodes(); ++i)
      r[i] = 0.0;
  });
  if (implicit_gravity())
    add_gravity(U, R);
}

void SplitOperators::monolithic_residual(double t, const Field& U, Field& R) const {
  const int d = dim();
  Field aux;
  auxiliary(U, aux);
  Field in(geometry(), d + 4);
  const int nn = geometry().nodes_per_leaf();
  for (int e = 0; e < in.leaves(); ++e) {
    for (int v = 0; v < d + 2; ++v)
      std::copy(U.var(e, v), U.var(e, v) + nn, in.var(e, v));
    std::copy(aux.var(e, 0), aux.var(e, 0) + nn, in.var(e, d + 2));
    std::copy(aux.var(e, 1), aux.var(e, 1) + nn, in.var(e, d + 3));
  }
  MonolithicEulerFlux flux{d, eq_, constants_};
  flux.constants.gamma = eq_.gamma;
  DivergenceOptions opt;
  opt.scale = -1.0;
  std::vector<double> traces;
  if (has_background_) {
    opt.boundary_values = &bg_traces_;
    opt.boundary_nvar = nvar();
  }
  op_->weak_divergence(in, R, flux, opt);
  add_sources(t, U, R, gravity_);
}

void SplitOperators::gradient(const Field& p, Field& G, bool homogeneous) const {
  GradientFlux flux{dim()};
  DivergenceOptions opt;
  if (has_background_ && !homogeneous) {
    opt.boundary_values = &p_traces_;
    opt.boundary_nvar = 1;
  }
  op_->weak_divergence(p, G, flux, opt);
}

void SplitOperators::weighted_divergence(const Field& hm, Field& D, bool homogeneous) const {
  WeightedDivergenceFlux flux{dim()};
  DivergenceOptions opt;
  if (has_background_ && !homogeneous) {
    opt.boundary_values = &hm_traces_;
    opt.boundary_nvar = dim() + 1;
  }
  op_->weak_divergence(hm, D, flux, opt);
}

} // namespace ncdg
