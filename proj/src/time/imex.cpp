#include "ncdg/time/imex.hpp"

#include "ncdg/common/errors.hpp"

#include <cmath>
#include <memory>
#include <numeric>
#include <sstream>

namespace ncdg {

bool ButcherTableau::stiffly_accurate() const {
  const int s = stages;
  for (int j = 0; j < s; ++j)
    if (std::abs(ai(s - 1, j) - b_imp[j]) > 1e-15 || std::abs(ae(s - 1, j) - b_exp[j]) > 1e-15)
      return false;
  return true;
}

void ButcherTableau::validate() const {
  const int s = stages;
  if (s < 1 || int(A_exp.size()) != s * s || int(A_imp.size()) != s * s || int(b_exp.size()) != s ||
      int(b_imp.size()) != s || int(c_exp.size()) != s || int(c_imp.size()) != s)
    throw ConfigError("tableau " + name + ": inconsistent sizes");
  auto near = [](double a, double b) { return std::abs(a - b) <= 1e-14; };
  double sb = 0, sbe = 0, bc = 0, bce = 0;
  for (int i = 0; i < s; ++i) {
    sb += b_imp[i];
    sbe += b_exp[i];
    bc += b_imp[i] * c_imp[i];
    bce += b_exp[i] * c_exp[i];
    double rs = 0, rse = 0;
    for (int j = 0; j < s; ++j) {
      rs += ai(i, j);
      rse += ae(i, j);
      if (j > i && ai(i, j) != 0.0)
        throw ConfigError("tableau " + name + ": implicit part is not lower triangular");
      if (j >= i && ae(i, j) != 0.0)
        throw ConfigError("tableau " + name + ": explicit part is not strictly lower triangular");
    }
    if (!near(rs, c_imp[i]) || !near(rse, c_exp[i]))
      throw ConfigError("tableau " + name + ": c is not the row sum of A");
  }
  if (!near(sb, 1.0) || !near(sbe, 1.0))
    throw ConfigError("tableau " + name + ": weights do not sum to one");
  if (!near(bc, 0.5) || !near(bce, 0.5))
    throw ConfigError("tableau " + name + ": second-order condition fails");
}

ButcherTableau ButcherTableau::ars222() {
  const double g = 1.0 - 1.0 / std::sqrt(2.0);
  const double d = 1.0 - 1.0 / (2.0 * g);
  ButcherTableau t;
  t.name = "ars222";
  t.stages = 3;
  t.A_exp = {0, 0, 0, g, 0, 0, d, 1 - d, 0};
  t.b_exp = {d, 1 - d, 0};
  t.c_exp = {0, g, 1};
  t.A_imp = {0, 0, 0, 0, g, 0, 0, 1 - g, g};
  t.b_imp = {0, 1 - g, g};
  t.c_imp = {0, g, 1};
  return t;
}

ButcherTableau ButcherTableau::by_name(const std::string& name) {
  if (name == "ars222")
    return ars222();
  throw ConfigError("unknown IMEX tableau '" + name + "'");
}

void ImplicitSolveConfig::validate() const {
  if (!(picard_tol > 0 && picard_tol < 1) || !(krylov_tol > 0 && krylov_tol < 1))
    throw ConfigError("solver tolerances must lie in (0,1)");
  if (picard_max < 1 || krylov_restart < 1 || krylov_max < 1 || preconditioner_refresh < 1)
    throw ConfigError("solver iteration limits must be >= 1");
}

int StepStats::total_picard() const { return std::accumulate(picard.begin(), picard.end(), 0); }
int StepStats::total_krylov() const { return std::accumulate(krylov.begin(), krylov.end(), 0); }

ImexIntegrator::ImexIntegrator(const SplitOperators& ops, ButcherTableau tableau, ImplicitSolveConfig cfg)
    : ops_(&ops), tab_(std::move(tableau)), cfg_(cfg) {
  tab_.validate();
  cfg_.validate();
  space_ = KrylovSpace::blocked(block_parallel_for(), ops.geometry().mesh().num_leaves(),
                                ops.geometry().nodes_per_leaf());
}

BlockParallelFor ImexIntegrator::block_parallel_for() const {
  const DGOperator* op = &ops_->op();
  return [op](const std::function<void(int, int)>& body) {
    const Partition& part = op->partition();
    op->pool().run([&](int w) { body(part.first(w), part.last(w)); });
  };
}

LinearAction ImexIntegrator::helmholtz_action(double a_dt, const Field& h, bool affine) const {
  const SplitOperators* ops = ops_;
  const MeshGeometry& geo = ops->geometry();
  const int d = ops->dim();
  struct Work {
    Field p, G, hg, D;
  };
  auto work = std::make_shared<Work>();
  work->p = Field(geo, 1);
  work->G = Field(geo, d);
  work->hg = Field(geo, d + 1);
  work->D = Field(geo, 1);
  const double coef = (ops->equations().gamma - 1.0) * a_dt * a_dt * ops->equations().pressure;
  const double kg = ops->implicit_gravity() ? ops->equations().kinetic * ops->equations().gravity : 0.0;
  const int nn = geo.nodes_per_leaf();
  const Field* hp = &h;
  return [ops, work, coef, kg, nn, d, hp, affine](std::span<const double> x, std::span<double> y) {
    std::copy(x.begin(), x.end(), work->p.values().begin());
    ops->gradient(work->p, work->G, !affine);
    ops->op().for_each_leaf([&](int e) {
      std::copy(hp->var(e, 0), hp->var(e, 0) + nn, work->hg.var(e, 0));
      for (int a = 0; a < d; ++a)
        std::copy(work->G.var(e, a), work->G.var(e, a) + nn, work->hg.var(e, 1 + a));
    });
    ops->weighted_divergence(work->hg, work->D, true);
    const auto& D = work->D.values();
    ops->op().for_each_leaf([&](int e) {
      const std::size_t o = std::size_t(e) * nn;
      const double* gz = work->G.var(e, d - 1);
      for (int i = 0; i < nn; ++i)
        y[o + i] = x[o + i] - coef * (D[o + i] + kg * gz[i]);
    });
  };
}

void ImexIntegrator::solve_stage(double a_dt, const Field& Ustar, Field& Ui, int& picard, int& krylov,
                                 double& incr) {
  ScopedBlock sb(ops_->op().timer(), Block::ImplicitFixedPoint);
  const SplitOperators& S = *ops_;
  const MeshGeometry& geo = S.geometry();
  const DGOperator& op = S.op();
  const int d = S.dim();
  const int nn = geo.nodes_per_leaf();
  const double gamma = S.equations().gamma, gm1 = gamma - 1.0;
  const double Kc = S.equations().kinetic, Pc = S.equations().pressure;
  const double g = S.implicit_gravity() ? S.equations().gravity : 0.0;
  // Momentum known before the pressure solve: m* - a dt g rho k.
  Field mt(geo, d);
  op.for_each_leaf([&](int e) {
    for (int a = 0; a < d; ++a)
      std::copy(Ustar.var(e, 1 + a), Ustar.var(e, 1 + a) + nn, mt.var(e, a));
    const double* rho = Ustar.var(e, 0);
    double* mz = mt.var(e, d - 1);
    for (int i = 0; i < nn; ++i)
      mz[i] -= a_dt * g * rho[i];
  });

  Field p(geo, 1), h(geo, 1), hm(geo, d + 1), G(geo, d), D(geo, 1), rhs(geo, 1), x(geo, 1);
  // Pressure of the initial iterate.
  op.for_each_leaf([&](int e) {
    for (int i = 0; i < nn; ++i) {
      double m2 = 0.0;
      for (int a = 0; a < d; ++a)
        m2 += Ui.var(e, 1 + a)[i] * Ui.var(e, 1 + a)[i];
      p.var(e, 0)[i] = gm1 * (Ui.var(e, d + 1)[i] - 0.5 * Kc * m2 / Ustar.var(e, 0)[i]);
    }
  });

  GmresOptions gopt;
  gopt.tol = cfg_.krylov_tol;
  gopt.restart = cfg_.krylov_restart;
  gopt.max_iter = cfg_.krylov_max;
  BlockParallelFor pf = block_parallel_for();
  picard = 0;
  krylov = 0;
  incr = 0.0;
  bool converged = false;
  for (int k = 0; k < cfg_.picard_max; ++k) {
    ++picard;
    // Freeze h and the kinetic energy at the current iterate.
    op.for_each_leaf([&](int e) {
      const double* rho = Ustar.var(e, 0);
      for (int i = 0; i < nn; ++i) {
        double m2 = 0.0;
        for (int a = 0; a < d; ++a)
          m2 += Ui.var(e, 1 + a)[i] * Ui.var(e, 1 + a)[i];
        h.var(e, 0)[i] = gamma / gm1 * p.var(e, 0)[i] / rho[i];
        hm.var(e, 0)[i] = h.var(e, 0)[i];
        for (int a = 0; a < d; ++a)
          hm.var(e, 1 + a)[i] = mt.var(e, a)[i];
        rhs.var(e, 0)[i] = -0.5 * m2 / rho[i];
      }
    });
    S.weighted_divergence(hm, D);
    op.for_each_leaf([&](int e) {
      for (int i = 0; i < nn; ++i)
        rhs.var(e, 0)[i] = gm1 * (Ustar.var(e, d + 1)[i] + Kc * rhs.var(e, 0)[i] - a_dt * D.var(e, 0)[i] -
                                  a_dt * Kc * g * mt.var(e, d - 1)[i]);
    });
    const LinearAction A = helmholtz_action(a_dt, h);
    {
      ScopedBlock kb(op.timer(), Block::Krylov);
      const LinearAction* M = nullptr;
      LinearAction Mfun;
      if (cfg_.preconditioner) {
        if (precond_.blocks() == 0 || steps_since_refresh_ >= cfg_.preconditioner_refresh ||
            std::abs(precond_adt_ - a_dt) > 1e-12 * a_dt) {
          precond_ = probe_block_diagonal(A, geo.mesh(), nn, 2);
          precond_adt_ = a_dt;
          steps_since_refresh_ = 0;
        }
        Mfun = [this, &pf](std::span<const double> in, std::span<double> out) { precond_.apply(in, out, &pf); };
        M = &Mfun;
      }
      // Solve for the correction so the tolerance applies to the current residual.
      // Floor at round-off of the full system: the late Picard corrections are tiny.
      gopt.abs_tol = 1e-12 * std::sqrt(op.dot(rhs.values(), rhs.values()));
      helmholtz_action(a_dt, h, true)(p.values(), x.values());
      for (std::size_t i = 0; i < x.size(); ++i)
        rhs.values()[i] -= x.values()[i];
      std::fill(x.values().begin(), x.values().end(), 0.0);
      const KrylovStats ks = gmres(A, rhs.values(), x.values(), gopt, M, &space_);
      for (std::size_t i = 0; i < x.size(); ++i)
        x.values()[i] += p.values()[i];
      krylov += ks.iterations;
      if (!ks.converged) {
        std::ostringstream os;
        os << "GMRES did not converge: " << ks.iterations << " iterations, relative residual " << ks.residual;
        throw SolverError(os.str());
      }
    }
    // Back substitution.
    S.gradient(x, G);
    op.for_each_leaf([&](int e) {
      for (int a = 0; a < d; ++a)
        for (int i = 0; i < nn; ++i) {
          const double m = mt.var(e, a)[i] - a_dt * Pc * G.var(e, a)[i];
          Ui.var(e, 1 + a)[i] = m;
          hm.var(e, 1 + a)[i] = m;
        }
      std::copy(Ustar.var(e, 0), Ustar.var(e, 0) + nn, Ui.var(e, 0));
    });
    S.weighted_divergence(hm, D);
    op.for_each_leaf([&](int e) {
      for (int i = 0; i < nn; ++i)
        Ui.var(e, d + 1)[i] = Ustar.var(e, d + 1)[i] - a_dt * D.var(e, 0)[i] - a_dt * Kc * g * Ui.var(e, d)[i];
    });
    // Relative pressure increment.
    Field diff(geo, 1);
    for (std::size_t i = 0; i < diff.size(); ++i)
      diff.values()[i] = x.values()[i] - p.values()[i];
    const double num = std::sqrt(op.dot(diff.values(), diff.values()));
    const double den = std::sqrt(op.dot(x.values(), x.values()));
    incr = den > 0 ? num / den : num;
    p.values() = x.values();
    if (incr <= cfg_.picard_tol) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    std::ostringstream os;
    os << "pressure fixed point did not converge in " << cfg_.picard_max << " iterations (increment " << incr
       << ")";
    throw SolverError(os.str());
  }
}

StepStats ImexIntegrator::step(double t, double dt, Field& U) {
  const SplitOperators& S = *ops_;
  const MeshGeometry& geo = S.geometry();
  const int s = tab_.stages;
  const int nv = S.nvar();
  const bool sa = tab_.stiffly_accurate();
  StepStats st;
  st.t = t;
  st.dt = dt;

  std::vector<Field> E(s), I(s);
  const Field Un = U;
  Field Ustar(geo, nv), Ui(geo, nv);
  std::vector<double> bflux;
  for (int i = 0; i < s; ++i) {
    // Known part of the stage.
    Ustar.values() = Un.values();
    for (int j = 0; j < i; ++j) {
      const double ce = dt * tab_.ae(i, j), ci = dt * tab_.ai(i, j);
      if (ce != 0.0) {
        const auto& ev = E[j].values();
        S.op().for_each_leaf([&](int e) {
          const std::size_t o = std::size_t(e) * nv * geo.nodes_per_leaf(), n = std::size_t(nv) * geo.nodes_per_leaf();
          for (std::size_t k = o; k < o + n; ++k)
            Ustar.values()[k] += ce * ev[k];
        });
      }
      if (ci != 0.0) {
        const auto& iv = I[j].values();
        S.op().for_each_leaf([&](int e) {
          const std::size_t o = std::size_t(e) * nv * geo.nodes_per_leaf(), n = std::size_t(nv) * geo.nodes_per_leaf();
          for (std::size_t k = o; k < o + n; ++k)
            Ustar.values()[k] += ci * iv[k];
        });
      }
    }
    const double aii = tab_.ai(i, i);
    Ui.values() = Ustar.values();
    if (aii != 0.0) {
      int pic = 0, kry = 0;
      double inc = 0.0;
      solve_stage(aii * dt, Ustar, Ui, pic, kry, inc);
      st.picard.push_back(pic);
      st.krylov.push_back(kry);
      st.increment.push_back(inc);
    }
    check_positivity(Ui, S.constants(), S.equations().kinetic);

    bool need_e = !sa && tab_.b_exp[i] != 0.0;
    bool need_i = !sa && tab_.b_imp[i] != 0.0;
    for (int k = i + 1; k < s; ++k) {
      need_e = need_e || tab_.ae(k, i) != 0.0;
      need_i = need_i || tab_.ai(k, i) != 0.0;
    }
    if (need_e) {
      E[i] = Field(geo, nv);
      S.explicit_residual(t + tab_.c_exp[i] * dt, Ui, E[i], &bflux);
      if (tab_.b_exp[i] != 0.0)
        st.boundary_mass += dt * tab_.b_exp[i] * bflux[0];
    }
    if (need_i) {
      I[i] = Field(geo, nv);
      if (aii != 0.0) {
        const double inv = 1.0 / (aii * dt);
        for (std::size_t k = 0; k < Ui.size(); ++k)
          I[i].values()[k] = (Ui.values()[k] - Ustar.values()[k]) * inv;
      } else {
        S.implicit_residual(Ui, I[i]);
      }
    }
  }
  if (sa) {
    U.values() = Ui.values();
  } else {
    U.values() = Un.values();
    for (int j = 0; j < s; ++j) {
      if (tab_.b_exp[j] != 0.0)
        for (std::size_t k = 0; k < U.size(); ++k)
          U.values()[k] += dt * tab_.b_exp[j] * E[j].values()[k];
      if (tab_.b_imp[j] != 0.0)
        for (std::size_t k = 0; k < U.size(); ++k)
          U.values()[k] += dt * tab_.b_imp[j] * I[j].values()[k];
    }
  }
  ++steps_since_refresh_;
  return st;
}

void rk4_step(const SplitOperators& ops, double t, double dt, Field& U) {
  const MeshGeometry& geo = ops.geometry();
  const int nv = ops.nvar();
  auto rhs = [&](double tt, const Field& X, Field& R) {
    Field Ri(geo, nv);
    ops.explicit_residual(tt, X, R);
    ops.implicit_residual(X, Ri);
    for (std::size_t k = 0; k < R.size(); ++k)
      R.values()[k] += Ri.values()[k];
  };
  Field k1(geo, nv), k2(geo, nv), k3(geo, nv), k4(geo, nv), X(geo, nv);
  rhs(t, U, k1);
  for (std::size_t k = 0; k < U.size(); ++k)
    X.values()[k] = U.values()[k] + 0.5 * dt * k1.values()[k];
  rhs(t + 0.5 * dt, X, k2);
  for (std::size_t k = 0; k < U.size(); ++k)
    X.values()[k] = U.values()[k] + 0.5 * dt * k2.values()[k];
  rhs(t + 0.5 * dt, X, k3);
  for (std::size_t k = 0; k < U.size(); ++k)
    X.values()[k] = U.values()[k] + dt * k3.values()[k];
  rhs(t + dt, X, k4);
  for (std::size_t k = 0; k < U.size(); ++k)
    U.values()[k] += dt / 6.0 * (k1.values()[k] + 2 * k2.values()[k] + 2 * k3.values()[k] + k4.values()[k]);
}

TimeLoopResult run_time_loop(Field& U, double dt, double T_f, const StepFunction& step, const StepCallback& cb,
                             bool rethrow) {
  if (!(dt > 0.0) || !(T_f > 0.0))
    throw ConfigError("time step and final time must be positive");
  TimeLoopResult r;
  double t = 0.0;
  for (;;) {
    const double remaining = T_f - t;
    if (remaining <= 1e-12 * T_f)
      break;
    double h = dt;
    bool last = false;
    if (remaining <= dt * (1.0 + 1e-10)) {
      h = remaining;
      last = true;
    }
    StepStats st;
    try {
      st = step(t, h, U);
    } catch (const std::exception& ex) {
      r.failed = true;
      r.error = ex.what();
      r.t_final = t;
      if (rethrow)
        throw;
      return r;
    }
    ++r.steps;
    t = last ? T_f : r.steps * dt;
    if (cb)
      cb(r.steps, t, U, st);
    if (last)
      break;
  }
  r.t_final = t;
  return r;
}

} // namespace ncdg
