#include "ncdg/cases/cases.hpp"
#include "ncdg/common/errors.hpp"
#include "ncdg/physics/providers.hpp"
#include "ncdg/time/imex.hpp"

#include <Eigen/Dense>
#include <doctest.h>

#include <cmath>
#include <memory>

using namespace ncdg;

namespace {

// Small hill setup with a refined patch over the hill and far-field sides.
struct HillFixture {
  HillCaseConfig cfg;
  ForestMesh mesh;
  ReferenceBasis basis;
  TerrainMapping map;
  MeshGeometry geo;
  Partition part;
  WorkerPool pool;
  DGOperator op;
  SplitOperators split;

  static HillCaseConfig make_cfg() {
    HillCaseConfig c = HillCaseConfig::paper2d();
    c.extents = {16000.0, 8000.0, 0.0};
    c.x_c = 8000.0;
    return c;
  }
  static ForestMesh make_mesh(std::array<int, 3> roots, bool refine) {
    auto m = build_uniform_mesh(2, {16000.0, 8000.0, 0}, roots);
    if (refine)
      m = refine_region(m, [](const LeafBox& b) { return b.lower[1] == 0.0 && b.lower[0] >= 4000.0 && b.upper[0] <= 12000.0; });
    return m;
  }
  static BoundaryConditions bc(bool farfield) {
    BoundaryConditions b;
    if (farfield)
      b.kind[0] = b.kind[1] = BoundaryKind::FarField;
    return b;
  }
  HillFixture(int workers = 1, int degree = 3, std::array<int, 3> roots = {4, 2, 1}, bool refine = true,
              bool farfield = true)
      : cfg(make_cfg()), mesh(make_mesh(roots, refine)), basis(degree),
        map(mesh, [this](double x, double y) { return hill_profile(x, y, cfg); }, 8000.0, degree),
        geo(mesh, basis, map), part(partition_leaves(mesh, workers)), pool(workers), op(geo, part, pool, bc(farfield)),
        split(op, EquationCoefficients::dimensional(cfg.constants), cfg.constants) {
    split.set_background(hydrostatic_field(geo, cfg));
  }

  // Background plus a smooth bubble.
  Field perturbed() const {
    Field U = hydrostatic_field(geo, cfg);
    for (int e = 0; e < U.leaves(); ++e) {
      auto xs = geo.node_coords(e);
      for (int i = 0; i < U.nodes(); ++i) {
        const double dx = (xs[2 * i] - 7000.0) / 1500.0, dz = (xs[2 * i + 1] - 3000.0) / 1500.0;
        const double bump = std::exp(-dx * dx - dz * dz);
        U.var(e, 0)[i] *= 1.0 + 0.01 * bump;
        U.var(e, 2)[i] += 0.5 * bump * U.var(e, 0)[i];
        U.var(e, 3)[i] *= 1.0 + 0.003 * bump;
      }
    }
    return U;
  }
};

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v)
    m = std::max(m, std::abs(x));
  return m;
}

} // namespace

TEST_CASE("ARS(2,2,2) tableau") {
  const auto t = ButcherTableau::ars222();
  CHECK_NOTHROW(t.validate());
  CHECK(t.stiffly_accurate());
  const double g = 1.0 - 1.0 / std::sqrt(2.0);
  CHECK(t.ai(1, 1) == doctest::Approx(g));
  CHECK(t.ai(2, 2) == doctest::Approx(g));
  CHECK(t.ae(2, 0) == doctest::Approx(1.0 - 1.0 / (2.0 * g)));
  CHECK(t.c_exp[2] == 1.0);
  auto bad = t;
  bad.b_exp[0] += 0.1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = t;
  bad.A_imp[1 * 3 + 2] = 0.1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CHECK_THROWS_AS(ButcherTableau::by_name("rk4"), ConfigError);
  CHECK(ButcherTableau::by_name("ars222").stages == 3);
}

TEST_CASE("implicit solve configuration validation") {
  ImplicitSolveConfig c;
  CHECK_NOTHROW(c.validate());
  c.picard_max = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = ImplicitSolveConfig{};
  c.krylov_tol = 2.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("time loop lands exactly on the final time") {
  auto m = build_uniform_mesh(2, {1, 1, 0}, {1, 1, 1});
  ReferenceBasis b(1);
  TerrainMapping map(m);
  MeshGeometry g(m, b, map);
  Field U(g, 1);
  std::vector<double> dts;
  auto step = [&](double, double dt, Field&) {
    dts.push_back(dt);
    return StepStats{};
  };
  const auto r = run_time_loop(U, 0.4, 1.0, step);
  CHECK(r.steps == 3);
  CHECK(r.t_final == 1.0);
  REQUIRE(dts.size() == 3);
  CHECK(dts[2] == doctest::Approx(0.2));
  dts.clear();
  CHECK(run_time_loop(U, 0.5, 1.0, step).steps == 2);
  CHECK(dts.back() == 0.5);
  int seen = 0;
  auto failing = [&](double, double, Field&) -> StepStats {
    if (++seen == 3)
      throw SolverError("boom");
    return {};
  };
  const auto f = run_time_loop(U, 0.1, 1.0, failing);
  CHECK(f.failed);
  CHECK(f.steps == 2);
  CHECK(f.error == "boom");
  seen = 0;
  CHECK_THROWS_AS(run_time_loop(U, 0.1, 1.0, failing, {}, true), SolverError);
  CHECK_THROWS_AS(run_time_loop(U, -0.1, 1.0, failing), ConfigError);
}

TEST_CASE("split residuals add up to the monolithic residual") {
  HillFixture fx;
  CHECK(fx.mesh.num_hanging_faces() > 0);
  fx.split.set_sponge(sponge_field(fx.geo, fx.cfg.extents, SpongeConfig{2000.0, 3000.0, 0.05, true, true}));
  const Field U = fx.perturbed();
  for (const bool implicit_gravity : {true, false}) {
    CAPTURE(implicit_gravity);
    fx.split.set_implicit_gravity(implicit_gravity);
    Field E(fx.geo, 4), I(fx.geo, 4), M(fx.geo, 4);
    fx.split.explicit_residual(0.0, U, E);
    fx.split.implicit_residual(U, I);
    fx.split.monolithic_residual(0.0, U, M);
    // Differences measured against max |F_v| / H_min, as for free-stream preservation.
    std::array<double, 4> fscale{0, 0, 0, 0};
    for (int e = 0; e < U.leaves(); ++e)
      for (int i = 0; i < U.nodes(); ++i) {
        const double u[4] = {U.var(e, 0)[i], U.var(e, 1)[i], U.var(e, 2)[i], U.var(e, 3)[i]};
        double F[8];
        inviscid_flux(conserved_to_primitive(u, 2, fx.cfg.constants), 2, fx.split.equations(), F);
        for (int v = 0; v < 4; ++v)
          fscale[v] = std::max({fscale[v], std::abs(F[2 * v]), std::abs(F[2 * v + 1])});
      }
    double worst = 0.0;
    for (int v = 0; v < 4; ++v) {
      double diff = 0.0;
      for (int e = 0; e < U.leaves(); ++e)
        for (int i = 0; i < U.nodes(); ++i)
          diff = std::max(diff, std::abs(E.var(e, v)[i] + I.var(e, v)[i] - M.var(e, v)[i]));
      worst = std::max(worst, diff * fx.geo.min_diameter() / fscale[v]);
    }
    CHECK(worst < 1e-12);
  }
}

TEST_CASE("Schur-complement operator equals the finite-difference Jacobian of the stage map") {
  HillFixture fx(1, 3, {2, 1, 1}, false, true);
  const SplitOperators& S = fx.split;
  const ButcherTableau tab = ButcherTableau::ars222();
  ImexIntegrator imex(S, tab, ImplicitSolveConfig{});
  const Field Ustar = fx.perturbed();
  const int nn = fx.geo.nodes_per_leaf(), nl = fx.mesh.num_leaves(), n = nn * nl;
  const double a_dt = 3.0;
  const double gm1 = 0.4;
  const double g = S.implicit_gravity() ? S.equations().gravity : 0.0;
  Field aux;
  S.auxiliary(Ustar, aux);
  Field h(fx.geo, 1);
  for (int e = 0; e < nl; ++e)
    std::copy(aux.var(e, 1), aux.var(e, 1) + nn, h.var(e, 0));

  // Pressure -> stage energy -> pressure residual through the implicit flux.
  ImplicitEulerFlux flux{2, 1.0};
  auto phi = [&](const std::vector<double>& p) {
    Field in = aux, R(fx.geo, 3);
    for (int e = 0; e < nl; ++e)
      std::copy(&p[e * nn], &p[e * nn] + nn, in.var(e, 0));
    DivergenceOptions opt;
    opt.scale = -1.0;
    fx.op.weak_divergence(in, R, flux, opt);
    for (int e = 0; e < nl; ++e)
      for (int a = 0; a < 2; ++a)
        for (int i = 0; i < nn; ++i)
          in.var(e, 2 + a)[i] = Ustar.var(e, 1 + a)[i] + a_dt * (R.var(e, a)[i] - (a == 1 ? g * Ustar.var(e, 0)[i] : 0.0));
    fx.op.weak_divergence(in, R, flux, opt);
    std::vector<double> out(n);
    for (int e = 0; e < nl; ++e)
      for (int i = 0; i < nn; ++i)
        out[e * nn + i] =
            p[e * nn + i] - gm1 * (Ustar.var(e, 3)[i] + a_dt * (R.var(e, 2)[i] - g * in.var(e, 3)[i]));
    return out;
  };
  const LinearAction A = imex.helmholtz_action(a_dt, h);
  std::vector<double> p0(n);
  for (int e = 0; e < nl; ++e)
    std::copy(aux.var(e, 0), aux.var(e, 0) + nn, &p0[e * nn]);
  double worst = 0.0, scale = 0.0;
  std::vector<double> ej(n, 0.0), col(n);
  for (int j = 0; j < n; ++j) {
    const double eps = 1.0;
    auto pp = p0, pm = p0;
    pp[j] += eps;
    pm[j] -= eps;
    const auto fp = phi(pp), fm = phi(pm);
    std::fill(ej.begin(), ej.end(), 0.0);
    ej[j] = 1.0;
    A(ej, col);
    for (int i = 0; i < n; ++i) {
      const double fd = (fp[i] - fm[i]) / (2 * eps);
      worst = std::max(worst, std::abs(fd - col[i]));
      scale = std::max(scale, std::abs(col[i]));
    }
  }
  CHECK(worst / scale < 1e-6);
}

TEST_CASE("stage solve satisfies the implicit stage equation for either gravity placement") {
  for (const bool implicit_gravity : {true, false}) {
    CAPTURE(implicit_gravity);
    HillFixture fx;
    fx.split.set_implicit_gravity(implicit_gravity);
    ImplicitSolveConfig cfg;
    cfg.picard_tol = 1e-12;
    cfg.picard_max = 30;
    cfg.krylov_tol = 1e-12;
    ImexIntegrator imex(fx.split, ButcherTableau::ars222(), cfg);
    const Field Ustar = fx.perturbed();
    Field Ui = Ustar;
    const double a_dt = 3.0;
    int pic = 0, kry = 0;
    double inc = 0.0;
    imex.solve_stage(a_dt, Ustar, Ui, pic, kry, inc);
    CHECK(pic >= 2);
    Field I(fx.geo, 4);
    fx.split.implicit_residual(Ui, I);
    for (int v = 0; v < 4; ++v) {
      double diff = 0.0, scale = 0.0;
      for (int e = 0; e < Ui.leaves(); ++e)
        for (int i = 0; i < Ui.nodes(); ++i) {
          diff = std::max(diff, std::abs(Ui.var(e, v)[i] - Ustar.var(e, v)[i] - a_dt * I.var(e, v)[i]));
          scale = std::max(scale, std::abs(a_dt * I.var(e, v)[i]) + std::abs(Ui.var(e, v)[i] - Ustar.var(e, v)[i]));
        }
      CAPTURE(v);
      CHECK(diff <= 1e-8 * std::max(scale, 1e-300));
    }
  }
}

TEST_CASE("one IMEX step balances mass with the boundary flux") {
  HillFixture fx;
  ImexIntegrator imex(fx.split, ButcherTableau::ars222(), ImplicitSolveConfig{});
  Field U = fx.perturbed();
  const double m0 = integrate_conserved(fx.geo, U)[0];
  const StepStats st = imex.step(0.0, 4.0, U);
  const double m1 = integrate_conserved(fx.geo, U)[0];
  CHECK(st.picard.size() == 2);
  for (int k : st.picard)
    CHECK(k >= 1);
  CHECK(st.total_krylov() > 0);
  CHECK(std::abs(st.boundary_mass) > 0.0);
  CHECK(std::abs(m1 - m0 + st.boundary_mass) <= 1e-12 * m0);
}

TEST_CASE("closed domain keeps total mass to round-off") {
  HillFixture fx(1, 3, {4, 2, 1}, true, false);
  ImexIntegrator imex(fx.split, ButcherTableau::ars222(), ImplicitSolveConfig{});
  Field U = fx.perturbed();
  const double m0 = integrate_conserved(fx.geo, U)[0];
  for (int k = 0; k < 3; ++k) {
    const StepStats st = imex.step(k * 4.0, 4.0, U);
    CHECK(std::abs(st.boundary_mass) <= 1e-14 * m0);
  }
  CHECK(std::abs(integrate_conserved(fx.geo, U)[0] - m0) <= 1e-13 * m0);
}

TEST_CASE("IMEX steps are bitwise independent of the worker count") {
  std::vector<double> ref;
  for (int workers : {1, 3, 4}) {
    HillFixture fx(workers);
    ImplicitSolveConfig cfg;
    cfg.preconditioner_refresh = 1;
    ImexIntegrator imex(fx.split, ButcherTableau::ars222(), cfg);
    Field U = fx.perturbed();
    imex.step(0.0, 4.0, U);
    imex.step(4.0, 4.0, U);
    if (ref.empty())
      ref = U.values();
    else
      CHECK(U.values() == ref);
  }
}

TEST_CASE("resting constant state is steady without gravity") {
  auto m = build_uniform_mesh(2, {4, 2, 0}, {4, 2, 1});
  ReferenceBasis b(2);
  TerrainMapping map(m);
  MeshGeometry g(m, b, map);
  Partition part = partition_leaves(m, 1);
  WorkerPool pool(1);
  DGOperator op(g, part, pool);
  PhysicalConstants c;
  auto eq = EquationCoefficients::dimensional(c);
  eq.gravity = 0.0;
  SplitOperators S(op, eq, c);
  S.set_gravity(false);
  ImexIntegrator imex(S, ButcherTableau::ars222(), ImplicitSolveConfig{});
  Field U(g, 4);
  for (int e = 0; e < U.leaves(); ++e)
    for (int i = 0; i < U.nodes(); ++i) {
      U.var(e, 0)[i] = 1.2;
      U.var(e, 3)[i] = 1e5 / 0.4;
    }
  const Field U0 = U;
  imex.step(0.0, 0.01, U);
  // Round-off only: momentum against rho c, energy against rho E.
  const double rc = 1.2 * std::sqrt(1.4 * 1e5 / 1.2);
  for (int e = 0; e < U.leaves(); ++e)
    for (int i = 0; i < U.nodes(); ++i) {
      CHECK(U.var(e, 0)[i] == doctest::Approx(U0.var(e, 0)[i]).epsilon(1e-12));
      CHECK(std::abs(U.var(e, 1)[i]) < 1e-10 * rc);
      CHECK(std::abs(U.var(e, 2)[i]) < 1e-10 * rc);
      CHECK(std::abs(U.var(e, 3)[i] - U0.var(e, 3)[i]) < 1e-10 * U0.var(e, 3)[i]);
    }
}

TEST_CASE("IMEX converges at second order towards an RK4 reference") {
  ManufacturedConfig mc;
  auto m = build_uniform_mesh(2, {1, 1, 0}, {3, 3, 1}, {true, true, false});
  ReferenceBasis b(3);
  TerrainMapping map(m);
  MeshGeometry g(m, b, map);
  Partition part = partition_leaves(m, 1);
  WorkerPool pool(1);
  DGOperator op(g, part, pool);
  SplitOperators S(op, mc.eq, mc.constants());
  S.set_gravity(false);
  S.set_source(manufactured_source(g, mc));
  const double T = 0.2;
  Field ref = manufactured_field(g, 0.0, mc);
  for (int k = 0; k < 400; ++k)
    rk4_step(S, k * T / 400, T / 400, ref);
  ImplicitSolveConfig cfg;
  cfg.picard_tol = 1e-12;
  cfg.picard_max = 30;
  cfg.krylov_tol = 1e-13;
  std::vector<double> err;
  for (int nsteps : {10, 20, 40}) {
    ImexIntegrator imex(S, ButcherTableau::ars222(), cfg);
    Field U = manufactured_field(g, 0.0, mc);
    const double dt = T / nsteps;
    for (int k = 0; k < nsteps; ++k)
      imex.step(k * dt, dt, U);
    std::vector<double> d(U.size());
    for (std::size_t i = 0; i < d.size(); ++i)
      d[i] = U.values()[i] - ref.values()[i];
    err.push_back(max_abs(d));
  }
  const double o1 = std::log2(err[0] / err[1]), o2 = std::log2(err[1] / err[2]);
  CHECK(o1 > 1.8);
  CHECK(o2 > 1.8);
  CHECK(o2 < 2.3);
}

TEST_CASE("stratified rest column has no growing buoyancy modes") {
  // Linearised E + I about the hydrostatic state on a periodic column; the
  // slow (buoyancy) part of the spectrum must not grow.
  HillCaseConfig cfg = HillCaseConfig::hydrostatic_rest();
  cfg.h_c = 0.0;
  cfg.extents = {2000.0, 16000.0, 0.0};
  auto mesh = build_uniform_mesh(2, cfg.extents, {1, 2, 1}, {true, false, false});
  ReferenceBasis basis(4);
  TerrainMapping map(mesh);
  MeshGeometry geo(mesh, basis, map);
  const Partition part = partition_leaves(mesh, 1);
  WorkerPool pool(1);
  DGOperator op(geo, part, pool, BoundaryConditions{});
  SplitOperators S(op, EquationCoefficients::dimensional(cfg.constants), cfg.constants);
  S.set_implicit_gravity(false);
  const Field bg = hydrostatic_field(geo, cfg);
  const int n = int(bg.size());
  auto residual = [&](const Field& U) {
    Field E(geo, 4), I(geo, 4);
    S.explicit_residual(0.0, U, E);
    S.implicit_residual(U, I);
    for (int i = 0; i < n; ++i)
      E.values()[i] += I.values()[i];
    return E;
  };
  Eigen::MatrixXd J(n, n);
  for (int j = 0; j < n; ++j) {
    Field up = bg, um = bg;
    const double h = 1e-6 * std::max(1.0, std::abs(bg.values()[j]));
    up.values()[j] += h;
    um.values()[j] -= h;
    const Field rp = residual(up), rm = residual(um);
    for (int i = 0; i < n; ++i)
      J(i, j) = (rp.values()[i] - rm.values()[i]) / (2 * h);
  }
  const Eigen::VectorXcd ev = Eigen::EigenSolver<Eigen::MatrixXd>(J, false).eigenvalues();
  double worst = -1.0;
  for (int k = 0; k < n; ++k)
    if (std::abs(ev[k].imag()) < 0.1)
      worst = std::max(worst, ev[k].real());
  CHECK(worst < 1e-5);
}

TEST_CASE("far-field sides add no growing modes to the linearised operator") {
  HillCaseConfig cfg = HillCaseConfig::paper2d();
  cfg.extents = {4000.0, 4000.0, 0.0};
  auto mesh = build_uniform_mesh(2, cfg.extents, {2, 2, 1});
  ReferenceBasis basis(2);
  TerrainMapping map(mesh);
  MeshGeometry geo(mesh, basis, map);
  const Partition part = partition_leaves(mesh, 1);
  WorkerPool pool(1);
  BoundaryConditions bc;
  bc.kind[0] = bc.kind[1] = BoundaryKind::FarField;
  DGOperator op(geo, part, pool, bc);
  for (double u : {0.0, 10.0}) {
    CAPTURE(u);
    cfg.u_bar = u;
    SplitOperators S(op, EquationCoefficients::dimensional(cfg.constants), cfg.constants);
    const Field bg = hydrostatic_field(geo, cfg);
    S.set_background(bg);
    const int n = int(bg.size());
    auto residual = [&](const Field& U) {
      Field E(geo, 4), I(geo, 4);
      S.explicit_residual(0.0, U, E);
      S.implicit_residual(U, I);
      for (int i = 0; i < n; ++i)
        E.values()[i] += I.values()[i];
      return E;
    };
    Eigen::MatrixXd J(n, n);
    for (int j = 0; j < n; ++j) {
      Field up = bg, um = bg;
      const double h = 1e-6 * std::max(1.0, std::abs(bg.values()[j]));
      up.values()[j] += h;
      um.values()[j] -= h;
      const Field rp = residual(up), rm = residual(um);
      for (int i = 0; i < n; ++i)
        J(i, j) = (rp.values()[i] - rm.values()[i]) / (2 * h);
    }
    const Eigen::VectorXcd ev = Eigen::EigenSolver<Eigen::MatrixXd>(J, false).eigenvalues();
    double worst = -1.0;
    for (int k = 0; k < n; ++k)
      worst = std::max(worst, ev[k].real());
    CHECK(worst < 1e-4);
  }
}
