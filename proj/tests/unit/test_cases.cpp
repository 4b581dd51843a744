#include "ncdg/cases/cases.hpp"
#include "ncdg/common/errors.hpp"
#include "ncdg/physics/providers.hpp"

#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

using namespace ncdg;

TEST_CASE("hill profile") {
  const auto c3 = HillCaseConfig::paper3d();
  CHECK(hill_profile(30000.0, 20000.0, c3) == doctest::Approx(400.0));
  CHECK(hill_profile(31000.0, 20000.0, c3) == doctest::Approx(400.0 / std::pow(2.0, 1.5)).epsilon(1e-14));
  CHECK(hill_profile(31000.0, 20000.0, c3) == doctest::Approx(141.42).epsilon(1e-4));
  const auto c2 = HillCaseConfig::paper2d();
  CHECK(hill_profile(30000.0, 1e9, c2) == doctest::Approx(400.0));
  double prev = 400.0;
  for (double x = 30500.0; x < 1e6; x *= 1.3) {
    const double h = hill_profile(x, 0.0, c2);
    CHECK(h < prev);
    prev = h;
  }
  CHECK(prev < 1e-3);
}

TEST_CASE("presets reproduce the benchmark parameters") {
  const auto c = HillCaseConfig::paper3d();
  CHECK(c.h_c == 400.0);
  CHECK(c.a_c == 1000.0);
  CHECK(c.x_c == 30000.0);
  CHECK(c.y_c == 20000.0);
  CHECK(c.N == 0.01);
  CHECK(c.u_bar == 10.0);
  CHECK(c.p_ref == 1e5);
  CHECK(c.T_ref == 293.15);
  CHECK(c.T_f == 3600.0);
  CHECK(c.dt == 2.0);
  CHECK(c.extents[0] == 60000.0);
  CHECK(c.extents[1] == 40000.0);
  CHECK(c.extents[2] == 16000.0);
  CHECK(c.rho_ref() == doctest::Approx(1e5 / (287.0 * 293.15)));
  const auto d = HillCaseConfig::paper2d();
  CHECK(d.dim == 2);
  CHECK(d.extents[1] == 16000.0);
  CHECK_NOTHROW(c.validate());
  CHECK_NOTHROW(d.validate());
}

TEST_CASE("hydrostatic state") {
  const auto c = HillCaseConfig::paper2d();
  const auto s0 = hydrostatic_state(0.0, c);
  CHECK(s0.p == doctest::Approx(c.p_ref).epsilon(1e-15));
  CHECK(s0.rho == doctest::Approx(c.rho_ref()).epsilon(1e-15));
  CHECK(s0.u[0] == 10.0);
  CHECK(s0.T == doctest::Approx(c.T_ref).epsilon(1e-14));

  SUBCASE("pressure derivative balances gravity") {
    for (int k = 0; k < 100; ++k) {
      const double z = 50.0 + k * 159.0;
      const double dz = 1e-2;
      // Fourth-order central difference.
      const double dp = (-hydrostatic_state(z + 2 * dz, c).p + 8 * hydrostatic_state(z + dz, c).p -
                         8 * hydrostatic_state(z - dz, c).p + hydrostatic_state(z - 2 * dz, c).p) /
                        (12 * dz);
      const double target = -hydrostatic_state(z, c).rho * c.constants.g;
      CHECK(std::abs(dp - target) <= 1e-8 * std::abs(target));
    }
  }
  SUBCASE("pressure at the model top") {
    const double g = c.constants.g, N2 = c.N * c.N, G = c.constants.Gamma();
    const double z = 16000.0;
    const double decay = std::exp(-N2 * z / g);
    // Balanced closed form with g^2/N^2.
    const double balanced = std::pow(1.0 - g * g / N2 * G * c.rho_ref() / c.p_ref * (1.0 - decay), 1.0 / G);
    CHECK(hydrostatic_state(z, c).p / c.p_ref == doctest::Approx(balanced).epsilon(1e-13));
    CHECK(balanced == doctest::Approx(0.0936).epsilon(2e-3));
    // The printed prefactor g/N^2 gives 0.835 but is not hydrostatic.
    const double literal = std::pow(1.0 - g / N2 * G * c.rho_ref() / c.p_ref * (1.0 - decay), 1.0 / G);
    CHECK(literal == doctest::Approx(0.835).epsilon(1e-3));
  }
  SUBCASE("a domain above the bracket root is rejected") {
    const double zmax = hydrostatic_height_limit(c);
    CHECK(zmax == doctest::Approx(35800.0).epsilon(1e-2));
    CHECK_THROWS_AS(hydrostatic_state(zmax + 10.0, c), ConfigError);
    HillCaseConfig tall = c;
    tall.extents[1] = 40000.0;
    CHECK_THROWS_AS(tall.validate(), ConfigError);
  }
}

TEST_CASE("invalid hill configurations") {
  auto c = HillCaseConfig::paper2d();
  c.a_c = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = HillCaseConfig::paper2d();
  c.h_c = 20000.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = HillCaseConfig::paper2d();
  c.dt = -1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK_NOTHROW(HillCaseConfig::hydrostatic_rest().validate());
}

TEST_CASE("wall boundary ghost") {
  const double n[2] = {0.6, 0.8};
  double U[4] = {1.1, 0.8, -0.6, 2.5e5}, G[4];
  apply_wall_bc(U, n, 2, G);
  CHECK(G[0] == U[0]);
  CHECK(G[3] == U[3]);
  CHECK(G[1] == doctest::Approx(U[1]));  // tangential state: m.n = 0
  CHECK(G[2] == doctest::Approx(U[2]));
  double V[4] = {1.0, 0.6, 0.8, 2.5e5};
  apply_wall_bc(V, n, 2, G);
  CHECK(G[1] * n[0] + G[2] * n[1] == doctest::Approx(-1.0));
  ExplicitEulerFlux f{2, EquationCoefficients::dimensional(PhysicalConstants{})};
  double fn[4];
  f.numerical_flux(V, G, n, fn);
  CHECK(std::abs(fn[0]) < 1e-14);
}

TEST_CASE("sponge rate") {
  SpongeConfig s;
  const std::array<double, 3> ext{60000.0, 16000.0, 0.0};
  CHECK(sponge_rate({30000.0, 5000.0, 0}, 2, ext, s) == 0.0);
  CHECK(sponge_rate({30000.0, 16000.0, 0}, 2, ext, s) == doctest::Approx(s.sigma_max));
  CHECK(sponge_rate({30000.0, 14000.0, 0}, 2, ext, s) == doctest::Approx(0.5 * s.sigma_max).epsilon(1e-14));
  CHECK(sponge_rate({5000.0, 3000.0, 0}, 2, ext, s) == doctest::Approx(0.5 * s.sigma_max).epsilon(1e-14));
  CHECK(sponge_rate({60000.0, 3000.0, 0}, 2, ext, s) == doctest::Approx(s.sigma_max));
  double prev = 0.0;
  for (double z = 12000.0; z <= 16000.0; z += 100.0) {
    const double v = sponge_rate({30000.0, z, 0}, 2, ext, s);
    CHECK(v >= prev);
    prev = v;
  }
  const std::array<double, 3> ext3{60000.0, 40000.0, 16000.0};
  CHECK(sponge_rate({30000.0, 35000.0, 2000.0}, 3, ext3, s) == doctest::Approx(0.5 * s.sigma_max));
  s.sigma_max = -1.0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
}

TEST_CASE("sponge relaxation") {
  auto m = build_uniform_mesh(2, {60000.0, 16000.0, 0}, {6, 2, 1});
  ReferenceBasis b(2);
  TerrainMapping map(m);
  MeshGeometry g(m, b, map);
  const auto cfg = HillCaseConfig::paper2d();
  const Field bg = hydrostatic_field(g, cfg);
  const auto sigma = sponge_field(g, cfg.extents, SpongeConfig{});
  Field R(g, 4);
  R.fill(1.0);
  Field Rc = R;
  apply_sponge(R, bg, bg, sigma);
  CHECK(R.values() == Rc.values());
  Field U = bg;
  for (double& v : U.values())
    v *= 1.01;
  apply_sponge(R, U, bg, std::vector<double>(sigma.size(), 0.0));
  CHECK(R.values() == Rc.values());
  apply_sponge(R, U, bg, sigma);
  bool changed = false;
  for (int e = 0; e < R.leaves(); ++e)
    for (int i = 0; i < R.nodes(); ++i) {
      CHECK(R.var(e, 0)[i] == 1.0);
      const double s = sigma[std::size_t(e) * R.nodes() + i];
      CHECK(R.var(e, 3)[i] == doctest::Approx(1.0 - s * 0.01 * bg.var(e, 3)[i]));
      changed = changed || s > 0;
    }
  CHECK(changed);
}

namespace {

using cd = std::complex<double>;

// Independent complex-valued copy of the travelling wave for the complex-step oracle.
void exact_flux(const ManufacturedConfig& c, const std::array<cd, 3>& x, cd t, cd* U, cd* F) {
  const double pi = 3.14159265358979323846;
  const int d = c.dim;
  cd s = 0.0;
  for (int a = 0; a < d; ++a)
    s += x[a];
  const cd phi = 2.0 * pi * s / c.L - c.omega * t;
  const cd rho = c.rho0 * (1.0 + c.a_rho * std::sin(phi));
  cd u[3];
  for (int i = 0; i < d; ++i)
    u[i] = c.u0[i] + c.a_u * std::sin(phi + double(i));
  const cd p = c.p0 * (1.0 + c.a_p * std::cos(phi));
  cd k = 0.0;
  for (int i = 0; i < d; ++i)
    k += 0.5 * u[i] * u[i];
  const cd E = p / (c.eq.gamma - 1.0) + c.eq.kinetic * rho * k;
  U[0] = rho;
  for (int i = 0; i < d; ++i)
    U[1 + i] = rho * u[i];
  U[d + 1] = E;
  for (int a = 0; a < d; ++a) {
    F[a] = rho * u[a];
    for (int i = 0; i < d; ++i)
      F[(1 + i) * d + a] = rho * u[i] * u[a] + (i == a ? c.eq.pressure * p : cd(0.0));
    F[(d + 1) * d + a] = (E + p) * u[a];
  }
}

} // namespace

TEST_CASE("manufactured forcing agrees with a complex-step derivative oracle") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(0, 1);
  for (int dim : {2, 3})
    for (double P : {1.0, 400.0}) {
      ManufacturedConfig c;
      c.dim = dim;
      c.eq.pressure = P;
      c.eq.kinetic = 1.0 / P;
      for (int trial = 0; trial < 10; ++trial) {
        const std::array<double, 3> x{u(rng), u(rng), u(rng)};
        const double t = u(rng);
        double S[5];
        manufactured_forcing(x, t, c, S);
        const double h = 1e-30;
        cd U[5], F[15];
        double oracle[5] = {0, 0, 0, 0, 0};
        exact_flux(c, {x[0], x[1], x[2]}, cd(t, h), U, F);
        for (int v = 0; v < dim + 2; ++v)
          oracle[v] += U[v].imag() / h;
        for (int a = 0; a < dim; ++a) {
          std::array<cd, 3> xc{x[0], x[1], x[2]};
          xc[a] += cd(0, h);
          exact_flux(c, xc, t, U, F);
          for (int v = 0; v < dim + 2; ++v)
            oracle[v] += F[v * dim + a].imag() / h;
        }
        for (int v = 0; v < dim + 2; ++v)
          CHECK(std::abs(S[v] - oracle[v]) <= 1e-12 * (1.0 + std::abs(oracle[v])));
        // The real part reproduces the state.
        double Ur[5];
        manufactured_state(x, t, c, Ur);
        exact_flux(c, {x[0], x[1], x[2]}, t, U, F);
        for (int v = 0; v < dim + 2; ++v)
          CHECK(Ur[v] == doctest::Approx(U[v].real()).epsilon(1e-14));
      }
    }
}

TEST_CASE("manufactured field at t = 0 equals the configured state") {
  ManufacturedConfig c;
  auto m = build_uniform_mesh(2, {1, 1, 0}, {2, 2, 1}, {true, true, false});
  ReferenceBasis b(3);
  TerrainMapping map(m);
  MeshGeometry g(m, b, map);
  const Field U = manufactured_field(g, 0.0, c);
  for (int e = 0; e < U.leaves(); ++e) {
    auto xs = g.node_coords(e);
    for (int i = 0; i < U.nodes(); ++i) {
      double ex[4];
      manufactured_state({xs[2 * i], xs[2 * i + 1], 0}, 0.0, c, ex);
      for (int v = 0; v < 4; ++v)
        CHECK(U.var(e, v)[i] == ex[v]);
    }
  }
  // Interpolation error converges at order r + 1.
  auto m4 = build_uniform_mesh(2, {1, 1, 0}, {4, 4, 1}, {true, true, false});
  TerrainMapping map4(m4);
  MeshGeometry g4(m4, b, map4);
  const double e2 = manufactured_l2_error(U, g, 0.0, c);
  const double e4 = manufactured_l2_error(manufactured_field(g4, 0.0, c), g4, 0.0, c);
  CHECK(std::log2(e2 / e4) > 3.5);
  ManufacturedConfig bad = c;
  bad.eq.gravity = 9.81;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}
