#include "ncdg/common/errors.hpp"
#include "ncdg/dg/field.hpp"
#include "ncdg/mesh/geometry.hpp"

#include <doctest.h>

#include <cmath>

using namespace ncdg;

TEST_CASE("flat geometry is affine") {
  auto m = build_uniform_mesh(3, {3, 2, 1}, {3, 2, 2});
  m = refine_region(m, [](const LeafBox& b) { return b.lower[0] < 1.0; });
  ReferenceBasis b(3);
  TerrainMapping map(m);
  MeshGeometry g(m, b, map);
  for (int e = 0; e < m.num_leaves(); ++e) {
    const auto box = m.box(e);
    double diag = 0.0, vol = 1.0;
    for (int a = 0; a < 3; ++a) {
      const double l = box.upper[a] - box.lower[a];
      diag += l * l;
      vol *= l;
    }
    CHECK(g.diameter(e) == std::sqrt(diag));
    const auto jac = map.jacobian(box, {0.3, 0.6, 0.2});
    for (int a = 0; a < 3; ++a)
      for (int c = 0; c < 3; ++c) {
        const double expect = a == c ? box.upper[a] - box.lower[a] : 0.0;
        CHECK(std::abs(jac[a * 3 + c] - expect) <= 1e-14 * std::abs(box.upper[a] - box.lower[a]));
      }
    for (double d : g.detj(e))
      CHECK(std::abs(d - vol) <= 1e-14 * vol);
  }
  CHECK(g.volume() == doctest::Approx(6.0).epsilon(1e-14));
}

TEST_CASE("terrain map endpoints") {
  auto m = build_uniform_mesh(2, {1000, 1000, 0}, {2, 2, 1});
  ReferenceBasis b(2);
  TerrainMapping map(m, [](double, double) { return 100.0; }, 1000.0, 2);
  const auto bottom = map.map(m.box(0), {0.5, 0.0, 0.0});
  CHECK(bottom[1] == doctest::Approx(100.0));
  int top_leaf = -1;
  for (int e = 0; e < m.num_leaves(); ++e)
    if (m.box(e).upper[1] == 1000.0)
      top_leaf = e;
  const auto top = map.map(m.box(top_leaf), {0.5, 1.0, 0.0});
  CHECK(top[1] == doctest::Approx(1000.0));
  TerrainMapping zero(m, [](double, double) { return 0.0; }, 1000.0, 2);
  const auto mid = zero.map(m.box(0), {0.5, 0.5, 0.0});
  CHECK(mid[1] == doctest::Approx(250.0));
  CHECK_THROWS_AS(TerrainMapping(m, [](double, double) { return 1000.0; }, 1000.0, 2), ConfigError);
}

TEST_CASE("hill terrain keeps positive Jacobians and antiparallel normals") {
  auto m = build_uniform_mesh(2, {60e3, 16e3, 0}, {60, 16, 1});
  m = refine_region(m, [](const LeafBox& b) { return std::abs(b.lower[0] - 30e3) < 4e3 && b.lower[1] < 3e3; });
  ReferenceBasis b(4);
  auto hill = [](double x, double) {
    const double s = (x - 30e3) / 1000.0;
    return 400.0 / std::pow(1.0 + s * s, 1.5);
  };
  TerrainMapping map(m, hill, 16e3, 4);
  MeshGeometry g(m, b, map);
  double dmin = 1e300;
  for (int e = 0; e < m.num_leaves(); ++e)
    for (double d : g.detj(e))
      dmin = std::min(dmin, d);
  CHECK(dmin > 0.0);
  // Both sides of every interior face see the same points and opposite normals.
  std::vector<std::vector<int>> slot_of(m.faces().size(), std::vector<int>(2, -1));
  for (int e = 0; e < m.num_leaves(); ++e) {
    const auto sl = m.slots(e);
    for (std::size_t k = 0; k < sl.size(); ++k)
      slot_of[sl[k].face][sl[k].side] = m.slot_offset(e) + int(k);
  }
  double worst_n = 0.0, worst_x = 0.0, worst_w = 0.0;
  for (std::size_t f = 0; f < m.faces().size(); ++f) {
    if (m.faces()[f].kind == FaceKind::Boundary)
      continue;
    const auto n0 = g.normals(slot_of[f][0]), n1 = g.normals(slot_of[f][1]);
    const auto x0 = g.face_coords(slot_of[f][0]), x1 = g.face_coords(slot_of[f][1]);
    const auto w0 = g.face_jxw(slot_of[f][0]), w1 = g.face_jxw(slot_of[f][1]);
    for (std::size_t i = 0; i < n0.size(); ++i) {
      worst_n = std::max(worst_n, std::abs(n0[i] + n1[i]));
      worst_x = std::max(worst_x, std::abs(x0[i] - x1[i]));
    }
    for (std::size_t i = 0; i < w0.size(); ++i)
      worst_w = std::max(worst_w, std::abs(w0[i] - w1[i]) / w0[i]);
  }
  CHECK(worst_n < 1e-12);
  CHECK(worst_x < 1e-9);
  CHECK(worst_w < 1e-12);
}

TEST_CASE("mapped volume matches the analytic integral") {
  // Quadratic terrain is represented exactly by the degree-2 geometry.
  const double L = 4000.0, H = 2000.0;
  auto hfun = [&](double x, double) { return 200.0 * 4.0 * x * (L - x) / (L * L); };
  auto m = build_uniform_mesh(2, {L, H, 0}, {4, 2, 1});
  m = refine_region(m, [](const LeafBox& b) { return b.lower[0] >= 1000.0 && b.upper[0] <= 2000.0; });
  ReferenceBasis b(2);
  TerrainMapping map(m, hfun, H, 2);
  MeshGeometry g(m, b, map);
  const double hill_area = 200.0 * 4.0 / (L * L) * (L * L * L / 2.0 - L * L * L / 3.0);
  const double expect = L * H - hill_area;
  Field one(g, 1);
  one.fill(1.0);
  CHECK(std::abs(global_inner_product(g, one, one) - expect) <= 1e-12 * expect);
  Field zero(g, 1);
  CHECK(global_inner_product(g, zero, one) == 0.0);
  Field a = project_initial_data(g, [](const std::array<double, 3>& x, double* o) { o[0] = std::sin(x[0] * 1e-3); }, 1);
  Field a3 = a;
  for (auto& v : a3.values())
    v *= 3.0;
  CHECK(std::abs(global_inner_product(g, a3, one) - 3.0 * global_inner_product(g, a, one)) <
        1e-14 * std::abs(3.0 * global_inner_product(g, a, one)) + 1e-9);
  auto other = build_uniform_mesh(2, {L, H, 0}, {4, 2, 1});
  MeshGeometry go(other, b, map);
  Field bad(go, 1);
  CHECK_THROWS_AS(global_inner_product(g, one, bad), UsageError);
}

TEST_CASE("projection of initial data") {
  auto m = build_uniform_mesh(2, {2, 1, 0}, {2, 1, 1});
  ReferenceBasis b(3);
  TerrainMapping map(m);
  MeshGeometry g(m, b, map);
  auto f = project_initial_data(g, [](const std::array<double, 3>&, double* o) { o[0] = 2.5; }, 1);
  for (double v : f.values())
    CHECK(v == 2.5);
  auto poly = [](const std::array<double, 3>& x, double* o) {
    o[0] = 1 + x[0] - 2 * x[0] * x[0] * x[1] + x[1] * x[1] * x[1] * x[0] * x[0] * x[0];
  };
  auto p = project_initial_data(g, poly, 1);
  for (int e = 0; e < m.num_leaves(); ++e) {
    const auto box = m.box(e);
    std::array<double, 3> xi{0.37, 0.81, 0};
    std::array<double, 3> x{box.lower[0] + xi[0] * (box.upper[0] - box.lower[0]),
                            box.lower[1] + xi[1] * (box.upper[1] - box.lower[1]), 0};
    double v, ex;
    evaluate_at(g, p, e, xi, &v);
    poly(x, &ex);
    CHECK(std::abs(v - ex) < 1e-13);
  }
  CHECK_THROWS_AS(project_initial_data(g, [](const std::array<double, 3>&, double* o) { o[0] = NAN; }, 1),
                  InputError);
  CHECK(f.size() == std::size_t(2) * 16);
}

TEST_CASE("locate picks the lower index on shared boundaries") {
  auto m = build_uniform_mesh(2, {2, 1, 0}, {2, 1, 1});
  ReferenceBasis b(2);
  TerrainMapping map(m);
  MeshGeometry g(m, b, map);
  auto hit = g.locate({1.0, 0.5, 0.0});
  REQUIRE(hit);
  CHECK(hit->first == 0);
  CHECK(hit->second[0] == doctest::Approx(1.0));
  CHECK(!g.locate({3.0, 0.5, 0.0}));
}
