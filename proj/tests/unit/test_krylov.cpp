#include "ncdg/common/errors.hpp"
#include "ncdg/common/worker_pool.hpp"
#include "ncdg/krylov/gmres.hpp"
#include "ncdg/mesh/partition.hpp"

#include <Eigen/Dense>
#include <doctest.h>

#include <cmath>
#include <limits>
#include <queue>
#include <random>

using namespace ncdg;

namespace {

LinearAction dense_action(const Eigen::MatrixXd& A) {
  return [A](std::span<const double> x, std::span<double> y) {
    Eigen::Map<const Eigen::VectorXd> xv(x.data(), x.size());
    Eigen::Map<Eigen::VectorXd> yv(y.data(), y.size());
    yv = A * xv;
  };
}

Eigen::MatrixXd random_matrix(int n, double shift, std::mt19937& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      A(i, j) = g(rng) / std::sqrt(double(n));
  A += shift * Eigen::MatrixXd::Identity(n, n);
  return A;
}

} // namespace

TEST_CASE("GMRES solves a non-symmetric system to the requested tolerance") {
  std::mt19937 rng(3);
  const int n = 80;
  const Eigen::MatrixXd A = random_matrix(n, 3.0, rng);
  const Eigen::VectorXd b = Eigen::VectorXd::Random(n);
  const Eigen::VectorXd exact = A.fullPivLu().solve(b);
  for (int restart : {5, 20, 100}) {
    std::vector<double> x(n, 0.0);
    GmresOptions opt;
    opt.tol = 1e-10;
    opt.restart = restart;
    const KrylovStats st = gmres(dense_action(A), {b.data(), std::size_t(n)}, x, opt);
    CHECK(st.converged);
    CHECK(st.residual <= 1e-10 * 1.01);
    Eigen::Map<Eigen::VectorXd> xv(x.data(), n);
    CHECK((xv - exact).norm() / exact.norm() < 1e-8);
    CHECK(int(st.history.size()) == st.iterations);
    if (restart >= 100)
      CHECK(st.restarts == 0);
    // The least-squares residual never increases within a cycle.
    for (std::size_t k = 1; k < st.history.size(); ++k)
      if ((k % restart) != 0)
        CHECK(st.history[k] <= st.history[k - 1] * (1 + 1e-12));
  }
}

TEST_CASE("GMRES terminates in n steps on an n-dimensional space") {
  std::mt19937 rng(4);
  const int n = 12;
  const Eigen::MatrixXd A = random_matrix(n, 0.5, rng);
  const Eigen::VectorXd b = Eigen::VectorXd::Random(n);
  std::vector<double> x(n, 0.0);
  GmresOptions opt;
  opt.tol = 1e-13;
  opt.restart = 50;
  const KrylovStats st = gmres(dense_action(A), {b.data(), std::size_t(n)}, x, opt);
  CHECK(st.converged);
  CHECK(st.iterations <= n);
}

TEST_CASE("GMRES with the exact inverse as preconditioner converges in one step") {
  std::mt19937 rng(5);
  const int n = 30;
  const Eigen::MatrixXd A = random_matrix(n, 2.0, rng);
  const Eigen::MatrixXd Ainv = A.inverse();
  const Eigen::VectorXd b = Eigen::VectorXd::Random(n);
  std::vector<double> x(n, 0.0);
  const LinearAction M = dense_action(Ainv);
  const KrylovStats st = gmres(dense_action(A), {b.data(), std::size_t(n)}, x, GmresOptions{}, &M);
  CHECK(st.converged);
  CHECK(st.iterations == 1);
  CHECK(st.residual < 1e-12);
}

TEST_CASE("identity operator gives a lucky breakdown") {
  const int n = 10;
  std::vector<double> b(n), x(n, 0.0);
  for (int i = 0; i < n; ++i)
    b[i] = i + 1.0;
  const KrylovStats st =
      gmres([](std::span<const double> u, std::span<double> v) { std::copy(u.begin(), u.end(), v.begin()); }, b, x,
            GmresOptions{});
  CHECK(st.converged);
  CHECK(st.iterations == 1);
  for (int i = 0; i < n; ++i)
    CHECK(x[i] == doctest::Approx(b[i]));
}

TEST_CASE("zero right-hand side and invalid input") {
  const int n = 4;
  const Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n) * 2.0;
  std::vector<double> b(n, 0.0), x(n, 0.0);
  const KrylovStats st = gmres(dense_action(A), b, x, GmresOptions{});
  CHECK(st.converged);
  CHECK(st.iterations == 0);
  for (double v : x)
    CHECK(v == 0.0);
  GmresOptions bad;
  bad.restart = 0;
  CHECK_THROWS_AS(gmres(dense_action(A), b, x, bad), ConfigError);
  bad = GmresOptions{};
  bad.tol = 0.0;
  CHECK_THROWS_AS(gmres(dense_action(A), b, x, bad), ConfigError);
  b[2] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(gmres(dense_action(A), b, x, GmresOptions{}), InputError);
}

TEST_CASE("non-convergence is reported") {
  std::mt19937 rng(6);
  const int n = 60;
  // Rotation-like spectrum: restarted GMRES(2) stagnates.
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    A(i, (i + 1) % n) = 1.0;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b(0) = 1.0;
  std::vector<double> x(n, 0.0);
  GmresOptions opt;
  opt.restart = 2;
  opt.max_iter = 40;
  const KrylovStats st = gmres(dense_action(A), {b.data(), std::size_t(n)}, x, opt);
  CHECK_FALSE(st.converged);
  CHECK(st.iterations == 40);
  CHECK(st.residual > 0.5);
}

TEST_CASE("blocked vector kernels do not depend on the worker split") {
  const int nb = 37, bs = 13;
  std::mt19937 rng(7);
  const Eigen::MatrixXd A = random_matrix(nb * bs, 2.5, rng);
  const Eigen::VectorXd b = Eigen::VectorXd::Random(nb * bs);
  std::vector<std::vector<double>> results;
  for (int workers : {1, 2, 3, 4}) {
    WorkerPool pool(workers);
    std::vector<int> begin(workers + 1);
    for (int w = 0; w <= workers; ++w)
      begin[w] = nb * w / workers;
    BlockParallelFor pf = [&](const std::function<void(int, int)>& body) {
      pool.run([&](int w) { body(begin[w], begin[w + 1]); });
    };
    const KrylovSpace space = KrylovSpace::blocked(pf, nb, bs);
    std::vector<double> x(nb * bs, 0.0);
    const KrylovStats st = gmres(dense_action(A), {b.data(), std::size_t(b.size())}, x, GmresOptions{}, nullptr, &space);
    CHECK(st.converged);
    results.push_back(x);
  }
  for (std::size_t k = 1; k < results.size(); ++k)
    CHECK(results[k] == results[0]);
}

TEST_CASE("block Jacobi preconditioner") {
  const int nb = 3, bs = 2;
  BlockJacobiPreconditioner P(nb, bs);
  const double b0[4] = {2, 1, 0, 4};
  const double b1[4] = {1, 2, 2, 4};  // singular
  const double b2[4] = {0, 1, 1, 0};
  P.set_block(0, b0);
  P.set_block(1, b1);
  P.set_block(2, b2);
  CHECK(P.singular_blocks() == 1);
  std::vector<double> in{1, 2, 3, 4, 5, 6}, out(6);
  P.apply(in, out);
  CHECK(out[0] == doctest::Approx(0.25));
  CHECK(out[1] == doctest::Approx(0.5));
  CHECK(out[2] == 3.0);
  CHECK(out[3] == 4.0);
  CHECK(out[4] == doctest::Approx(6.0));
  CHECK(out[5] == doctest::Approx(5.0));
}

namespace {

std::vector<std::vector<int>> neighbours(const ForestMesh& m) {
  std::vector<std::vector<int>> nb(m.num_leaves());
  for (const Face& f : m.faces())
    if (f.right >= 0 && f.left != f.right) {
      nb[f.left].push_back(f.right);
      nb[f.right].push_back(f.left);
    }
  return nb;
}

} // namespace

TEST_CASE("distance colouring separates leaves within the radius") {
  auto m = build_uniform_mesh(2, {8, 4, 0}, {8, 4, 1}, {true, false, false});
  m = refine_region(m, [](const LeafBox& b) { return b.lower[0] >= 2.0 && b.upper[0] <= 5.0; });
  const auto nb = neighbours(m);
  for (int radius : {1, 2}) {
    const auto colour = distance_colouring(m, radius);
    REQUIRE(int(colour.size()) == m.num_leaves());
    for (int s = 0; s < m.num_leaves(); ++s) {
      std::vector<int> dist(m.num_leaves(), -1);
      std::queue<int> q;
      dist[s] = 0;
      q.push(s);
      while (!q.empty()) {
        const int u = q.front();
        q.pop();
        for (int v : nb[u])
          if (dist[v] < 0) {
            dist[v] = dist[u] + 1;
            q.push(v);
          }
      }
      for (int t = 0; t < m.num_leaves(); ++t)
        if (t != s && dist[t] >= 0 && dist[t] <= radius)
          CHECK(colour[t] != colour[s]);
    }
  }
}

TEST_CASE("probing recovers the block diagonal of a radius-limited operator") {
  auto m = build_uniform_mesh(2, {6, 3, 0}, {6, 3, 1});
  m = refine_region(m, [](const LeafBox& b) { return b.lower[0] >= 2.0 && b.upper[0] <= 4.0; });
  const int nl = m.num_leaves(), bs = 3, n = nl * bs;
  const auto nb = neighbours(m);
  // Random operator coupling face neighbours (distance 2 through the square of a sparse matrix).
  std::mt19937 rng(8);
  std::normal_distribution<double> g;
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(n, n);
  for (int e = 0; e < nl; ++e) {
    for (int i = 0; i < bs; ++i)
      for (int j = 0; j < bs; ++j)
        C(e * bs + i, e * bs + j) = g(rng) + (i == j ? 3.0 : 0.0);
    for (int f : nb[e])
      for (int i = 0; i < bs; ++i)
        for (int j = 0; j < bs; ++j)
          C(e * bs + i, f * bs + j) = 0.3 * g(rng);
  }
  const Eigen::MatrixXd A = C * C;
  const BlockJacobiPreconditioner P = probe_block_diagonal(dense_action(A), m, bs, 2);
  CHECK(P.singular_blocks() == 0);
  // P applied to A's block e must give the identity on that block.
  for (int e = 0; e < nl; ++e) {
    std::vector<double> col(n, 0.0), out(n);
    for (int j = 0; j < bs; ++j) {
      std::fill(col.begin(), col.end(), 0.0);
      for (int i = 0; i < bs; ++i)
        col[e * bs + i] = A(e * bs + i, e * bs + j);
      P.apply(col, out);
      for (int i = 0; i < bs; ++i)
        CHECK(out[e * bs + i] == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-10));
    }
  }
}
