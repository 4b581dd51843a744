#include "ncdg/krylov/gmres.hpp"

#include "ncdg/common/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <memory>
#include <set>

namespace ncdg {

KrylovSpace KrylovSpace::sequential() {
  KrylovSpace s;
  s.dot = [](std::span<const double> a, std::span<const double> b) {
    double r = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
      r += a[i] * b[i];
    return r;
  };
  s.axpy = [](double a, std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < x.size(); ++i)
      y[i] += a * x[i];
  };
  s.scale = [](double a, std::span<double> x) {
    for (double& v : x)
      v *= a;
  };
  return s;
}

KrylovSpace KrylovSpace::blocked(BlockParallelFor pf, int nblocks, int block_size) {
  KrylovSpace s;
  auto partial = std::make_shared<std::vector<double>>(nblocks);
  s.dot = [pf, partial, nblocks, block_size](std::span<const double> a, std::span<const double> b) {
    pf([&](int lo, int hi) {
      for (int k = lo; k < hi; ++k) {
        double r = 0.0;
        const std::size_t o = std::size_t(k) * block_size;
        for (int i = 0; i < block_size; ++i)
          r += a[o + i] * b[o + i];
        (*partial)[k] = r;
      }
    });
    double total = 0.0;
    for (int k = 0; k < nblocks; ++k)
      total += (*partial)[k];
    return total;
  };
  s.axpy = [pf, block_size](double a, std::span<const double> x, std::span<double> y) {
    pf([&](int lo, int hi) {
      for (std::size_t i = std::size_t(lo) * block_size; i < std::size_t(hi) * block_size; ++i)
        y[i] += a * x[i];
    });
  };
  s.scale = [pf, block_size](double a, std::span<double> x) {
    pf([&](int lo, int hi) {
      for (std::size_t i = std::size_t(lo) * block_size; i < std::size_t(hi) * block_size; ++i)
        x[i] *= a;
    });
  };
  return s;
}

KrylovStats gmres(const LinearAction& A, std::span<const double> b, std::span<double> x, const GmresOptions& opt,
                  const LinearAction* precond, const KrylovSpace* space) {
  if (!(opt.tol > 0.0 && opt.tol < 1.0) || !(opt.abs_tol >= 0.0) || opt.restart < 1 || opt.max_iter < 1)
    throw ConfigError("gmres: tolerance must lie in (0,1), abs_tol must be >= 0 and iteration limits must be >= 1");
  if (b.size() != x.size())
    throw UsageError("gmres: size mismatch");
  for (double v : b)
    if (!std::isfinite(v))
      throw InputError("gmres: right-hand side is not finite");
  const KrylovSpace seq = KrylovSpace::sequential();
  const KrylovSpace& S = space ? *space : seq;
  const std::size_t n = b.size();
  const int m = opt.restart;
  KrylovStats st;

  const double bnorm = std::sqrt(S.dot(b, b));
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    st.converged = true;
    return st;
  }
  const double tol = std::max(opt.tol, opt.abs_tol / bnorm);

  std::vector<std::vector<double>> V(m + 1, std::vector<double>(n));
  std::vector<std::vector<double>> Z;  // preconditioned directions
  if (precond)
    Z.assign(m, std::vector<double>(n));
  std::vector<double> H(std::size_t(m + 1) * m, 0.0), cs(m), sn(m), g(m + 1), w(n), r(n);
  auto h = [&](int i, int j) -> double& { return H[std::size_t(i) * m + j]; };

  auto true_residual = [&]() {
    A(x, r);
    for (std::size_t i = 0; i < n; ++i)
      r[i] = b[i] - r[i];
    return std::sqrt(S.dot(r, r));
  };

  double rnorm = true_residual();
  st.residual = st.estimated_residual = rnorm / bnorm;
  if (st.residual <= tol) {
    st.converged = true;
    return st;
  }

  while (st.iterations < opt.max_iter) {
    std::copy(r.begin(), r.end(), V[0].begin());
    S.scale(1.0 / rnorm, V[0]);
    std::fill(g.begin(), g.end(), 0.0);
    g[0] = rnorm;
    int j = 0;
    bool done = false;
    for (; j < m && st.iterations < opt.max_iter; ++j) {
      const std::vector<double>& dir = precond ? Z[j] : V[j];
      if (precond)
        (*precond)(V[j], Z[j]);
      A(dir, w);
      const double before = std::sqrt(S.dot(w, w));
      for (int i = 0; i <= j; ++i) {
        h(i, j) = S.dot(w, V[i]);
        S.axpy(-h(i, j), V[i], w);
      }
      double after = std::sqrt(S.dot(w, w));
      if (after < 0.7 * before) {
        for (int i = 0; i <= j; ++i) {
          const double c = S.dot(w, V[i]);
          h(i, j) += c;
          S.axpy(-c, V[i], w);
        }
        after = std::sqrt(S.dot(w, w));
      }
      h(j + 1, j) = after;
      for (int i = 0; i < j; ++i) {
        const double t = cs[i] * h(i, j) + sn[i] * h(i + 1, j);
        h(i + 1, j) = -sn[i] * h(i, j) + cs[i] * h(i + 1, j);
        h(i, j) = t;
      }
      const double den = std::hypot(h(j, j), h(j + 1, j));
      cs[j] = den > 0 ? h(j, j) / den : 1.0;
      sn[j] = den > 0 ? h(j + 1, j) / den : 0.0;
      h(j, j) = den;
      h(j + 1, j) = 0.0;
      g[j + 1] = -sn[j] * g[j];
      g[j] = cs[j] * g[j];
      ++st.iterations;
      st.estimated_residual = std::abs(g[j + 1]) / bnorm;
      st.history.push_back(st.estimated_residual);
      const bool breakdown = after <= 1e-14 * before || after == 0.0;
      if (breakdown)
        st.breakdown = true;
      if (st.estimated_residual <= tol || breakdown) {
        ++j;
        done = true;
        break;
      }
      std::copy(w.begin(), w.end(), V[j + 1].begin());
      S.scale(1.0 / after, V[j + 1]);
    }
    // Back substitution and update.
    std::vector<double> y(j, 0.0);
    for (int i = j - 1; i >= 0; --i) {
      double s = g[i];
      for (int k = i + 1; k < j; ++k)
        s -= h(i, k) * y[k];
      y[i] = h(i, i) != 0.0 ? s / h(i, i) : 0.0;
    }
    for (int i = 0; i < j; ++i)
      S.axpy(y[i], precond ? Z[i] : V[i], x);
    rnorm = true_residual();
    st.residual = rnorm / bnorm;
    if (done || st.residual <= tol) {
      st.converged = st.residual <= tol * (1.0 + 1e-6);
      return st;
    }
    ++st.restarts;
  }
  st.converged = st.residual <= tol;
  return st;
}

BlockJacobiPreconditioner::BlockJacobiPreconditioner(int nblocks, int block_size)
    : nblocks_(nblocks), bs_(block_size), inverse_(std::size_t(nblocks) * block_size * block_size, 0.0),
      identity_(nblocks, 1) {}

void BlockJacobiPreconditioner::set_block(int block, const double* A) {
  using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const Mat> a(A, bs_, bs_);
  Eigen::FullPivLU<Mat> lu(a);
  const double scale = a.cwiseAbs().maxCoeff();
  Eigen::Map<Mat> inv(&inverse_[std::size_t(block) * bs_ * bs_], bs_, bs_);
  if (!(scale > 0.0) || !lu.isInvertible() || !(std::abs(lu.rcond()) > 1e-14)) {
    std::cerr << "warning: singular preconditioner block " << block << ", using identity\n";
    inv.setIdentity();
    identity_[block] = 1;
    return;
  }
  inv = lu.inverse();
  identity_[block] = 0;
}

void BlockJacobiPreconditioner::apply(std::span<const double> in, std::span<double> out,
                                      const BlockParallelFor* pf) const {
  auto body = [&](int lo, int hi) {
    for (int e = lo; e < hi; ++e) {
      const double* Ai = &inverse_[std::size_t(e) * bs_ * bs_];
      const double* x = &in[std::size_t(e) * bs_];
      double* y = &out[std::size_t(e) * bs_];
      for (int i = 0; i < bs_; ++i) {
        double s = 0.0;
        for (int k = 0; k < bs_; ++k)
          s += Ai[i * bs_ + k] * x[k];
        y[i] = s;
      }
    }
  };
  if (pf)
    (*pf)(body);
  else
    body(0, nblocks_);
}

int BlockJacobiPreconditioner::singular_blocks() const {
  return static_cast<int>(std::count(identity_.begin(), identity_.end(), 1));
}

std::vector<int> distance_colouring(const ForestMesh& mesh, int radius) {
  const int n = mesh.num_leaves();
  std::vector<std::vector<int>> adj(n);
  for (const Face& f : mesh.faces())
    if (f.kind != FaceKind::Boundary && f.left != f.right) {
      adj[f.left].push_back(f.right);
      adj[f.right].push_back(f.left);
    }
  for (auto& a : adj) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }
  std::vector<int> colour(n, -1);
  std::vector<int> mark(n, -1), frontier, next, used;
  for (int e = 0; e < n; ++e) {
    // Breadth-first search up to `radius` steps.
    used.clear();
    frontier.assign(1, e);
    mark[e] = e;
    for (int step = 0; step < radius; ++step) {
      next.clear();
      for (int v : frontier)
        for (int w : adj[v])
          if (mark[w] != e) {
            mark[w] = e;
            next.push_back(w);
            if (colour[w] >= 0)
              used.push_back(colour[w]);
          }
      frontier.swap(next);
    }
    std::sort(used.begin(), used.end());
    int c = 0;
    for (int u : used) {
      if (u == c)
        ++c;
      else if (u > c)
        break;
    }
    colour[e] = c;
  }
  return colour;
}

BlockJacobiPreconditioner probe_block_diagonal(const LinearAction& A, const ForestMesh& mesh, int block_size,
                                               int radius) {
  const int n = mesh.num_leaves();
  const auto colour = distance_colouring(mesh, radius);
  const int ncol = n ? *std::max_element(colour.begin(), colour.end()) + 1 : 0;
  std::vector<std::vector<int>> members(ncol);
  for (int e = 0; e < n; ++e)
    members[colour[e]].push_back(e);
  const std::size_t N = std::size_t(n) * block_size;
  std::vector<double> x(N, 0.0), y(N);
  std::vector<double> blocks(std::size_t(n) * block_size * block_size);
  for (int c = 0; c < ncol; ++c)
    for (int j = 0; j < block_size; ++j) {
      for (int e : members[c])
        x[std::size_t(e) * block_size + j] = 1.0;
      A(x, y);
      for (int e : members[c]) {
        x[std::size_t(e) * block_size + j] = 0.0;
        for (int i = 0; i < block_size; ++i)
          blocks[(std::size_t(e) * block_size + i) * block_size + j] = y[std::size_t(e) * block_size + i];
      }
    }
  BlockJacobiPreconditioner P(n, block_size);
  for (int e = 0; e < n; ++e)
    P.set_block(e, &blocks[std::size_t(e) * block_size * block_size]);
  return P;
}

} // namespace ncdg
