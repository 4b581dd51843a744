#pragma once

#include "ncdg/mesh/forest.hpp"

#include <functional>
#include <span>
#include <vector>

namespace ncdg {

using LinearAction = std::function<void(std::span<const double> x, std::span<double> y)>;
// Runs body(begin, end) over disjoint block ranges covering [0, nblocks), possibly in parallel.
using BlockParallelFor = std::function<void(const std::function<void(int begin, int end)>& body)>;

// Vector kernels used by the solver. Dot products are reduced per block and the
// partial sums added in block order, so results do not depend on how blocks are split.
struct KrylovSpace {
  std::function<double(std::span<const double>, std::span<const double>)> dot;
  std::function<void(double a, std::span<const double> x, std::span<double> y)> axpy;  // y += a x
  std::function<void(double a, std::span<double> x)> scale;

  static KrylovSpace sequential();
  static KrylovSpace blocked(BlockParallelFor pf, int nblocks, int block_size);
};

struct GmresOptions {
  double tol = 1e-8;  // relative to ||b||
  double abs_tol = 0.0;  // also converged once ||r|| <= abs_tol
  int restart = 30;
  int max_iter = 1000;
};

struct KrylovStats {
  int iterations = 0;
  int restarts = 0;
  bool converged = false;
  bool breakdown = false;
  double residual = 0.0;            // explicitly recomputed ||b - A x|| / ||b||
  double estimated_residual = 0.0;  // Arnoldi least-squares estimate at exit
  std::vector<double> history;      // estimate after every iteration
};

// Restarted right-preconditioned GMRES with modified Gram-Schmidt (one extra
// orthogonalisation pass when cancellation is detected). `x` holds the initial
// guess on entry. `precond`, if given, applies an approximate inverse of A.
KrylovStats gmres(const LinearAction& A, std::span<const double> b, std::span<double> x, const GmresOptions& opt,
                  const LinearAction* precond = nullptr, const KrylovSpace* space = nullptr);

// Inverse diagonal blocks of an operator on vectors of nblocks contiguous blocks.
class BlockJacobiPreconditioner {
public:
  BlockJacobiPreconditioner() = default;
  BlockJacobiPreconditioner(int nblocks, int block_size);

  // Factorises the dense row-major block; a singular block falls back to identity.
  void set_block(int block, const double* A);
  void apply(std::span<const double> in, std::span<double> out, const BlockParallelFor* pf = nullptr) const;

  int blocks() const { return nblocks_; }
  int block_size() const { return bs_; }
  int singular_blocks() const;

private:
  int nblocks_ = 0;
  int bs_ = 0;
  std::vector<double> inverse_;  // nblocks x bs x bs
  std::vector<char> identity_;
};

// Greedy colouring of leaves in index order such that leaves within `radius`
// face-neighbour steps of each other get different colours.
std::vector<int> distance_colouring(const ForestMesh& mesh, int radius);

// Extracts the leaf-diagonal blocks of a matrix-free operator (stencil radius
// `radius` in face-neighbour steps) by probing one colour and one local index at a time.
BlockJacobiPreconditioner probe_block_diagonal(const LinearAction& A, const ForestMesh& mesh, int block_size,
                                               int radius);

} // namespace ncdg
