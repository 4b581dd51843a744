#pragma once

#include "ncdg/krylov/gmres.hpp"
#include "ncdg/time/split.hpp"

#include <functional>
#include <string>
#include <vector>

namespace ncdg {

// Paired explicit (A~, b~, c~) and diagonally implicit (A, b, c) tableaux, row-major s x s.
struct ButcherTableau {
  std::string name;
  int stages = 0;
  std::vector<double> A_exp, b_exp, c_exp;
  std::vector<double> A_imp, b_imp, c_imp;

  double ae(int i, int j) const { return A_exp[i * stages + j]; }
  double ai(int i, int j) const { return A_imp[i * stages + j]; }
  // Last stage equals the update for both tableaux.
  bool stiffly_accurate() const;
  // Throws ConfigError if consistency or the order-2 conditions fail.
  void validate() const;

  static ButcherTableau ars222();
  static ButcherTableau by_name(const std::string& name);
};

struct ImplicitSolveConfig {
  double picard_tol = 1e-6;  // relative pressure increment
  int picard_max = 10;
  double krylov_tol = 1e-8;
  int krylov_restart = 30;
  int krylov_max = 1000;
  bool preconditioner = true;
  int preconditioner_refresh = 50;  // steps between block re-extractions
  void validate() const;
};

struct StepStats {
  double t = 0.0;
  double dt = 0.0;
  std::vector<int> picard;  // per implicit stage
  std::vector<int> krylov;  // per implicit stage, summed over Picard iterations
  std::vector<double> increment;
  // Outward boundary flux of mass integrated over the step (b~-weighted).
  double boundary_mass = 0.0;
  int total_picard() const;
  int total_krylov() const;
};

class ImexIntegrator {
public:
  ImexIntegrator(const SplitOperators& ops, ButcherTableau tableau, ImplicitSolveConfig cfg);

  const ButcherTableau& tableau() const { return tab_; }
  const ImplicitSolveConfig& config() const { return cfg_; }
  const SplitOperators& operators() const { return *ops_; }

  // Advances U from t to t + dt. Throws SolverError on non-convergence and
  // PositivityError on loss of positivity.
  StepStats step(double t, double dt, Field& U);

  // U_i = Ustar + a_dt I(U_i), starting from the iterate in Ui; returns Picard and Krylov counts.
  void solve_stage(double a_dt, const Field& Ustar, Field& Ui, int& picard, int& krylov, double& incr);

  // Schur-complement operator p -> p - (gamma-1) (a dt)^2 P [div(h grad p) + K g dp/dz] with h
  // frozen; the gravity term is present only when gravity is implicit. With
  // `affine` the gradient sees the far-field background pressure; otherwise
  // this is the linear part used by the Krylov solve.
  LinearAction helmholtz_action(double a_dt, const Field& h, bool affine = false) const;

  // Block structure used by vector kernels.
  BlockParallelFor block_parallel_for() const;

private:
  const SplitOperators* ops_;
  ButcherTableau tab_;
  ImplicitSolveConfig cfg_;
  KrylovSpace space_;
  BlockJacobiPreconditioner precond_;
  double precond_adt_ = -1.0;
  long steps_since_refresh_ = 0;
};

// Classical explicit RK4 on the full residual E + I (reference integrator).
void rk4_step(const SplitOperators& ops, double t, double dt, Field& U);

using StepFunction = std::function<StepStats(double t, double dt, Field& U)>;
using StepCallback = std::function<void(int step, double t, const Field& U, const StepStats& stats)>;

struct TimeLoopResult {
  int steps = 0;
  double t_final = 0.0;
  bool failed = false;
  std::string error;
};

// Fixed steps of dt; the last step is shortened to land exactly on T_f. A
// failing step stops the loop; the result records the failure, and the
// exception is rethrown when `rethrow` is set.
TimeLoopResult run_time_loop(Field& U, double dt, double T_f, const StepFunction& step, const StepCallback& cb = {},
                             bool rethrow = false);

} // namespace ncdg
