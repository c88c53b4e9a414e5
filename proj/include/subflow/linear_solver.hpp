#pragma once

#include <vector>

#include <Eigen/Dense>

#include "subflow/discretization.hpp"

namespace subflow {

struct LinearSolveResult {
  Eigen::VectorXd x;
  int iterations = 0;
  double residual_norm = 0.0;   // ||b - A x||_2, recomputed from x
  double rhs_norm = 0.0;        // ||b||_2
};

/// Conjugate gradients preconditioned with diagonal incomplete Cholesky
/// (zero fill-in; identical to IC(0) on stencil graphs). The preconditioner is
/// factored once and reused across right-hand sides.
///
/// Convergence is declared on the true residual ||b - A x|| <= tol ||b||.
class PcgSolver {
 public:
  PcgSolver(const SparseMatrix& a, LinearSolverOptions options);

  /// Throws SolverError (carrying the achieved relative residual) on
  /// non-convergence within max_iter.
  LinearSolveResult solve(const Eigen::VectorXd& b, const Eigen::VectorXd& guess) const;
  LinearSolveResult solve(const Eigen::VectorXd& b) const;

 private:
  void precondition(const Eigen::VectorXd& r, Eigen::VectorXd& z) const;

  SparseMatrix a_;
  LinearSolverOptions options_;
  Eigen::VectorXd inv_pivot_;
};

/// One-shot solve of an SPD system.
LinearSolveResult solve_linear(const SparseMatrix& a, const Eigen::VectorXd& b,
                               const LinearSolverOptions& options = {});

}  // namespace subflow
