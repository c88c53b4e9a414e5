#include "subflow/linear_solver.hpp"

#include <cmath>
#include <stdexcept>

#include "subflow/errors.hpp"

namespace subflow {

PcgSolver::PcgSolver(const SparseMatrix& a, LinearSolverOptions options)
    : a_(a), options_(options), inv_pivot_(a.rows()) {
  if (a.rows() != a.cols()) throw std::invalid_argument("PcgSolver: matrix must be square");
  if (!a_.isCompressed()) a_.makeCompressed();
  const int* outer = a_.outerIndexPtr();
  const int* inner = a_.innerIndexPtr();
  const double* val = a_.valuePtr();
  Eigen::VectorXd pivot(a_.rows());
  for (Eigen::Index i = 0; i < a_.rows(); ++i) {
    double diag = 0.0;
    double d = 0.0;
    for (int p = outer[i]; p < outer[i + 1]; ++p) {
      const int j = inner[p];
      if (j < i) d -= val[p] * val[p] / pivot(j);
      else if (j == i) diag = val[p];
    }
    if (!(diag > 0.0)) throw std::invalid_argument("PcgSolver: matrix has a non-positive diagonal");
    d += diag;
    pivot(i) = d > 0.0 ? d : diag;
    inv_pivot_(i) = 1.0 / pivot(i);
  }
}

void PcgSolver::precondition(const Eigen::VectorXd& r, Eigen::VectorXd& z) const {
  const int* outer = a_.outerIndexPtr();
  const int* inner = a_.innerIndexPtr();
  const double* val = a_.valuePtr();
  const Eigen::Index n = a_.rows();
  // (D + L) y = r
  for (Eigen::Index i = 0; i < n; ++i) {
    double s = r(i);
    for (int p = outer[i]; p < outer[i + 1] && inner[p] < i; ++p) s -= val[p] * z(inner[p]);
    z(i) = s * inv_pivot_(i);
  }
  // (D + L^T) z = D y
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    double s = 0.0;
    for (int p = outer[i + 1] - 1; p >= outer[i] && inner[p] > i; --p) s += val[p] * z(inner[p]);
    z(i) -= s * inv_pivot_(i);
  }
}

LinearSolveResult PcgSolver::solve(const Eigen::VectorXd& b) const {
  return solve(b, Eigen::VectorXd::Zero(b.size()));
}

LinearSolveResult PcgSolver::solve(const Eigen::VectorXd& b, const Eigen::VectorXd& guess) const {
  if (b.size() != a_.rows() || guess.size() != a_.rows())
    throw std::invalid_argument("PcgSolver: vector length mismatch");
  LinearSolveResult out;
  out.rhs_norm = b.norm();
  if (!std::isfinite(out.rhs_norm)) throw NumericalError("PcgSolver: non-finite right-hand side");
  if (out.rhs_norm == 0.0) {
    out.x = Eigen::VectorXd::Zero(b.size());
    return out;
  }
  const double target = options_.tol_rel * out.rhs_norm;

  Eigen::VectorXd x = guess;
  Eigen::VectorXd r = b - a_ * x;
  double rnorm = r.norm();
  Eigen::VectorXd z(b.size()), p(b.size()), q(b.size());
  int it = 0;
  while (rnorm > target) {
    // (Re)start from the current true residual.
    precondition(r, z);
    p = z;
    double rz = r.dot(z);
    while (it < options_.max_iter) {
      q.noalias() = a_ * p;
      const double pq = p.dot(q);
      if (!(pq > 0.0)) break;
      const double alpha = rz / pq;
      x.noalias() += alpha * p;
      r.noalias() -= alpha * q;
      ++it;
      if (r.norm() <= target) break;
      precondition(r, z);
      const double rz_next = r.dot(z);
      p = z + (rz_next / rz) * p;
      rz = rz_next;
    }
    r = b - a_ * x;
    const double true_norm = r.norm();
    if (!std::isfinite(true_norm)) throw NumericalError("PcgSolver: iteration diverged");
    if (it >= options_.max_iter && true_norm > target)
      throw SolverError("PCG did not converge in " + std::to_string(it) + " iterations",
                        it, true_norm / out.rhs_norm);
    if (true_norm > target && true_norm >= rnorm && it > 0) {
      // no progress since last restart
      throw SolverError("PCG stagnated", it, true_norm / out.rhs_norm);
    }
    rnorm = true_norm;
  }
  out.x = std::move(x);
  out.iterations = it;
  out.residual_norm = rnorm;
  return out;
}

LinearSolveResult solve_linear(const SparseMatrix& a, const Eigen::VectorXd& b,
                               const LinearSolverOptions& options) {
  return PcgSolver(a, options).solve(b);
}

}  // namespace subflow
