#pragma once

#include <functional>
#include <vector>

#include "subflow/discretization.hpp"
#include "subflow/linear_solver.hpp"
#include "subflow/scenario.hpp"
#include "subflow/wells.hpp"

namespace subflow {

struct StepDiagnostics {
  int iterations = 0;
  double residual_norm = 0.0;
  double rhs_norm = 0.0;
  double storage_release = 0.0;   // m^3 (standard), sum phi C_o V / B_o (Phi^n - Phi^{n+1})
  double production = 0.0;        // m^3 (standard), sum of well rates * dt
};

/// Snapshots 0..n_steps (index 0 is the initial state) and per-step well results.
struct Solution {
  std::vector<ScalarField3D> potential;
  std::vector<ScalarField3D> pressure;
  std::vector<WellSolution> wells;
  std::vector<StepDiagnostics> diagnostics;
  double dt = 0.0;

  int step_count() const { return static_cast<int>(potential.size()) - 1; }
};

struct StepSystem {
  SparseMatrix a;
  Eigen::VectorXd b;
};

/// Linear system for Phi^{n+1} given Phi^n.
StepSystem assemble_step(const Scenario& scenario, std::span<const double> phi_old);

/// Fully implicit forward run from the uniform initial potential p_ref_top.
/// Throws std::invalid_argument for an invalid scenario and SolverError /
/// NumericalError for numerical failure.
Solution run(const Scenario& scenario);

/// Anything that maps a scenario (with its permeability) to a Solution: the
/// simulator itself, or a surrogate replaying exported predictions.
using ForwardModel = std::function<Solution(const Scenario&)>;

}  // namespace subflow
