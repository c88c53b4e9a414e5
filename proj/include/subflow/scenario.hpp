#pragma once

#include <vector>

#include "subflow/grid.hpp"
#include "subflow/wells.hpp"

namespace subflow {

struct LinearSolverOptions {
  double tol_rel = 1e-10;
  int max_iter = 20000;
};

/// Everything needed for one forward run. SI units throughout.
struct Scenario {
  Grid3D grid;
  FormationProps props;
  ScalarField3D perm;              // m^2, isotropic per cell
  std::vector<WellSpec> wells;
  double dt = 86400.0;             // s
  int n_steps = 20;
  double p_ref_top = 413.69e5;     // Pa, initial potential everywhere
  LinearSolverOptions solver;

  /// Throws std::invalid_argument on any violated invariant.
  void validate() const;

  double horizon() const { return dt * n_steps; }
};

}  // namespace subflow
