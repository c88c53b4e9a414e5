#include "subflow/simulator.hpp"

#include <cmath>
#include <string>

#include "subflow/errors.hpp"

namespace subflow {

StepSystem assemble_step(const Scenario& scenario, std::span<const double> phi_old) {
  const Discretization disc(scenario);
  return {disc.matrix(), disc.rhs(phi_old)};
}

namespace {

// Well rates and reported BHP for the potential at the end of a step.
WellStep evaluate_well(const WellSpec& spec, const WellCoupling& coupling, const Grid3D& grid,
                       const FormationProps& props, const ScalarField3D& potential) {
  WellStep out;
  const double rho_g = props.oil_density * props.gravity;
  std::vector<double> pressures, wis;
  for (const PerforationTerm& p : coupling.perfs) {
    const double q = coupling.rate_controlled
                         ? p.rate
                         : p.well_index * (potential[p.cell] - coupling.target_potential);
    out.perf_rates.push_back(q);
    out.total_rate += q;
    const CellIndex c = grid.cell(p.cell);
    pressures.push_back(potential[p.cell] + rho_g * (grid.depth(c.k) - grid.z_top()));
    wis.push_back(p.well_index);
  }
  if (coupling.rate_controlled)
    out.bhp = report_bhp(spec, grid, pressures, out.perf_rates, wis, props);
  else
    out.bhp = std::get<BhpControl>(spec.control).bhp;
  return out;
}

}  // namespace

Solution run(const Scenario& scenario) {
  const Discretization disc(scenario);
  const PcgSolver solver(disc.matrix(), scenario.solver);
  const Grid3D& grid = scenario.grid;

  Solution sol;
  sol.dt = scenario.dt;
  sol.potential.reserve(static_cast<std::size_t>(scenario.n_steps) + 1);
  sol.potential.emplace_back(grid, scenario.p_ref_top);
  for (const WellSpec& w : scenario.wells) sol.wells.push_back({w.name, {}});

  const double storage_per_pa = disc.accumulation() * scenario.dt;
  Eigen::VectorXd phi = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(grid.cell_count()),
                                                  scenario.p_ref_top);
  for (int step = 0; step < scenario.n_steps; ++step) {
    const Eigen::VectorXd b = disc.rhs(sol.potential.back().values());
    LinearSolveResult res = solver.solve(b, phi);
    if (!res.x.allFinite())
      throw NumericalError("non-finite potential at step " + std::to_string(step + 1));

    StepDiagnostics diag{res.iterations, res.residual_norm, res.rhs_norm, 0.0, 0.0};
    diag.storage_release = storage_per_pa * (phi - res.x).sum();
    phi = std::move(res.x);

    ScalarField3D next(grid, std::vector<double>(phi.data(), phi.data() + phi.size()));
    for (std::size_t w = 0; w < scenario.wells.size(); ++w) {
      WellStep ws = evaluate_well(scenario.wells[w], disc.wells()[w], grid, scenario.props, next);
      diag.production += ws.total_rate * scenario.dt;
      sol.wells[w].steps.push_back(std::move(ws));
    }
    sol.potential.push_back(std::move(next));
    sol.diagnostics.push_back(diag);
  }

  sol.pressure.reserve(sol.potential.size());
  for (const ScalarField3D& f : sol.potential)
    sol.pressure.push_back(pressure_from_potential(f, scenario.props));
  return sol;
}

}  // namespace subflow
