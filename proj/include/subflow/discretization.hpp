#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Sparse>

#include "subflow/scenario.hpp"

namespace subflow {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// T = (2 k1 k2 / (k1 + k2)) * area / (mu B_o dist); zero when k1 + k2 == 0.
double transmissibility(double k1, double k2, double area, double dist, double viscosity,
                        double formation_factor);

struct PerforationTerm {
  std::size_t cell = 0;
  double well_index = 0.0;   // m^3/(Pa s)
  double rate = 0.0;         // fixed production, rate-controlled wells only
};

struct WellCoupling {
  std::size_t well = 0;            // index into Scenario::wells
  bool rate_controlled = true;
  double target_potential = 0.0;   // BHP wells: BHP expressed as a potential
  std::vector<PerforationTerm> perfs;
};

/// Cell-centered fully implicit discretization of
///   div(k / (mu B_o) grad Phi) + q = (phi C_o / B_o) dPhi/dt
/// multiplied through by the cell volume. Exterior faces are omitted (no flow).
///
/// For one step the system is A Phi^{n+1} = b with
///   A = acc I + L + diag(WI of BHP perforations)
///   b = acc Phi^n - q_rate + WI Phi_w
/// where L is the transmissibility-weighted graph Laplacian.
class Discretization {
 public:
  explicit Discretization(const Scenario& scenario);

  const Grid3D& grid() const { return grid_; }
  double accumulation() const { return accumulation_; }   // phi C_o V / (B_o dt)
  double cell_volume() const { return grid_.cell_volume(); }

  // Transmissibility of the face between cell n and its +x (+y, +z) neighbour;
  // zero where that neighbour is outside the grid.
  std::span<const double> tx() const { return tx_; }
  std::span<const double> ty() const { return ty_; }
  std::span<const double> tz() const { return tz_; }

  const std::vector<WellCoupling>& wells() const { return wells_; }

  SparseMatrix matrix() const;
  Eigen::VectorXd rhs(std::span<const double> phi_old) const;

 private:
  Grid3D grid_;
  double accumulation_;
  std::vector<double> tx_, ty_, tz_;
  std::vector<WellCoupling> wells_;
};

}  // namespace subflow
