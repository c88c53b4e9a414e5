#pragma once

#include <span>
#include <vector>

#include "subflow/discretization.hpp"
#include "subflow/grid.hpp"
#include "subflow/scenario.hpp"

namespace subflow {

struct LossWeights {
  double data = 1.0;
  double pde = 1.0;
  double bc = 1.0;

  /// Throws std::invalid_argument for negative or all-zero weights.
  void validate() const;
  bool operator==(const LossWeights&) const = default;
};

/// Mean divides each squared sum by its element count; Sum keeps the raw sum.
enum class Normalization { Mean, Sum };

enum class Axis { X, Y, Z };
enum class Side { Low, High };

/// Prescribed outward normal derivative g on one outer face of the box.
struct NeumannFace {
  Axis axis = Axis::X;
  Side side = Side::Low;
  double g = 0.0;
};

/// Prescribed value h in a boundary cell.
struct DirichletCell {
  CellIndex cell;
  double value = 0.0;
};

struct BoundarySpec {
  std::vector<NeumannFace> neumann;
  std::vector<DirichletCell> dirichlet;

  /// g = 0 on all six outer faces.
  static BoundarySpec no_flow();
};

/// Per-volume residual (1/s) of one implicit step, using the same
/// transmissibilities, well terms and no-flow omission as the step matrix:
///   R = [ -sum_f T_f (Phi_c - Phi_nb) - q_c - acc (Phi_c - Phi_c^old) ] / V
/// where q_c is the production of the cell (fixed for rate wells,
/// WI (Phi_c - Phi_w) for BHP wells). Equivalently R = (b - A Phi^{n+1}) / V.
std::vector<double> step_residual(const Discretization& disc, std::span<const double> phi_old,
                                  std::span<const double> phi_new);

struct PdeResidual {
  int n_steps = 0;
  std::size_t n_cells = 0;
  std::vector<double> values;      // per-volume residual, index (step - 1) * n_cells + cell
  std::vector<double> load_norm;   // ||b||_2 of each step system (m^3/s)
  std::vector<double> max_abs;     // max_c |V R_c| per step (m^3/s)

  /// max over steps of max_c |V R_c| / ||b||, the linear solver's relative scale.
  double max_relative() const;
};

/// Residual of every step n -> n+1 of a potential sequence (>= 2 snapshots).
PdeResidual pde_residual(const Scenario& scenario, const std::vector<ScalarField3D>& phi_seq);

/// Squared mismatch summed over every element of every snapshot.
double data_loss(const std::vector<ScalarField3D>& pred, const std::vector<ScalarField3D>& ref,
                 Normalization norm = Normalization::Mean);

/// Neumann term uses the one-sided difference (Phi_boundary - Phi_inner) / h.
/// Neumann and Dirichlet sums are normalized separately under Mean.
/// Throws std::invalid_argument for Dirichlet cells not on the boundary.
double bc_loss(const std::vector<ScalarField3D>& seq, const BoundarySpec& spec,
               Normalization norm = Normalization::Mean);

/// out = phi0 (1 - t_norm) - t_norm * raw, applied elementwise. t_norm in [0, 1].
double hard_ic_transform(double raw, double phi0, double t_norm);
std::vector<double> hard_ic_transform(std::span<const double> raw, double phi0, double t_norm);

double total_loss(double data, double pde, double bc, const LossWeights& weights);

/// Losses of a candidate potential sequence, in nondimensional units:
/// potential divided by `potential_scale` (p_ref_top), time by the horizon.
/// The scaled residual is R * residual_scale with
///   residual_scale = horizon * B_o / (phi C_o p_ref_top).
struct ResidualReport {
  int n_steps = 0;
  std::size_t n_cells = 0;
  std::vector<double> residual;    // scaled, index (step - 1) * n_cells + cell

  double data = 0.0;
  double pde = 0.0;
  double bc = 0.0;
  double total = 0.0;
  LossWeights weights;
  Normalization normalization = Normalization::Mean;

  int n_k = 0;     // labelled realizations in the data term
  int n_t = 0;     // labelled steps
  int n_kv = 1;    // realizations in the physics terms
  int n_tv = 0;    // steps in the physics terms

  double potential_scale = 1.0;
  double time_scale = 1.0;
  double residual_scale = 1.0;
  double max_relative_residual = 0.0;
};

/// `reference` may be null (no data term). Both sequences include the
/// initial snapshot; the data and BC terms use snapshots 1..n.
ResidualReport evaluate_losses(const Scenario& scenario, const std::vector<ScalarField3D>& phi_seq,
                               const LossWeights& weights, const BoundarySpec& bc,
                               const std::vector<ScalarField3D>* reference = nullptr,
                               Normalization norm = Normalization::Mean);

}  // namespace subflow
