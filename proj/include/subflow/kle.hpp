#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "subflow/grid.hpp"

namespace subflow {

/// Gaussian ln-permeability statistics with separable exponential covariance
///   C(x, x') = variance * exp(-|dx|/eta_x - |dy|/eta_y - |dz|/eta_z).
struct CovarianceSpec {
  double mean_lnk = 4.0;   // ln(mD)
  double variance = 0.5;
  double eta_x = 152.4;    // m
  double eta_y = 152.4;
  double eta_z = 152.4;

  void validate() const;
  bool operator==(const CovarianceSpec&) const = default;
};

/// Truncated eigenpairs of the discrete covariance matrix on a grid's cell centers.
///
/// Modes are stored as columns of an (n_cells x n_modes) matrix in the grid's
/// k-fastest order, eigenvalues descending. Each mode is the outer product of
/// three 1D eigenvectors; `axis_modes` keeps the (ix, iy, iz) indices.
struct KleBasis {
  Grid3D grid;
  CovarianceSpec covariance;        // spec the eigenvalues were computed for
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd modes;
  std::vector<CellIndex> axis_modes;
  double total_variance = 0.0;      // trace of the full discrete covariance

  int mode_count() const { return static_cast<int>(eigenvalues.size()); }
};

using KleSample = std::vector<double>;

/// Kronecker eigendecomposition of the separable covariance. Throws
/// std::invalid_argument for n_modes outside [1, cell_count], zero variance or
/// non-positive correlation lengths.
KleBasis build_basis(const Grid3D& grid, const CovarianceSpec& cov, int n_modes);

/// Fraction of total variance captured by the first m modes.
double energy_fraction(const KleBasis& basis, int m);

/// Z = mean_lnk + sum_i sqrt(lambda_i) f_i xi_i, in ln(mD).
///
/// `cov.mean_lnk` sets the mean. `cov.variance` may differ from the variance the
/// basis was built for: eigenvectors do not depend on it and eigenvalues scale
/// linearly, so the fluctuation is rescaled (variance 0 gives the mean field).
/// Correlation lengths must match the basis.
ScalarField3D sample_field(const KleBasis& basis, const KleSample& xi, const CovarianceSpec& cov);

/// n i.i.d. standard-normal vectors of length n_modes from one seeded stream.
std::vector<KleSample> draw_samples(std::uint64_t seed, int n, int n_modes);

/// Truncated pointwise variance sum_{i<m} lambda_i f_i(x)^2 at the basis variance.
std::vector<double> truncated_variance(const KleBasis& basis, int m);

/// Permeability in m^2 from an ln(mD) field.
ScalarField3D permeability_from_lnk(const ScalarField3D& lnk);

}  // namespace subflow
