#include "subflow/kle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <tuple>

#include "subflow/units.hpp"

namespace subflow {

void CovarianceSpec::validate() const {
  if (!std::isfinite(mean_lnk)) throw std::invalid_argument("mean_lnk must be finite");
  if (!(variance >= 0.0) || !std::isfinite(variance))
    throw std::invalid_argument("variance must be non-negative");
  if (!(eta_x > 0.0) || !(eta_y > 0.0) || !(eta_z > 0.0))
    throw std::invalid_argument("correlation lengths must be positive");
}

namespace {

struct AxisEigen {
  Eigen::VectorXd values;   // descending
  Eigen::MatrixXd vectors;  // columns match values
};

// Unit-variance 1D exponential covariance at n cell centers of spacing h.
AxisEigen axis_eigen(int n, double h, double eta) {
  Eigen::MatrixXd c(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) c(a, b) = std::exp(-std::abs(a - b) * h / eta);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(c);
  if (solver.info() != Eigen::Success) throw std::runtime_error("1D covariance eigensolve failed");

  AxisEigen out;
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  const double top = out.values.size() > 0 ? out.values(0) : 0.0;
  for (int m = 0; m < n; ++m) {
    if (out.values(m) < 0.0) {
      if (out.values(m) < -1e-10 * top)
        throw std::runtime_error("covariance matrix is not positive semi-definite");
      out.values(m) = 0.0;
    }
    // sign: first significant component positive
    auto col = out.vectors.col(m);
    const double cutoff = 1e-6 * col.cwiseAbs().maxCoeff();
    for (int a = 0; a < n; ++a) {
      if (std::abs(col(a)) > cutoff) {
        if (col(a) < 0.0) col *= -1.0;
        break;
      }
    }
  }
  return out;
}

}  // namespace

KleBasis build_basis(const Grid3D& grid, const CovarianceSpec& cov, int n_modes) {
  cov.validate();
  if (!(cov.variance > 0.0)) throw std::invalid_argument("KLE basis needs a positive variance");
  const std::size_t n_cells = grid.cell_count();
  if (n_modes < 1 || static_cast<std::size_t>(n_modes) > n_cells)
    throw std::invalid_argument("n_modes must be in [1, " + std::to_string(n_cells) + "]");

  const AxisEigen ex = axis_eigen(grid.nx(), grid.dx(), cov.eta_x);
  const AxisEigen ey = axis_eigen(grid.ny(), grid.dy(), cov.eta_y);
  const AxisEigen ez = axis_eigen(grid.nz(), grid.dz(), cov.eta_z);

  // Candidates are all (ix, iy, iz) triples; product eigenvalue, then ties by axis values.
  std::vector<CellIndex> triples;
  triples.reserve(n_cells);
  for (int a = 0; a < grid.nx(); ++a)
    for (int b = 0; b < grid.ny(); ++b)
      for (int c = 0; c < grid.nz(); ++c) triples.push_back({a, b, c});

  auto value = [&](const CellIndex& t) {
    return ex.values(t.i) * ey.values(t.j) * ez.values(t.k);
  };
  auto before = [&](const CellIndex& l, const CellIndex& r) {
    const double vl = value(l), vr = value(r);
    if (vl != vr) return vl > vr;
    if (ex.values(l.i) != ex.values(r.i)) return ex.values(l.i) > ex.values(r.i);
    if (ey.values(l.j) != ey.values(r.j)) return ey.values(l.j) > ey.values(r.j);
    if (ez.values(l.k) != ez.values(r.k)) return ez.values(l.k) > ez.values(r.k);
    return std::tie(l.i, l.j, l.k) < std::tie(r.i, r.j, r.k);
  };
  std::partial_sort(triples.begin(), triples.begin() + n_modes, triples.end(), before);
  triples.resize(static_cast<std::size_t>(n_modes));

  KleBasis basis{grid, cov, Eigen::VectorXd(n_modes),
                 Eigen::MatrixXd(static_cast<Eigen::Index>(n_cells), n_modes), triples,
                 cov.variance * static_cast<double>(n_cells)};
  for (int m = 0; m < n_modes; ++m) {
    const CellIndex& t = triples[static_cast<std::size_t>(m)];
    basis.eigenvalues(m) = cov.variance * value(t);
    auto col = basis.modes.col(m);
    for (int i = 0; i < grid.nx(); ++i)
      for (int j = 0; j < grid.ny(); ++j) {
        const double fxy = ex.vectors(i, t.i) * ey.vectors(j, t.j);
        for (int k = 0; k < grid.nz(); ++k)
          col(static_cast<Eigen::Index>(grid.offset(i, j, k))) = fxy * ez.vectors(k, t.k);
      }
  }
  return basis;
}

double energy_fraction(const KleBasis& basis, int m) {
  if (m < 1 || m > basis.mode_count())
    throw std::out_of_range("energy_fraction: m must be in [1, " +
                            std::to_string(basis.mode_count()) + "]");
  return basis.eigenvalues.head(m).sum() / basis.total_variance;
}

namespace {

double variance_scale(const KleBasis& basis, const CovarianceSpec& cov) {
  cov.validate();
  const CovarianceSpec& b = basis.covariance;
  if (cov.eta_x != b.eta_x || cov.eta_y != b.eta_y || cov.eta_z != b.eta_z)
    throw std::invalid_argument("correlation lengths differ from the KLE basis");
  return cov.variance / b.variance;
}

}  // namespace

ScalarField3D sample_field(const KleBasis& basis, const KleSample& xi, const CovarianceSpec& cov) {
  if (xi.size() != static_cast<std::size_t>(basis.mode_count()))
    throw std::invalid_argument("KLE sample has " + std::to_string(xi.size()) +
                                " coefficients, basis has " +
                                std::to_string(basis.mode_count()) + " modes");
  const double scale = std::sqrt(variance_scale(basis, cov));
  Eigen::VectorXd weights(basis.mode_count());
  for (int m = 0; m < basis.mode_count(); ++m) {
    if (!std::isfinite(xi[static_cast<std::size_t>(m)]))
      throw std::invalid_argument("KLE sample has a non-finite coefficient");
    weights(m) = scale * std::sqrt(basis.eigenvalues(m)) * xi[static_cast<std::size_t>(m)];
  }
  const Eigen::VectorXd z = basis.modes * weights;
  std::vector<double> values(z.size());
  for (Eigen::Index n = 0; n < z.size(); ++n) values[static_cast<std::size_t>(n)] = cov.mean_lnk + z(n);
  return ScalarField3D(basis.grid, std::move(values));
}

std::vector<double> truncated_variance(const KleBasis& basis, int m) {
  if (m < 1 || m > basis.mode_count()) throw std::out_of_range("truncated_variance: bad m");
  std::vector<double> var(basis.grid.cell_count(), 0.0);
  for (int mode = 0; mode < m; ++mode) {
    const double lambda = basis.eigenvalues(mode);
    for (std::size_t n = 0; n < var.size(); ++n) {
      const double f = basis.modes(static_cast<Eigen::Index>(n), mode);
      var[n] += lambda * f * f;
    }
  }
  return var;
}

std::vector<KleSample> draw_samples(std::uint64_t seed, int n, int n_modes) {
  if (n < 1) throw std::invalid_argument("draw_samples: n must be >= 1");
  if (n_modes < 1) throw std::invalid_argument("draw_samples: n_modes must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<KleSample> out(static_cast<std::size_t>(n), KleSample(static_cast<std::size_t>(n_modes)));
  for (auto& s : out)
    for (auto& v : s) v = normal(rng);
  return out;
}

ScalarField3D permeability_from_lnk(const ScalarField3D& lnk) {
  ScalarField3D k(lnk.grid());
  for (std::size_t n = 0; n < k.size(); ++n) k[n] = units::md_to_m2(std::exp(lnk[n]));
  return k;
}

}  // namespace subflow
