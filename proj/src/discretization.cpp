#include "subflow/discretization.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace subflow {

void Scenario::validate() const {
  props.validate();
  if (!(perm.grid() == grid)) throw std::invalid_argument("permeability grid differs from scenario grid");
  for (std::size_t n = 0; n < perm.size(); ++n)
    if (!(perm[n] > 0.0) || !std::isfinite(perm[n]))
      throw std::invalid_argument("permeability must be positive and finite (cell " +
                                  std::to_string(n) + ")");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive");
  if (n_steps < 1) throw std::invalid_argument("n_steps must be >= 1");
  if (!(p_ref_top > 0.0)) throw std::invalid_argument("p_ref_top must be positive");
  if (!(solver.tol_rel > 0.0) || solver.max_iter < 1)
    throw std::invalid_argument("invalid linear solver options");
  validate_wells(grid, wells);
}

double transmissibility(double k1, double k2, double area, double dist, double viscosity,
                        double formation_factor) {
  if (k1 < 0.0 || k2 < 0.0) throw std::invalid_argument("transmissibility: negative permeability");
  const double sum = k1 + k2;
  if (sum == 0.0) return 0.0;
  return (2.0 * k1 * k2 / sum) * area / (viscosity * formation_factor * dist);
}

Discretization::Discretization(const Scenario& s)
    : grid_(s.grid),
      accumulation_(s.props.storage_coefficient() * s.grid.cell_volume() / s.dt),
      tx_(s.grid.cell_count(), 0.0),
      ty_(s.grid.cell_count(), 0.0),
      tz_(s.grid.cell_count(), 0.0) {
  s.validate();
  const Grid3D& g = grid_;
  const double mu = s.props.viscosity, bo = s.props.formation_factor;
  const double ax = g.dy() * g.dz(), ay = g.dx() * g.dz(), az = g.dx() * g.dy();
  for (int i = 0; i < g.nx(); ++i)
    for (int j = 0; j < g.ny(); ++j)
      for (int k = 0; k < g.nz(); ++k) {
        const std::size_t c = g.offset(i, j, k);
        const double kc = s.perm[c];
        if (i + 1 < g.nx()) tx_[c] = transmissibility(kc, s.perm[g.offset(i + 1, j, k)], ax, g.dx(), mu, bo);
        if (j + 1 < g.ny()) ty_[c] = transmissibility(kc, s.perm[g.offset(i, j + 1, k)], ay, g.dy(), mu, bo);
        if (k + 1 < g.nz()) tz_[c] = transmissibility(kc, s.perm[g.offset(i, j, k + 1)], az, g.dz(), mu, bo);
      }

  const double rho_g = s.props.oil_density * s.props.gravity;
  for (std::size_t w = 0; w < s.wells.size(); ++w) {
    const WellSpec& spec = s.wells[w];
    WellCoupling coupling;
    coupling.well = w;
    coupling.rate_controlled = spec.is_rate_controlled();
    std::vector<double> perf_perms;
    for (int k = spec.k_top; k <= spec.k_bot; ++k) {
      const std::size_t c = g.offset(spec.i, spec.j, k);
      const double kc = s.perm[c];
      const double r0 = drainage_radius(kc, kc, g.dx(), g.dy());
      if (!(spec.rw < r0))
        throw std::invalid_argument("well " + spec.name + ": rw=" + std::to_string(spec.rw) +
                                    " is not smaller than drainage radius " + std::to_string(r0));
      coupling.perfs.push_back({c, well_index(kc, kc, g.dz(), r0, spec.rw, mu), 0.0});
      perf_perms.push_back(kc);
    }
    if (const auto* rate = std::get_if<RateControl>(&spec.control)) {
      const std::vector<double> q = allocate_rate(rate->rate, perf_perms);
      for (std::size_t p = 0; p < q.size(); ++p) coupling.perfs[p].rate = q[p];
    } else {
      const double bhp = std::get<BhpControl>(spec.control).bhp;
      coupling.target_potential = bhp - rho_g * (g.depth(spec.k_top) - g.z_top());
    }
    wells_.push_back(std::move(coupling));
  }
}

SparseMatrix Discretization::matrix() const {
  const Grid3D& g = grid_;
  const auto n = static_cast<Eigen::Index>(g.cell_count());
  std::vector<double> bhp_diag(g.cell_count(), 0.0);
  for (const WellCoupling& w : wells_)
    if (!w.rate_controlled)
      for (const PerforationTerm& p : w.perfs) bhp_diag[p.cell] += p.well_index;

  SparseMatrix a(n, n);
  a.reserve(Eigen::VectorXi::Constant(n, 7));
  for (int i = 0; i < g.nx(); ++i)
    for (int j = 0; j < g.ny(); ++j)
      for (int k = 0; k < g.nz(); ++k) {
        const std::size_t c = g.offset(i, j, k);
        const auto row = static_cast<Eigen::Index>(c);
        double diag = accumulation_ + bhp_diag[c];
        // Column order within a row is ascending, matching the k-fastest layout.
        auto couple = [&](std::size_t other, double t) {
          a.insert(row, static_cast<Eigen::Index>(other)) = -t;
          diag += t;
        };
        if (i > 0) couple(g.offset(i - 1, j, k), tx_[g.offset(i - 1, j, k)]);
        if (j > 0) couple(g.offset(i, j - 1, k), ty_[g.offset(i, j - 1, k)]);
        if (k > 0) couple(g.offset(i, j, k - 1), tz_[g.offset(i, j, k - 1)]);
        if (k + 1 < g.nz()) diag += tz_[c];
        if (j + 1 < g.ny()) diag += ty_[c];
        if (i + 1 < g.nx()) diag += tx_[c];
        a.insert(row, row) = diag;
        if (k + 1 < g.nz()) a.insert(row, static_cast<Eigen::Index>(c + 1)) = -tz_[c];
        if (j + 1 < g.ny()) a.insert(row, static_cast<Eigen::Index>(g.offset(i, j + 1, k))) = -ty_[c];
        if (i + 1 < g.nx()) a.insert(row, static_cast<Eigen::Index>(g.offset(i + 1, j, k))) = -tx_[c];
      }
  a.makeCompressed();
  return a;
}

Eigen::VectorXd Discretization::rhs(std::span<const double> phi_old) const {
  if (phi_old.size() != grid_.cell_count())
    throw std::invalid_argument("rhs: potential has wrong length");
  Eigen::VectorXd b(static_cast<Eigen::Index>(phi_old.size()));
  for (std::size_t c = 0; c < phi_old.size(); ++c) {
    if (!std::isfinite(phi_old[c])) throw std::invalid_argument("rhs: non-finite potential");
    b(static_cast<Eigen::Index>(c)) = accumulation_ * phi_old[c];
  }
  for (const WellCoupling& w : wells_)
    for (const PerforationTerm& p : w.perfs) {
      if (w.rate_controlled)
        b(static_cast<Eigen::Index>(p.cell)) -= p.rate;
      else
        b(static_cast<Eigen::Index>(p.cell)) += p.well_index * w.target_potential;
    }
  return b;
}

}  // namespace subflow
