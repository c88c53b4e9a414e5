#include "subflow/residual.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace subflow {

void LossWeights::validate() const {
  if (data < 0.0 || pde < 0.0 || bc < 0.0) throw std::invalid_argument("loss weights must be >= 0");
  if (data == 0.0 && pde == 0.0 && bc == 0.0)
    throw std::invalid_argument("loss weights must not all be zero");
}

BoundarySpec BoundarySpec::no_flow() {
  BoundarySpec spec;
  for (Axis a : {Axis::X, Axis::Y, Axis::Z})
    for (Side s : {Side::Low, Side::High}) spec.neumann.push_back({a, s, 0.0});
  return spec;
}

std::vector<double> step_residual(const Discretization& disc, std::span<const double> phi_old,
                                  std::span<const double> phi_new) {
  const Grid3D& g = disc.grid();
  const std::size_t n = g.cell_count();
  if (phi_old.size() != n || phi_new.size() != n)
    throw std::invalid_argument("step_residual: potential length does not match grid");

  const auto tx = disc.tx(), ty = disc.ty(), tz = disc.tz();
  const std::size_t sx = static_cast<std::size_t>(g.ny()) * g.nz(), sy = g.nz(), sz = 1;
  std::vector<double> r(n);
  for (std::size_t c = 0; c < n; ++c) r[c] = -disc.accumulation() * (phi_new[c] - phi_old[c]);

  // Each interior face moves flux T (Phi_a - Phi_b) from a to b.
  auto faces = [&](std::span<const double> t, std::size_t stride) {
    for (std::size_t a = 0; a < n; ++a) {
      if (t[a] == 0.0) continue;
      const std::size_t b = a + stride;
      const double flux = t[a] * (phi_new[a] - phi_new[b]);
      r[a] -= flux;
      r[b] += flux;
    }
  };
  faces(tx, sx);
  faces(ty, sy);
  faces(tz, sz);

  for (const WellCoupling& w : disc.wells())
    for (const PerforationTerm& p : w.perfs)
      r[p.cell] -= w.rate_controlled ? p.rate
                                     : p.well_index * (phi_new[p.cell] - w.target_potential);

  const double inv_v = 1.0 / disc.cell_volume();
  for (double& v : r) v *= inv_v;
  return r;
}

double PdeResidual::max_relative() const {
  double worst = 0.0;
  for (std::size_t s = 0; s < load_norm.size(); ++s)
    worst = std::max(worst, load_norm[s] > 0.0 ? max_abs[s] / load_norm[s] : max_abs[s]);
  return worst;
}

PdeResidual pde_residual(const Scenario& scenario, const std::vector<ScalarField3D>& phi_seq) {
  if (phi_seq.size() < 2) throw std::invalid_argument("pde_residual: need at least two snapshots");
  for (const auto& f : phi_seq)
    if (!(f.grid() == scenario.grid))
      throw std::invalid_argument("pde_residual: snapshot grid does not match scenario");

  const Discretization disc(scenario);
  PdeResidual out;
  out.n_steps = static_cast<int>(phi_seq.size()) - 1;
  out.n_cells = scenario.grid.cell_count();
  out.values.reserve(out.n_cells * static_cast<std::size_t>(out.n_steps));
  const std::vector<double> zero(out.n_cells, 0.0);
  const double v = disc.cell_volume();
  for (std::size_t s = 1; s < phi_seq.size(); ++s) {
    const auto r = step_residual(disc, phi_seq[s - 1].values(), phi_seq[s].values());
    // With Phi^{n+1} = 0 the residual is the load vector b / V.
    const auto load = step_residual(disc, phi_seq[s - 1].values(), zero);
    double load2 = 0.0, worst = 0.0;
    for (std::size_t c = 0; c < out.n_cells; ++c) {
      load2 += (load[c] * v) * (load[c] * v);
      worst = std::max(worst, std::abs(r[c] * v));
    }
    out.load_norm.push_back(std::sqrt(load2));
    out.max_abs.push_back(worst);
    out.values.insert(out.values.end(), r.begin(), r.end());
  }
  return out;
}

double data_loss(const std::vector<ScalarField3D>& pred, const std::vector<ScalarField3D>& ref,
                 Normalization norm) {
  if (pred.size() != ref.size()) throw std::invalid_argument("data_loss: snapshot count mismatch");
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t s = 0; s < pred.size(); ++s) {
    if (pred[s].size() != ref[s].size()) throw std::invalid_argument("data_loss: field size mismatch");
    for (std::size_t c = 0; c < pred[s].size(); ++c) {
      const double d = pred[s][c] - ref[s][c];
      sum += d * d;
    }
    count += pred[s].size();
  }
  if (norm == Normalization::Sum || count == 0) return sum;
  return sum / static_cast<double>(count);
}

namespace {

bool on_boundary(const Grid3D& g, const CellIndex& c) {
  return c.i == 0 || c.j == 0 || c.k == 0 || c.i == g.nx() - 1 || c.j == g.ny() - 1 ||
         c.k == g.nz() - 1;
}

}  // namespace

double bc_loss(const std::vector<ScalarField3D>& seq, const BoundarySpec& spec, Normalization norm) {
  if (seq.empty()) return 0.0;
  const Grid3D& g = seq.front().grid();
  for (const auto& d : spec.dirichlet)
    if (!g.contains(d.cell.i, d.cell.j, d.cell.k) || !on_boundary(g, d.cell))
      throw std::invalid_argument("bc_loss: Dirichlet cell is not on the boundary");

  double neumann_sum = 0.0, dirichlet_sum = 0.0;
  std::size_t neumann_count = 0, dirichlet_count = 0;
  for (const ScalarField3D& f : seq) {
    if (!(f.grid() == g)) throw std::invalid_argument("bc_loss: snapshots on different grids");
    for (const NeumannFace& face : spec.neumann) {
      const int n_axis = face.axis == Axis::X ? g.nx() : face.axis == Axis::Y ? g.ny() : g.nz();
      if (n_axis < 2) continue;  // no inner neighbour for a one-sided difference
      const double h = face.axis == Axis::X ? g.dx() : face.axis == Axis::Y ? g.dy() : g.dz();
      const int b = face.side == Side::Low ? 0 : n_axis - 1;
      const int in = face.side == Side::Low ? 1 : n_axis - 2;
      auto at = [&](int along, int u, int v) {
        switch (face.axis) {
          case Axis::X: return f(along, u, v);
          case Axis::Y: return f(u, along, v);
          default: return f(u, v, along);
        }
      };
      const int nu = face.axis == Axis::X ? g.ny() : g.nx();
      const int nv = face.axis == Axis::Z ? g.ny() : g.nz();
      for (int u = 0; u < nu; ++u)
        for (int v = 0; v < nv; ++v) {
          const double d = (at(b, u, v) - at(in, u, v)) / h - face.g;
          neumann_sum += d * d;
          ++neumann_count;
        }
    }
    for (const auto& d : spec.dirichlet) {
      const double e = f(d.cell.i, d.cell.j, d.cell.k) - d.value;
      dirichlet_sum += e * e;
      ++dirichlet_count;
    }
  }
  if (norm == Normalization::Sum) return neumann_sum + dirichlet_sum;
  return (neumann_count ? neumann_sum / static_cast<double>(neumann_count) : 0.0) +
         (dirichlet_count ? dirichlet_sum / static_cast<double>(dirichlet_count) : 0.0);
}

double hard_ic_transform(double raw, double phi0, double t_norm) {
  if (!(t_norm >= 0.0 && t_norm <= 1.0))
    throw std::invalid_argument("hard_ic_transform: t_norm must be in [0, 1]");
  if (t_norm == 0.0) return phi0;
  return phi0 * (1.0 - t_norm) - t_norm * raw;
}

std::vector<double> hard_ic_transform(std::span<const double> raw, double phi0, double t_norm) {
  std::vector<double> out(raw.size());
  for (std::size_t n = 0; n < raw.size(); ++n) out[n] = hard_ic_transform(raw[n], phi0, t_norm);
  return out;
}

double total_loss(double data, double pde, double bc, const LossWeights& weights) {
  if (weights.data < 0.0 || weights.pde < 0.0 || weights.bc < 0.0)
    throw std::invalid_argument("total_loss: negative weight");
  return weights.data * data + weights.pde * pde + weights.bc * bc;
}

namespace {

std::vector<ScalarField3D> scaled_tail(const std::vector<ScalarField3D>& seq, double scale) {
  std::vector<ScalarField3D> out;
  for (std::size_t s = 1; s < seq.size(); ++s) {
    ScalarField3D f = seq[s];
    for (double& v : f.values()) v /= scale;
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace

ResidualReport evaluate_losses(const Scenario& scenario, const std::vector<ScalarField3D>& phi_seq,
                               const LossWeights& weights, const BoundarySpec& bc,
                               const std::vector<ScalarField3D>* reference, Normalization norm) {
  weights.validate();
  const PdeResidual pde = pde_residual(scenario, phi_seq);

  ResidualReport rep;
  rep.n_steps = pde.n_steps;
  rep.n_cells = pde.n_cells;
  rep.weights = weights;
  rep.normalization = norm;
  rep.potential_scale = scenario.p_ref_top;
  rep.time_scale = scenario.horizon();
  rep.residual_scale = scenario.horizon() / (scenario.props.storage_coefficient() * scenario.p_ref_top);
  rep.max_relative_residual = pde.max_relative();
  rep.n_kv = 1;
  rep.n_tv = pde.n_steps;

  rep.residual.resize(pde.values.size());
  double sum = 0.0;
  for (std::size_t n = 0; n < pde.values.size(); ++n) {
    rep.residual[n] = pde.values[n] * rep.residual_scale;
    sum += rep.residual[n] * rep.residual[n];
  }
  rep.pde = (norm == Normalization::Mean && !rep.residual.empty())
                ? sum / static_cast<double>(rep.residual.size())
                : sum;

  const auto pred = scaled_tail(phi_seq, rep.potential_scale);
  rep.bc = bc_loss(pred, bc, norm);
  if (reference) {
    if (reference->size() != phi_seq.size())
      throw std::invalid_argument("evaluate_losses: reference has a different snapshot count");
    rep.data = data_loss(pred, scaled_tail(*reference, rep.potential_scale), norm);
    rep.n_k = 1;
    rep.n_t = pde.n_steps;
  }
  rep.total = total_loss(rep.data, rep.pde, rep.bc, weights);
  return rep;
}

}  // namespace subflow
