#include "subflow/wells.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

namespace subflow {

double drainage_radius(double kx, double ky, double dx, double dy) {
  if (!(kx > 0.0) || !(ky > 0.0))
    throw std::invalid_argument("drainage_radius: permeability must be positive");
  if (!(dx > 0.0) || !(dy > 0.0))
    throw std::invalid_argument("drainage_radius: cell sizes must be positive");
  return 0.28 * std::sqrt(ky * dx * dx + kx * dy * dy) / (std::sqrt(kx) + std::sqrt(ky));
}

double well_index(double kx, double ky, double dz, double r0, double rw, double viscosity) {
  if (!(rw > 0.0) || !(r0 > rw))
    throw std::invalid_argument("well_index: need r0 > rw > 0 (r0=" + std::to_string(r0) +
                                ", rw=" + std::to_string(rw) + ")");
  if (kx < 0.0 || ky < 0.0) throw std::invalid_argument("well_index: negative permeability");
  return 2.0 * std::numbers::pi * dz * std::sqrt(kx * ky) / (viscosity * std::log(r0 / rw));
}

std::vector<double> allocate_rate(double q_total, std::span<const double> perf_perms) {
  if (perf_perms.empty()) throw std::invalid_argument("allocate_rate: no perforations");
  if (!std::isfinite(q_total)) throw std::invalid_argument("allocate_rate: non-finite rate");
  double sum = 0.0;
  for (double k : perf_perms) {
    if (k < 0.0 || !std::isfinite(k)) throw std::invalid_argument("allocate_rate: bad permeability");
    sum += k;
  }
  if (!(sum > 0.0)) throw std::invalid_argument("allocate_rate: all permeabilities are zero");

  std::vector<double> q(perf_perms.size());
  for (std::size_t n = 0; n + 1 < q.size(); ++n) q[n] = q_total * (perf_perms[n] / sum);

  // Last share closes the left-to-right sum exactly: bisection over ordered doubles,
  // shifting the partial sum when a rounding tie skips q_total.
  auto key = [](double x) {
    const auto b = std::bit_cast<std::int64_t>(x);
    return b < 0 ? std::numeric_limits<std::int64_t>::min() - b : b;
  };
  auto value = [](std::int64_t k) {
    return std::bit_cast<double>(k < 0 ? std::numeric_limits<std::int64_t>::min() - k : k);
  };
  for (int attempt = 0; attempt < 8; ++attempt) {
    double assigned = 0.0;
    for (std::size_t n = 0; n + 1 < q.size(); ++n) assigned += q[n];
    q.back() = q_total - assigned;
    if (assigned + q.back() == q_total) break;
    std::int64_t lo = key(q.back()) - (std::int64_t{1} << 52), hi = key(q.back()) + (std::int64_t{1} << 52);
    while (lo < hi) {
      const std::int64_t mid = lo + (hi - lo) / 2;
      if (assigned + value(mid) < q_total) lo = mid + 1;
      else hi = mid;
    }
    q.back() = value(lo);
    if (assigned + q.back() == q_total) break;
    double& prev = q[q.size() - 2];
    for (double moved = assigned; moved == assigned;) {
      prev = std::nextafter(prev, HUGE_VAL);
      moved = 0.0;
      for (std::size_t n = 0; n + 1 < q.size(); ++n) moved += q[n];
    }
  }
  return q;
}

double report_bhp(const WellSpec& well, const Grid3D& grid, std::span<const double> perf_pressures,
                  std::span<const double> perf_rates, std::span<const double> well_indices,
                  const FormationProps& props) {
  const auto n = static_cast<std::size_t>(well.perforation_count());
  if (perf_pressures.size() != n || perf_rates.size() != n || well_indices.size() != n)
    throw std::invalid_argument("report_bhp: perforation arrays do not match well " + well.name);
  const double rho_g = props.oil_density * props.gravity;
  const double z_ref = grid.depth(well.k_top);
  double sum = 0.0;
  for (std::size_t p = 0; p < n; ++p) {
    if (!(well_indices[p] > 0.0))
      throw std::invalid_argument("report_bhp: zero well index in well " + well.name);
    const double bhp_local = perf_pressures[p] - perf_rates[p] / well_indices[p];
    sum += bhp_local - rho_g * (grid.depth(well.k_top + static_cast<int>(p)) - z_ref);
  }
  return sum / static_cast<double>(n);
}

void validate_wells(const Grid3D& grid, std::span<const WellSpec> wells) {
  std::vector<int> owner(grid.cell_count(), -1);
  for (std::size_t w = 0; w < wells.size(); ++w) {
    const WellSpec& well = wells[w];
    const std::string label = well.name.empty() ? "#" + std::to_string(w) : well.name;
    if (well.i < 0 || well.i >= grid.nx() || well.j < 0 || well.j >= grid.ny())
      throw std::invalid_argument("well " + label + " lies outside the grid");
    if (well.k_top < 0 || well.k_top > well.k_bot || well.k_bot >= grid.nz())
      throw std::invalid_argument("well " + label + " has an invalid perforation range");
    if (!(well.rw > 0.0)) throw std::invalid_argument("well " + label + " needs rw > 0");
    if (const auto* r = std::get_if<RateControl>(&well.control); r && !std::isfinite(r->rate))
      throw std::invalid_argument("well " + label + " has a non-finite rate");
    if (const auto* b = std::get_if<BhpControl>(&well.control); b && !std::isfinite(b->bhp))
      throw std::invalid_argument("well " + label + " has a non-finite BHP");
    for (int k = well.k_top; k <= well.k_bot; ++k) {
      int& o = owner[grid.offset(well.i, well.j, k)];
      if (o >= 0)
        throw std::invalid_argument("wells " + label + " and #" + std::to_string(o) +
                                    " perforate the same cell");
      o = static_cast<int>(w);
    }
  }
}

ScalarField3D well_image(const Grid3D& grid, std::span<const WellSpec> wells) {
  validate_wells(grid, wells);
  ScalarField3D image(grid, 0.0);
  for (const WellSpec& well : wells)
    for (int k = well.k_top; k <= well.k_bot; ++k) image(well.i, well.j, k) = 1.0;
  return image;
}

}  // namespace subflow
