#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "subflow/grid.hpp"

namespace subflow {

/// Surface (standard-condition) rate in m^3/s; production is positive.
struct RateControl {
  double rate = 0.0;
  bool operator==(const RateControl&) const = default;
};

/// Bottom-hole pressure in Pa, referenced to the top perforation.
struct BhpControl {
  double bhp = 0.0;
  bool operator==(const BhpControl&) const = default;
};

using WellControl = std::variant<RateControl, BhpControl>;

/// Vertical well. Indices are 0-based here; configs use 1-based indices.
struct WellSpec {
  std::string name;
  int i = 0;
  int j = 0;
  int k_top = 0;
  int k_bot = 0;        // inclusive
  double rw = 0.1;      // m
  WellControl control = RateControl{};

  int perforation_count() const { return k_bot - k_top + 1; }
  bool is_rate_controlled() const { return std::holds_alternative<RateControl>(control); }
  bool operator==(const WellSpec&) const = default;
};

struct WellStep {
  double total_rate = 0.0;             // m^3/s, production positive
  std::vector<double> perf_rates;      // top to bottom
  double bhp = 0.0;                    // Pa at the top perforation
};

/// Per-step results for one well; steps[n] belongs to time (n + 1) * dt.
struct WellSolution {
  std::string name;
  std::vector<WellStep> steps;
};

/// Equivalent drainage radius, implemented as
///   r0 = 0.28 sqrt(ky dx^2 + kx dy^2) / (sqrt(kx) + sqrt(ky)).
/// For kx == ky this equals Peaceman's isotropic 0.14 sqrt(dx^2 + dy^2).
double drainage_radius(double kx, double ky, double dx, double dy);

/// Peaceman well index WI = 2 pi dz sqrt(kx ky) / (mu ln(r0 / rw)), so that the
/// perforation rate is q = WI (p_cell - BHP).
double well_index(double kx, double ky, double dz, double r0, double rw, double viscosity);

/// Splits a well rate over perforations proportionally to permeability. The last
/// entry absorbs rounding so the parts sum to q_total.
std::vector<double> allocate_rate(double q_total, std::span<const double> perf_perms);

/// Scalar BHP of a rate-controlled well: per-perforation BHP_i = p_i - q_i / WI_i,
/// shifted hydrostatically to the top perforation, then averaged.
double report_bhp(const WellSpec& well, const Grid3D& grid, std::span<const double> perf_pressures,
                  std::span<const double> perf_rates, std::span<const double> well_indices,
                  const FormationProps& props);

/// Throws std::invalid_argument for wells outside the grid, bad perforation
/// ranges, non-positive radius or two wells perforating the same cell.
void validate_wells(const Grid3D& grid, std::span<const WellSpec> wells);

/// 1 in perforated cells, 0 elsewhere.
ScalarField3D well_image(const Grid3D& grid, std::span<const WellSpec> wells);

}  // namespace subflow
