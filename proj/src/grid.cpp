#include "subflow/grid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace subflow {

Grid3D::Grid3D(int nx, int ny, int nz, double lx, double ly, double lz, double z_top)
    : nx_(nx), ny_(ny), nz_(nz), lx_(lx), ly_(ly), lz_(lz), z_top_(z_top) {
  if (nx <= 0 || ny <= 0 || nz <= 0)
    throw std::invalid_argument("grid cell counts must be positive");
  if (!(lx > 0.0) || !(ly > 0.0) || !(lz > 0.0) || !std::isfinite(lx) || !std::isfinite(ly) ||
      !std::isfinite(lz))
    throw std::invalid_argument("grid extents must be positive and finite");
  if (!std::isfinite(z_top)) throw std::invalid_argument("grid z_top must be finite");
}

CellIndex Grid3D::cell(std::size_t offset) const {
  const auto k = static_cast<int>(offset % nz_);
  const auto ij = offset / nz_;
  return {static_cast<int>(ij / ny_), static_cast<int>(ij % ny_), k};
}

void FormationProps::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument(std::string(name) + " must be positive and finite");
  };
  positive(porosity, "porosity");
  positive(oil_density, "oil_density");
  positive(viscosity, "viscosity");
  positive(compressibility, "compressibility");
  positive(formation_factor, "formation_factor");
  positive(gravity, "gravity");
  if (porosity >= 1.0) throw std::invalid_argument("porosity must be < 1");
}

ScalarField3D::ScalarField3D(const Grid3D& grid, double fill)
    : grid_(grid), values_(grid.cell_count(), fill) {}

ScalarField3D::ScalarField3D(const Grid3D& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.cell_count())
    throw std::invalid_argument("field length " + std::to_string(values_.size()) +
                                " does not match grid cell count " +
                                std::to_string(grid_.cell_count()));
}

namespace {

ScalarField3D shift_by_gravity(const ScalarField3D& in, const FormationProps& props, double sign) {
  const Grid3D& g = in.grid();
  ScalarField3D out(g);
  const double rho_g = props.oil_density * props.gravity;
  for (int i = 0; i < g.nx(); ++i)
    for (int j = 0; j < g.ny(); ++j)
      for (int k = 0; k < g.nz(); ++k)
        out(i, j, k) = in(i, j, k) + sign * rho_g * (g.depth(k) - g.z_top());
  return out;
}

}  // namespace

ScalarField3D potential_from_pressure(const ScalarField3D& pressure, const FormationProps& props) {
  return shift_by_gravity(pressure, props, -1.0);
}

ScalarField3D pressure_from_potential(const ScalarField3D& potential, const FormationProps& props) {
  return shift_by_gravity(potential, props, +1.0);
}

ScalarField3D init_hydrostatic(const Grid3D& grid, const FormationProps& props, double p_ref_top) {
  if (!(p_ref_top > 0.0)) throw std::invalid_argument("reference pressure must be positive");
  return pressure_from_potential(ScalarField3D(grid, p_ref_top), props);
}

}  // namespace subflow
