#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace subflow {

struct CellIndex {
  int i = 0;
  int j = 0;
  int k = 0;
  bool operator==(const CellIndex&) const = default;
};

/// Uniform Cartesian grid. Depth z is positive downward; `z_top` is the
/// formation top and cell centers sit at z_top + (k + 0.5) * dz.
///
/// Flat storage order is k-fastest: offset = (i * ny + j) * nz + k.
class Grid3D {
 public:
  Grid3D(int nx, int ny, int nz, double lx, double ly, double lz, double z_top = 0.0);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int nz() const { return nz_; }
  double lx() const { return lx_; }
  double ly() const { return ly_; }
  double lz() const { return lz_; }
  double z_top() const { return z_top_; }

  double dx() const { return lx_ / nx_; }
  double dy() const { return ly_ / ny_; }
  double dz() const { return lz_ / nz_; }
  double cell_volume() const { return dx() * dy() * dz(); }

  std::size_t cell_count() const {
    return static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_) *
           static_cast<std::size_t>(nz_);
  }

  bool contains(int i, int j, int k) const {
    return i >= 0 && i < nx_ && j >= 0 && j < ny_ && k >= 0 && k < nz_;
  }

  std::size_t offset(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * ny_ + static_cast<std::size_t>(j)) * nz_ +
           static_cast<std::size_t>(k);
  }
  std::size_t offset(CellIndex c) const { return offset(c.i, c.j, c.k); }
  CellIndex cell(std::size_t offset) const;

  // Cell-center depth of layer k.
  double depth(int k) const { return z_top_ + (k + 0.5) * dz(); }

  bool operator==(const Grid3D&) const = default;

 private:
  int nx_, ny_, nz_;
  double lx_, ly_, lz_;
  double z_top_;
};

/// Rock and fluid constants, SI units.
struct FormationProps {
  double porosity = 0.2;
  double oil_density = 849.0;        // kg/m^3, standard conditions
  double viscosity = 3.0e-3;         // Pa s
  double compressibility = 1.0e-9;   // 1/Pa
  double formation_factor = 1.02;
  double gravity = 9.81;             // m/s^2

  /// Throws std::invalid_argument unless all values are positive and porosity < 1.
  void validate() const;

  // phi * C_o / B_o, the storage coefficient of the potential equation.
  double storage_coefficient() const { return porosity * compressibility / formation_factor; }

  bool operator==(const FormationProps&) const = default;
};

/// One scalar per cell, stored k-fastest (see Grid3D).
class ScalarField3D {
 public:
  explicit ScalarField3D(const Grid3D& grid, double fill = 0.0);
  ScalarField3D(const Grid3D& grid, std::vector<double> values);

  const Grid3D& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }

  double& operator()(int i, int j, int k) { return values_[grid_.offset(i, j, k)]; }
  double operator()(int i, int j, int k) const { return values_[grid_.offset(i, j, k)]; }
  double& operator[](std::size_t n) { return values_[n]; }
  double operator[](std::size_t n) const { return values_[n]; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  std::vector<double>& data() { return values_; }
  const std::vector<double>& data() const { return values_; }

 private:
  Grid3D grid_;
  std::vector<double> values_;
};

/// Phi = p - rho g (z - z_top).
ScalarField3D potential_from_pressure(const ScalarField3D& pressure, const FormationProps& props);

/// Inverse of potential_from_pressure.
ScalarField3D pressure_from_potential(const ScalarField3D& potential, const FormationProps& props);

/// Gravity-equilibrated initial pressure: p = p_ref_top + rho g (z - z_top).
/// The matching potential is uniform and equal to p_ref_top.
ScalarField3D init_hydrostatic(const Grid3D& grid, const FormationProps& props, double p_ref_top);

}  // namespace subflow
