#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "subflow/inversion.hpp"
#include "subflow/kle.hpp"
#include "subflow/pso.hpp"
#include "subflow/residual.hpp"
#include "subflow/scenario.hpp"
#include "subflow/uq.hpp"

namespace subflow {

/// Config-side well: 1-based indices, control value in field units
/// (rate m^3/day, BHP bar).
struct WellConfig {
  std::string name;
  int i = 1;
  int j = 1;
  int k_top = 1;
  int k_bot = 1;
  double rw = 0.1;
  bool bhp_control = false;
  double value = 0.0;

  bool operator==(const WellConfig&) const = default;
};

struct GridConfig {
  int nx = 60, ny = 220, nz = 10;
  double lx = 365.76, ly = 670.56, lz = 51.82;
  double z_top = 3657.6;
  bool operator==(const GridConfig&) const = default;
};

struct FormationConfig {
  double porosity = 0.2;
  double density = 849.0;            // kg/m^3
  double viscosity_mpas = 3.0;
  double compressibility_per_bar = 1e-4;
  double formation_factor = 1.02;
  double gravity = 9.81;
  double p_ref_top_bar = 413.69;
  bool operator==(const FormationConfig&) const = default;
};

struct SeedConfig {
  std::uint64_t field = 1;      // KLE draws for genfield / simulate / labelled set
  std::uint64_t virtual_ = 2;   // virtual set
  std::uint64_t ensemble = 3;
  std::uint64_t pso = 4;
  std::uint64_t wells = 5;      // random well layouts
  std::uint64_t truth = 6;      // synthetic inversion truth and noise
  bool operator==(const SeedConfig&) const = default;
};

struct TrainingConfig {
  int n_lnk_train = 5;
  int nt_train = 20;
  int n_lnk_virtual = 200;
  bool varying_wells = false;
  int n_well_train = 0;
  int n_well_virtual = 0;
  bool operator==(const TrainingConfig&) const = default;
};

struct UqConfig {
  int n_realizations = 2000;
  int workers = 1;
  int chunk_size = 16;
  bool operator==(const UqConfig&) const = default;
};

struct InversionConfig {
  int observed_steps = 10;
  double lambda_rate = 1.0;
  double lambda_perm = 1000.0;
  double lambda_bhp = 10.0;
  bool perm_in_md = false;
  double noise = 0.1;
  double variance_min = 0.0, variance_max = 1.0;
  double eta_min = 130.0, eta_max = 190.0;
  // Synthetic truth; truth_variance / truth_eta only differ from the prior in
  // the unknown-statistics case.
  double truth_variance = 0.5;
  double truth_eta = 152.4;
  bool operator==(const InversionConfig&) const = default;
};

struct ScenarioConfig {
  GridConfig grid;
  FormationConfig formation;
  CovarianceSpec covariance;
  int n_modes = 13;
  std::vector<WellConfig> wells;
  double dt_days = 1.0;
  int n_steps = 20;
  SeedConfig seeds;
  LinearSolverOptions solver;
  LossWeights loss;
  Normalization normalization = Normalization::Mean;
  PsoParams pso = PsoParams::uniform(13, -4.0, 4.0, -1.0, 1.0);   // xi limits; seed comes from seeds.pso
  TrainingConfig training;
  UqConfig uq;
  InversionConfig inversion;

  bool operator==(const ScenarioConfig& o) const;
};

/// Throws ConfigError with the offending path for unknown keys, wrong types
/// and out-of-range values.
ScenarioConfig parse_config(const nlohmann::json& doc);
ScenarioConfig load_config(const std::filesystem::path& file);
nlohmann::json to_json(const ScenarioConfig& cfg);

Grid3D make_grid(const ScenarioConfig& cfg);
FormationProps make_props(const ScenarioConfig& cfg);
std::vector<WellSpec> make_wells(const ScenarioConfig& cfg);
WellConfig to_well_config(const WellSpec& w);
/// Scenario with uniform mean permeability; callers replace `perm`.
Scenario make_scenario(const ScenarioConfig& cfg);
PsoParams make_pso_params(const ScenarioConfig& cfg);
InverseProblem make_inverse_problem(const ScenarioConfig& cfg, SearchMode mode);

/// The four corner wells of the reference case, full penetration.
std::vector<WellConfig> corner_wells(int nz, bool bhp_control, double value);

}  // namespace subflow
