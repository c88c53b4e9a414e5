#pragma once

#include <filesystem>
#include <random>
#include <vector>

#include <json.hpp>

#include "subflow/bundle.hpp"
#include "subflow/config.hpp"
#include "subflow/kle.hpp"
#include "subflow/residual.hpp"
#include "subflow/simulator.hpp"
#include "subflow/uq.hpp"

namespace subflow {

/// KLE basis for a config. Zero variance builds at unit variance; sample_field
/// rescales to the requested variance.
KleBasis make_basis(const ScenarioConfig& cfg);

/// Stores eigenvalues ("kle/eigenvalues") and modes ("kle/modes", one spatial slab per mode).
void add_basis(DatasetBundle& bundle, const KleBasis& basis);

/// Random vertical wells in distinct columns, perforated from the top layer over a
/// random number of layers. Names and controls are taken from `templ` in order.
std::vector<WellSpec> random_wells(const Grid3D& grid, const std::vector<WellSpec>& templ, std::mt19937_64& rng);

/// lnk, potential, pressure (snapshots 0..n) and the well image of one run;
/// metadata carries the config, wells and provenance.
DatasetBundle solution_bundle(const ScenarioConfig& cfg, const Scenario& scenario, const ScalarField3D& lnk,
                              const Solution& sol, const std::string& command);

/// Per-well time series with columns well_id, step, time_days, rate_m3_per_day, bhp_bar.
void write_well_csv(const std::filesystem::path& file, const Solution& sol);

nlohmann::json report_to_json(const ResidualReport& r);
ResidualReport report_from_json(const nlohmann::json& j);

/// Rebuilds the scenario stored in a solution bundle (permeability from the
/// float32 lnk array) and evaluates the losses of its potential sequence. A
/// "reference/potential" array, when present, feeds the data term.
ResidualReport residual_check(const DatasetBundle& bundle);

/// Adds "residual" (scaled, one slab per step) and stores the scalars under metadata.residual_report.
void add_report(DatasetBundle& bundle, const ResidualReport& report);

/// Labelled set: lnk, xi, t_norm, potential and pressure for n_lnk_train fields over
/// nt_train steps. Virtual set: lnk, xi and t_norm only. Well images per
/// realization under varying-well mode. The KLE basis is always included.
DatasetBundle export_training_set(const ScenarioConfig& cfg);

/// Pointwise mean/variance of the potential and pressure, plus well moments in field units.
DatasetBundle stats_bundle(const ScenarioConfig& cfg, const Scenario& scenario, const EnsembleStats& stats);

/// Columns well_id, step, time_days, rate_mean_m3_per_day, rate_std_m3_per_day, bhp_mean_bar, bhp_std_bar.
void write_uq_csv(const std::filesystem::path& file, const Scenario& scenario, const EnsembleStats& stats);

}  // namespace subflow
