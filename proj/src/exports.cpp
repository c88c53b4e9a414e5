#include "subflow/exports.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <stdexcept>
#include <utility>

#include "subflow/units.hpp"

namespace subflow {

using nlohmann::json;

namespace {

std::vector<std::size_t> spatial(const Grid3D& g, std::vector<std::size_t> lead = {}) {
  lead.push_back(static_cast<std::size_t>(g.nx()));
  lead.push_back(static_cast<std::size_t>(g.ny()));
  lead.push_back(static_cast<std::size_t>(g.nz()));
  return lead;
}

json wells_json(const std::vector<WellSpec>& wells) {
  json out = json::array();
  for (const auto& w : wells) {
    const WellConfig c = to_well_config(w);
    json jw = {{"name", c.name}, {"i", c.i}, {"j", c.j}, {"k_top", c.k_top}, {"k_bot", c.k_bot},
               {"rw", c.rw}, {"control", c.bhp_control ? "bhp" : "rate"}};
    jw[c.bhp_control ? "bhp_bar" : "rate_m3_per_day"] = c.value;
    out.push_back(jw);
  }
  return out;
}

json provenance(const std::string& command) {
  return {{"generator", "subflow"}, {"command", command}};
}

std::vector<double> time_channel(int n_steps) {
  std::vector<double> t(static_cast<std::size_t>(n_steps) + 1);
  for (int n = 0; n <= n_steps; ++n) t[static_cast<std::size_t>(n)] = static_cast<double>(n) / n_steps;
  return t;
}

void append(std::vector<double>& out, std::span<const double> v) { out.insert(out.end(), v.begin(), v.end()); }

}  // namespace

KleBasis make_basis(const ScenarioConfig& cfg) {
  CovarianceSpec cov = cfg.covariance;
  if (cov.variance == 0.0) cov.variance = 1.0;
  return build_basis(make_grid(cfg), cov, cfg.n_modes);
}

void add_basis(DatasetBundle& bundle, const KleBasis& basis) {
  const std::size_t m = static_cast<std::size_t>(basis.mode_count());
  // Column-major storage already places each mode contiguously.
  const std::span<const double> flat(basis.modes.data(), static_cast<std::size_t>(basis.modes.size()));
  bundle.add("kle/eigenvalues", {m}, std::span<const double>(basis.eigenvalues.data(), m));
  bundle.add("kle/modes", spatial(basis.grid, {m}), flat);
  bundle.metadata["kle"] = {{"mean_lnk", basis.covariance.mean_lnk}, {"basis_variance", basis.covariance.variance},
                            {"eta_x", basis.covariance.eta_x}, {"eta_y", basis.covariance.eta_y},
                            {"eta_z", basis.covariance.eta_z}, {"total_variance", basis.total_variance},
                            {"n_modes", basis.mode_count()}};
}

std::vector<WellSpec> random_wells(const Grid3D& grid, const std::vector<WellSpec>& templ, std::mt19937_64& rng) {
  const long long columns = static_cast<long long>(grid.nx()) * grid.ny();
  if (static_cast<long long>(templ.size()) > columns)
    throw std::invalid_argument("random_wells: more wells than grid columns");
  std::uniform_int_distribution<int> di(0, grid.nx() - 1), dj(0, grid.ny() - 1), dl(1, grid.nz());
  std::set<std::pair<int, int>> used;
  std::vector<WellSpec> out;
  for (const WellSpec& t : templ) {
    WellSpec w = t;
    do {
      w.i = di(rng);
      w.j = dj(rng);
    } while (!used.emplace(w.i, w.j).second);
    w.k_top = 0;
    w.k_bot = dl(rng) - 1;
    out.push_back(std::move(w));
  }
  return out;
}

DatasetBundle solution_bundle(const ScenarioConfig& cfg, const Scenario& scenario, const ScalarField3D& lnk,
                              const Solution& sol, const std::string& command) {
  const Grid3D& g = scenario.grid;
  DatasetBundle b(g);
  const std::size_t snaps = sol.potential.size();
  std::vector<double> phi, p;
  for (std::size_t s = 0; s < snaps; ++s) {
    append(phi, sol.potential[s].values());
    append(p, sol.pressure[s].values());
  }
  b.add("lnk", spatial(g), lnk.values(), "ln(mD)");
  b.add("potential", spatial(g, {snaps}), phi, "Pa");
  b.add("pressure", spatial(g, {snaps}), p, "Pa");
  b.add("well_image", spatial(g), well_image(g, scenario.wells).values());
  b.add("t_norm", {snaps}, time_channel(sol.step_count()));
  b.metadata["config"] = to_json(cfg);
  b.metadata["wells"] = wells_json(scenario.wells);
  b.metadata["seeds"] = to_json(cfg)["seeds"];
  b.metadata["dt_days"] = units::s_to_days(sol.dt);
  b.metadata["n_steps"] = sol.step_count();
  b.metadata["provenance"] = provenance(command);
  return b;
}

void write_well_csv(const std::filesystem::path& file, const Solution& sol) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << "well_id,step,time_days,rate_m3_per_day,bhp_bar\n" << std::setprecision(10);
  for (const auto& w : sol.wells)
    for (std::size_t n = 0; n < w.steps.size(); ++n)
      out << w.name << ',' << n + 1 << ',' << units::s_to_days(sol.dt * static_cast<double>(n + 1)) << ','
          << units::si_to_m3_per_day(w.steps[n].total_rate) << ',' << units::pa_to_bar(w.steps[n].bhp) << '\n';
}

json report_to_json(const ResidualReport& r) {
  return {{"n_steps", r.n_steps}, {"n_cells", r.n_cells}, {"data", r.data}, {"pde", r.pde}, {"bc", r.bc},
          {"total", r.total},
          {"weights", {{"data", r.weights.data}, {"pde", r.weights.pde}, {"bc", r.weights.bc}}},
          {"normalization", r.normalization == Normalization::Mean ? "mean" : "sum"},
          {"n_k", r.n_k}, {"n_t", r.n_t}, {"n_kv", r.n_kv}, {"n_tv", r.n_tv},
          {"potential_scale", r.potential_scale}, {"time_scale", r.time_scale},
          {"residual_scale", r.residual_scale}, {"max_relative_residual", r.max_relative_residual}};
}

ResidualReport report_from_json(const json& j) {
  ResidualReport r;
  r.n_steps = j.at("n_steps");
  r.n_cells = j.at("n_cells");
  r.data = j.at("data");
  r.pde = j.at("pde");
  r.bc = j.at("bc");
  r.total = j.at("total");
  r.weights = {j.at("weights").at("data"), j.at("weights").at("pde"), j.at("weights").at("bc")};
  r.normalization = j.at("normalization") == "sum" ? Normalization::Sum : Normalization::Mean;
  r.n_k = j.at("n_k");
  r.n_t = j.at("n_t");
  r.n_kv = j.at("n_kv");
  r.n_tv = j.at("n_tv");
  r.potential_scale = j.at("potential_scale");
  r.time_scale = j.at("time_scale");
  r.residual_scale = j.at("residual_scale");
  r.max_relative_residual = j.at("max_relative_residual");
  return r;
}

ResidualReport residual_check(const DatasetBundle& bundle) {
  if (!bundle.metadata.contains("config")) throw std::invalid_argument("residual_check: bundle has no config");
  const ScenarioConfig cfg = parse_config(bundle.metadata.at("config"));
  Scenario s = make_scenario(cfg);
  if (!(s.grid == bundle.grid())) throw std::invalid_argument("residual_check: bundle grid differs from its config");
  if (bundle.metadata.contains("wells")) {
    json doc = to_json(cfg);
    doc["wells"] = bundle.metadata.at("wells");
    s.wells = make_wells(parse_config(doc));
  }
  s.perm = permeability_from_lnk(bundle.field("lnk"));
  const BundleArray& phi = bundle.at("potential");
  const std::size_t snaps = phi.shape.front();
  s.n_steps = static_cast<int>(snaps) - 1;
  std::vector<ScalarField3D> seq, ref;
  for (std::size_t n = 0; n < snaps; ++n) seq.push_back(bundle.field("potential", n));
  const bool has_ref = bundle.contains("reference/potential");
  if (has_ref)
    for (std::size_t n = 0; n < snaps; ++n) ref.push_back(bundle.field("reference/potential", n));
  return evaluate_losses(s, seq, cfg.loss, BoundarySpec::no_flow(), has_ref ? &ref : nullptr, cfg.normalization);
}

void add_report(DatasetBundle& bundle, const ResidualReport& r) {
  bundle.add("residual", spatial(bundle.grid(), {static_cast<std::size_t>(r.n_steps)}), r.residual, "1");
  bundle.metadata["residual_report"] = report_to_json(r);
}

DatasetBundle export_training_set(const ScenarioConfig& cfg) {
  const TrainingConfig& t = cfg.training;
  const KleBasis basis = make_basis(cfg);
  const Grid3D& g = basis.grid;
  Scenario templ = make_scenario(cfg);
  templ.n_steps = t.nt_train;
  if (t.varying_wells && templ.wells.empty())
    throw std::invalid_argument("export_training_set: varying-well mode needs at least one template well");

  DatasetBundle b(g);
  add_basis(b, basis);
  const std::size_t m = static_cast<std::size_t>(cfg.n_modes);
  const std::size_t nl = static_cast<std::size_t>(t.n_lnk_train), nv = static_cast<std::size_t>(t.n_lnk_virtual);
  const std::size_t snaps = static_cast<std::size_t>(t.nt_train) + 1;
  std::mt19937_64 well_rng(cfg.seeds.wells);

  auto draw_set = [&](std::uint64_t seed, std::size_t n, const std::string& prefix, bool labelled) {
    const auto xi = draw_samples(seed, static_cast<int>(n), cfg.n_modes);
    std::vector<double> lnk, xi_flat, images, phi, p;
    json layouts = json::array();
    for (std::size_t r = 0; r < n; ++r) {
      const ScalarField3D z = sample_field(basis, xi[r], cfg.covariance);
      append(lnk, z.values());
      append(xi_flat, xi[r]);
      Scenario s = templ;
      if (t.varying_wells) {
        s.wells = random_wells(g, templ.wells, well_rng);
        append(images, well_image(g, s.wells).values());
        layouts.push_back(wells_json(s.wells));
      }
      if (labelled) {
        s.perm = permeability_from_lnk(z);
        const Solution sol = run(s);
        for (std::size_t k = 0; k < snaps; ++k) {
          append(phi, sol.potential[k].values());
          append(p, sol.pressure[k].values());
        }
      }
    }
    b.add(prefix + "/lnk", spatial(g, {n}), lnk, "ln(mD)");
    b.add(prefix + "/xi", {n, m}, xi_flat);
    b.add(prefix + "/t_norm", {snaps}, time_channel(t.nt_train));
    if (t.varying_wells) {
      b.add(prefix + "/well_image", spatial(g, {n}), images);
      b.metadata[prefix + "_wells"] = layouts;
    }
    if (labelled) {
      b.add(prefix + "/potential", spatial(g, {n, snaps}), phi, "Pa");
      b.add(prefix + "/pressure", spatial(g, {n, snaps}), p, "Pa");
    }
  };
  draw_set(cfg.seeds.field, nl, "labelled", true);
  if (nv > 0) draw_set(cfg.seeds.virtual_, nv, "virtual", false);
  if (!t.varying_wells) b.add("well_image", spatial(g), well_image(g, templ.wells).values());

  b.metadata["config"] = to_json(cfg);
  b.metadata["wells"] = wells_json(templ.wells);
  b.metadata["seeds"] = to_json(cfg)["seeds"];
  b.metadata["dt_days"] = cfg.dt_days;
  b.metadata["n_steps"] = t.nt_train;
  b.metadata["n_labelled_pairs"] = nl * static_cast<std::size_t>(t.nt_train);
  b.metadata["n_virtual"] = nv;
  b.metadata["scales"] = {{"potential", templ.p_ref_top}, {"time", templ.horizon()},
                          {"residual", templ.horizon() / (templ.props.storage_coefficient() * templ.p_ref_top)}};
  b.metadata["provenance"] = provenance("export-dataset");
  return b;
}

DatasetBundle stats_bundle(const ScenarioConfig& cfg, const Scenario& scenario, const EnsembleStats& stats) {
  const Grid3D& g = scenario.grid;
  DatasetBundle b(g);
  const std::size_t snaps = static_cast<std::size_t>(stats.n_snapshots);
  std::vector<double> mean, var, pmean;
  for (int s = 0; s < stats.n_snapshots; ++s) {
    const auto m = stats.potential_mean(s);
    append(mean, m);
    append(var, stats.potential_variance(s));
    for (std::size_t c = 0; c < m.size(); ++c) {
      const int k = g.cell(c).k;
      pmean.push_back(m[c] + scenario.props.oil_density * scenario.props.gravity * (g.depth(k) - g.z_top()));
    }
  }
  b.add("potential_mean", spatial(g, {snaps}), mean, "Pa");
  b.add("potential_variance", spatial(g, {snaps}), var, "Pa^2");
  b.add("pressure_mean", spatial(g, {snaps}), pmean, "Pa");

  const std::size_t nw = static_cast<std::size_t>(stats.n_wells), ns = static_cast<std::size_t>(stats.n_steps);
  const double q = units::si_to_m3_per_day(1.0), p = units::pa_to_bar(1.0);
  auto scaled = [](std::vector<double> v, double f) {
    for (double& x : v) x *= f;
    return v;
  };
  b.add("rate_mean", {nw, ns}, scaled(stats.rate.mean, q), "m3/day");
  b.add("rate_variance", {nw, ns}, scaled(stats.rate.variance(stats.count), q * q), "(m3/day)^2");
  b.add("bhp_mean", {nw, ns}, scaled(stats.bhp.mean, p), "bar");
  b.add("bhp_variance", {nw, ns}, scaled(stats.bhp.variance(stats.count), p * p), "bar^2");
  b.metadata["config"] = to_json(cfg);
  b.metadata["wells"] = wells_json(scenario.wells);
  b.metadata["seeds"] = to_json(cfg)["seeds"];
  b.metadata["realizations"] = stats.count;
  b.metadata["provenance"] = provenance("uq");
  return b;
}

void write_uq_csv(const std::filesystem::path& file, const Scenario& scenario, const EnsembleStats& stats) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << "well_id,step,time_days,rate_mean_m3_per_day,rate_std_m3_per_day,bhp_mean_bar,bhp_std_bar\n"
      << std::setprecision(10);
  const auto rv = stats.rate.variance(stats.count);
  const auto bv = stats.bhp.variance(stats.count);
  for (int w = 0; w < stats.n_wells; ++w)
    for (int n = 0; n < stats.n_steps; ++n) {
      const std::size_t k = static_cast<std::size_t>(w * stats.n_steps + n);
      out << scenario.wells[static_cast<std::size_t>(w)].name << ',' << n + 1 << ','
          << units::s_to_days(scenario.dt * (n + 1)) << ',' << units::si_to_m3_per_day(stats.rate.mean[k]) << ','
          << units::si_to_m3_per_day(std::sqrt(rv[k])) << ',' << units::pa_to_bar(stats.bhp.mean[k]) << ','
          << units::pa_to_bar(std::sqrt(bv[k])) << '\n';
    }
}

}  // namespace subflow
