#include "subflow/cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "subflow/bundle.hpp"
#include "subflow/config.hpp"
#include "subflow/errors.hpp"
#include "subflow/exports.hpp"
#include "subflow/inversion.hpp"
#include "subflow/metrics.hpp"
#include "subflow/units.hpp"
#include "subflow/uq.hpp"

namespace subflow {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Options {
  std::string config;
  std::string out;
  int n = 0;
  int workers = 0;
  bool mean_field = false;
  std::string mode = "known-stats";
  std::string bundle;
  std::string pred, ref;
  std::string array = "potential";
};

ScalarField3D draw_field(const ScenarioConfig& cfg, const KleBasis& basis) {
  const auto xi = draw_samples(cfg.seeds.field, 1, cfg.n_modes);
  return sample_field(basis, xi.front(), cfg.covariance);
}

void write_json(const fs::path& file, const json& j) {
  std::ofstream out(file);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("cannot write " + file.string());
}

int cmd_genfield(const Options& o, std::ostream& out) {
  const ScenarioConfig cfg = load_config(o.config);
  const int n = o.n > 0 ? o.n : 1;
  const KleBasis basis = make_basis(cfg);
  const Grid3D& g = basis.grid;
  const auto xi = draw_samples(cfg.seeds.field, n, cfg.n_modes);
  std::vector<double> lnk, xi_flat;
  for (const auto& x : xi) {
    const auto z = sample_field(basis, x, cfg.covariance);
    lnk.insert(lnk.end(), z.values().begin(), z.values().end());
    xi_flat.insert(xi_flat.end(), x.begin(), x.end());
  }
  DatasetBundle b(g);
  const auto un = static_cast<std::size_t>(n);
  b.add("lnk", {un, static_cast<std::size_t>(g.nx()), static_cast<std::size_t>(g.ny()), static_cast<std::size_t>(g.nz())},
        lnk, "ln(mD)");
  b.add("xi", {un, static_cast<std::size_t>(cfg.n_modes)}, xi_flat);
  add_basis(b, basis);
  b.metadata["config"] = to_json(cfg);
  b.metadata["seeds"] = to_json(cfg)["seeds"];
  b.metadata["energy_fraction"] = energy_fraction(basis, cfg.n_modes);
  b.metadata["provenance"] = {{"generator", "subflow"}, {"command", "genfield"}};
  write_bundle(o.out, b);
  out << "wrote " << n << " field(s), energy fraction " << energy_fraction(basis, cfg.n_modes) << " -> " << o.out
      << '\n';
  return 0;
}

int cmd_simulate(const Options& o, std::ostream& out) {
  const ScenarioConfig cfg = load_config(o.config);
  Scenario s = make_scenario(cfg);
  const ScalarField3D lnk =
      o.mean_field ? ScalarField3D(s.grid, cfg.covariance.mean_lnk) : draw_field(cfg, make_basis(cfg));
  s.perm = permeability_from_lnk(lnk);
  const auto t0 = std::chrono::steady_clock::now();
  const Solution sol = run(s);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  DatasetBundle b = solution_bundle(cfg, s, lnk, sol, "simulate");
  b.metadata["mean_field"] = o.mean_field;
  write_bundle(o.out, b);
  write_well_csv(fs::path(o.out) / "wells.csv", sol);
  double release = 0.0, produced = 0.0;
  for (const auto& d : sol.diagnostics) {
    release += d.storage_release;
    produced += d.production;
  }
  out << "simulated " << sol.step_count() << " steps in " << std::setprecision(3) << secs << " s; produced "
      << std::setprecision(8) << produced << " m3, storage release " << release << " m3 -> " << o.out << '\n';
  return 0;
}

int cmd_residual(const Options& o, std::ostream& out) {
  DatasetBundle b = read_bundle(o.bundle);
  const ResidualReport r = residual_check(b);
  out << report_to_json(r).dump(2) << '\n';
  if (!o.out.empty()) {
    DatasetBundle rb(b.grid());
    rb.metadata["config"] = b.metadata.value("config", json::object());
    rb.metadata["source"] = fs::absolute(o.bundle).string();
    rb.metadata["provenance"] = {{"generator", "subflow"}, {"command", "residual-check"}};
    add_report(rb, r);
    write_bundle(o.out, rb);
  }
  return 0;
}

int cmd_export(const Options& o, std::ostream& out) {
  const ScenarioConfig cfg = load_config(o.config);
  const DatasetBundle b = export_training_set(cfg);
  write_bundle(o.out, b);
  out << "labelled pairs " << b.metadata["n_labelled_pairs"] << ", virtual fields " << b.metadata["n_virtual"]
      << " -> " << o.out << '\n';
  return 0;
}

int cmd_uq(const Options& o, std::ostream& out) {
  ScenarioConfig cfg = load_config(o.config);
  if (o.n > 0) cfg.uq.n_realizations = o.n;
  if (o.workers > 0) cfg.uq.workers = o.workers;
  if (cfg.uq.n_realizations < 2) throw ConfigError("/uq/n_realizations", "must be >= 2");
  const Scenario s = make_scenario(cfg);
  const KleBasis basis = make_basis(cfg);
  EnsembleOptions opts;
  opts.workers = cfg.uq.workers;
  opts.chunk_size = cfg.uq.chunk_size;
  const auto t0 = std::chrono::steady_clock::now();
  const EnsembleResult res = run_ensemble(basis, cfg.covariance, s, cfg.uq.n_realizations, cfg.seeds.ensemble, run, opts);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_bundle(o.out, stats_bundle(cfg, s, res.stats));
  write_uq_csv(fs::path(o.out) / "wells_stats.csv", s, res.stats);
  out << res.stats.count << " realizations in " << std::setprecision(4) << secs << " s -> " << o.out << '\n';
  return 0;
}

int cmd_invert(const Options& o, std::ostream& out) {
  const ScenarioConfig cfg = load_config(o.config);
  SearchMode mode;
  if (o.mode == "known-stats") mode = SearchMode::KnownStats;
  else if (o.mode == "unknown-stats") mode = SearchMode::UnknownStats;
  else throw ConfigError("--mode", "expected known-stats or unknown-stats");

  InverseProblem problem = make_inverse_problem(cfg, mode);
  Candidate truth{draw_samples(cfg.seeds.truth, 1, cfg.n_modes).front(), cfg.covariance};
  if (mode == SearchMode::UnknownStats) {
    truth.cov.variance = cfg.inversion.truth_variance;
    truth.cov.eta_x = truth.cov.eta_y = truth.cov.eta_z = cfg.inversion.truth_eta;
  }
  const SyntheticCase syn = make_synthetic_case(problem, truth, cfg.inversion.noise, cfg.seeds.truth + 1);
  problem.fitness.observed = syn.observed;
  const PsoParams params = search_params(problem, make_pso_params(cfg));

  const auto t0 = std::chrono::steady_clock::now();
  const InversionResult res = invert(problem, params);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  Scenario s = problem.scenario;
  s.perm = permeability_from_lnk(res.lnk);
  const Solution sol = run(s);

  fs::create_directories(o.out);
  DatasetBundle b = solution_bundle(cfg, s, res.lnk, sol, "invert");
  b.add("reference/lnk", {static_cast<std::size_t>(s.grid.nx()), static_cast<std::size_t>(s.grid.ny()),
                          static_cast<std::size_t>(s.grid.nz())},
        syn.lnk.values(), "ln(mD)");
  {
    std::ofstream trace(fs::path(o.out) / "fitness_trace.csv");
    trace << "generation,best_fitness\n" << std::setprecision(12);
    for (std::size_t g = 0; g < res.trace.size(); ++g) trace << g << ',' << res.trace[g] << '\n';
  }
  write_well_csv(fs::path(o.out) / "wells.csv", sol);
  write_well_csv(fs::path(o.out) / "wells_reference.csv", syn.solution);

  // Forecast-window rate error against the noiseless truth.
  std::vector<double> pred, ref;
  for (std::size_t w = 0; w < sol.wells.size(); ++w)
    for (int n = problem.observed_steps; n < sol.step_count(); ++n) {
      pred.push_back(sol.wells[w].steps[static_cast<std::size_t>(n)].total_rate);
      ref.push_back(syn.solution.wells[w].steps[static_cast<std::size_t>(n)].total_rate);
    }
  json summary = {{"mode", o.mode},
                  {"best_fitness", res.fitness},
                  {"seconds", secs},
                  {"variance", res.best.cov.variance},
                  {"eta", res.best.cov.eta_x},
                  {"xi", res.best.xi},
                  {"truth_xi", truth.xi},
                  {"truth_variance", truth.cov.variance},
                  {"truth_eta", truth.cov.eta_x}};
  if (!pred.empty()) summary["forecast_rate_relative_l2"] = relative_l2(pred, ref);
  b.metadata["inversion"] = summary;
  write_bundle(o.out, b);
  write_json(fs::path(o.out) / "summary.json", summary);
  out << summary.dump(2) << '\n';
  return 0;
}

int cmd_metrics(const Options& o, std::ostream& out) {
  const DatasetBundle pb = read_bundle(o.pred), rb = read_bundle(o.ref);
  const BundleArray& p = pb.at(o.array);
  const BundleArray& r = rb.at(o.array);
  if (p.shape != r.shape) throw std::invalid_argument("metrics: array shapes differ");
  // Leading axis indexes realizations when the array has one beyond the spatial block.
  const std::size_t n_real = p.shape.size() > 3 ? p.shape.front() : 1;
  const std::size_t per = p.element_count() / n_real;
  std::vector<std::vector<double>> pv(n_real), rv(n_real);
  for (std::size_t k = 0; k < n_real; ++k) {
    pv[k].assign(p.data.begin() + static_cast<std::ptrdiff_t>(k * per), p.data.begin() + static_cast<std::ptrdiff_t>((k + 1) * per));
    rv[k].assign(r.data.begin() + static_cast<std::ptrdiff_t>(k * per), r.data.begin() + static_cast<std::ptrdiff_t>((k + 1) * per));
  }
  // A uniform slab (e.g. the initial snapshot) has no R2; report nan for it.
  auto guarded = [](auto metric, const auto& a, const auto& b) {
    try {
      return metric(a, b);
    } catch (const std::invalid_argument&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  };
  auto l2 = [](std::span<const double> a, std::span<const double> b) { return relative_l2(a, b); };
  auto r2 = [](std::span<const double> a, std::span<const double> b) { return r2_score(a, b); };
  std::ostringstream csv;
  csv << "realization,relative_l2,r2,n_points\n" << std::setprecision(12);
  std::vector<double> pp, rr;
  for (std::size_t k = 0; k < n_real; ++k) {
    csv << k << ',' << guarded(l2, pv[k], rv[k]) << ',' << guarded(r2, pv[k], rv[k]) << ',' << per << '\n';
    pp.insert(pp.end(), pv[k].begin(), pv[k].end());
    rr.insert(rr.end(), rv[k].begin(), rv[k].end());
  }
  csv << "pooled," << guarded(l2, pp, rr) << ',' << guarded(r2, pp, rr) << ',' << pp.size() << '\n';
  if (!o.out.empty()) {
    std::ofstream f(o.out);
    f << csv.str();
    if (!f) throw std::runtime_error("cannot write " + o.out);
  }
  out << csv.str();
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Single-phase reservoir simulation, KLE fields, UQ and PSO inversion"};
  app.require_subcommand(1);
  Options o;

  auto* gen = app.add_subcommand("genfield", "Sample KLE log-permeability fields");
  gen->add_option("--config", o.config, "Scenario config (JSON)")->required();
  gen->add_option("--n", o.n, "Number of fields");
  gen->add_option("--out", o.out, "Output bundle directory");

  auto* sim = app.add_subcommand("simulate", "Forward run; writes a bundle and wells.csv");
  sim->add_option("--config", o.config, "Scenario config (JSON)")->required();
  sim->add_option("--out", o.out, "Output bundle directory");
  sim->add_flag("--mean-field", o.mean_field, "Use the uniform mean permeability instead of a KLE draw");

  auto* res = app.add_subcommand("residual-check", "Loss and PDE residual report of a solution bundle");
  res->add_option("--bundle", o.bundle, "Solution bundle")->required();
  res->add_option("--out", o.out, "Write a bundle with the scaled residual");

  auto* exp = app.add_subcommand("export-dataset", "Labelled and virtual training sets");
  exp->add_option("--config", o.config, "Scenario config (JSON)")->required();
  exp->add_option("--out", o.out, "Output bundle directory");

  auto* uq = app.add_subcommand("uq", "Monte Carlo statistics of the forward model");
  uq->add_option("--config", o.config, "Scenario config (JSON)")->required();
  uq->add_option("--n", o.n, "Number of realizations (overrides the config)");
  uq->add_option("--workers", o.workers, "Worker threads (overrides the config)");
  uq->add_option("--out", o.out, "Output bundle directory");

  auto* inv = app.add_subcommand("invert", "PSO history matching on a synthetic truth");
  inv->add_option("--config", o.config, "Scenario config (JSON)")->required();
  inv->add_option("--mode", o.mode, "known-stats or unknown-stats");
  inv->add_option("--out", o.out, "Output directory");

  auto* met = app.add_subcommand("metrics", "Relative L2 and R2 per realization and pooled");
  met->add_option("--pred", o.pred, "Predicted bundle")->required();
  met->add_option("--ref", o.ref, "Reference bundle")->required();
  met->add_option("--array", o.array, "Array name");
  met->add_option("--out", o.out, "CSV file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  if (o.out.empty() && !*res && !*met) o.out = "out";

  try {
    if (*gen) return cmd_genfield(o, out);
    if (*sim) return cmd_simulate(o, out);
    if (*res) return cmd_residual(o, out);
    if (*exp) return cmd_export(o, out);
    if (*uq) return cmd_uq(o, out);
    if (*inv) return cmd_invert(o, out);
    if (*met) return cmd_metrics(o, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const RealizationError& e) {
    err << "numerical failure in " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace subflow
