#include "subflow/inversion.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "subflow/units.hpp"

namespace subflow {

namespace {

double squared_mismatch(const std::vector<std::vector<double>>& a,
                        const std::vector<std::vector<double>>& b, std::size_t& count,
                        const char* what) {
  if (a.size() != b.size())
    throw std::invalid_argument(std::string("fitness: well count mismatch in ") + what);
  double sum = 0.0;
  count = 0;
  for (std::size_t w = 0; w < a.size(); ++w) {
    if (a[w].size() != b[w].size())
      throw std::invalid_argument(std::string("fitness: series length mismatch in ") + what);
    for (std::size_t n = 0; n < a[w].size(); ++n) {
      const double d = a[w][n] - b[w][n];
      sum += d * d;
    }
    count += a[w].size();
  }
  return sum;
}

}  // namespace

double fitness_value(const WellObservations& predicted, const FitnessSpec& spec) {
  if (spec.w_rate < 0.0 || spec.w_perm < 0.0 || spec.w_bhp < 0.0)
    throw std::invalid_argument("fitness weights must be >= 0");
  double fv = 0.0;
  std::size_t n = 0;
  if (spec.w_rate > 0.0) {
    const double s = squared_mismatch(predicted.rate, spec.observed.rate, n, "rates");
    if (n > 0) fv += spec.w_rate * s / static_cast<double>(n);
  }
  if (spec.w_perm > 0.0) {
    const double s = squared_mismatch(predicted.perm, spec.observed.perm, n, "permeability");
    if (n > 0) fv += spec.w_perm * s / static_cast<double>(n);
  }
  if (spec.w_bhp > 0.0) {
    const double s = squared_mismatch(predicted.bhp, spec.observed.bhp, n, "BHP");
    if (n > 0) fv += spec.w_bhp * s / static_cast<double>(n);
  }
  return fv;
}

WellObservations observe(const Scenario& scenario, const Solution& solution, int n_steps,
                         PermDomain domain) {
  if (n_steps < 0 || n_steps > solution.step_count())
    throw std::invalid_argument("observe: observation window exceeds the solution");
  if (solution.wells.size() != scenario.wells.size())
    throw std::invalid_argument("observe: solution has a different well count");
  WellObservations out;
  for (std::size_t w = 0; w < scenario.wells.size(); ++w) {
    const WellSpec& spec = scenario.wells[w];
    std::vector<double> q, p, k;
    for (int s = 0; s < n_steps; ++s) {
      const WellStep& step = solution.wells[w].steps[static_cast<std::size_t>(s)];
      q.push_back(units::si_to_m3_per_day(step.total_rate));
      p.push_back(units::pa_to_bar(step.bhp));
    }
    for (int kk = spec.k_top; kk <= spec.k_bot; ++kk) {
      const double md = units::m2_to_md(scenario.perm(spec.i, spec.j, kk));
      k.push_back(domain == PermDomain::LogMd ? std::log(md) : md);
    }
    out.rate.push_back(std::move(q));
    out.bhp.push_back(std::move(p));
    out.perm.push_back(std::move(k));
  }
  return out;
}

Candidate decode_candidate(const InverseProblem& problem, std::span<const double> x) {
  if (x.size() != static_cast<std::size_t>(problem.search_dimension()))
    throw std::invalid_argument("decode_candidate: wrong search vector length");
  Candidate c;
  c.xi.assign(x.begin(), x.begin() + problem.n_modes);
  c.cov = problem.prior;
  if (problem.mode == SearchMode::UnknownStats) {
    c.cov.variance = std::max(0.0, x[static_cast<std::size_t>(problem.n_modes)]);
    const double eta = x[static_cast<std::size_t>(problem.n_modes) + 1];
    c.cov.eta_x = c.cov.eta_y = c.cov.eta_z = eta;
  }
  return c;
}

std::shared_ptr<const KleBasis> BasisProvider::get(const CovarianceSpec& cov) const {
  {
    std::lock_guard lock(mutex_);
    if (cached_ && cached_->covariance.eta_x == cov.eta_x && cached_->covariance.eta_y == cov.eta_y &&
        cached_->covariance.eta_z == cov.eta_z)
      return cached_;
  }
  CovarianceSpec unit = cov;
  unit.variance = 1.0;
  auto basis = std::make_shared<const KleBasis>(build_basis(grid_, unit, n_modes_));
  std::lock_guard lock(mutex_);
  cached_ = basis;
  return basis;
}

ScalarField3D candidate_field(const Candidate& c, const BasisProvider& bases) {
  return sample_field(*bases.get(c.cov), c.xi, c.cov);
}

double evaluate_fitness(const InverseProblem& problem, const BasisProvider& bases,
                        std::span<const double> x) {
  const Candidate c = decode_candidate(problem, x);
  Scenario s = problem.scenario;
  s.perm = permeability_from_lnk(candidate_field(c, bases));
  s.n_steps = problem.observed_steps;
  const Solution sol = problem.forward(s);
  return fitness_value(observe(s, sol, problem.observed_steps, problem.fitness.perm_domain),
                       problem.fitness);
}

PsoParams search_params(const InverseProblem& problem, const PsoParams& xi_params) {
  if (xi_params.dimension() != static_cast<std::size_t>(problem.n_modes))
    throw std::invalid_argument("search_params: expected bounds for the KLE coefficients only");
  PsoParams p = xi_params;
  if (problem.mode == SearchMode::UnknownStats) {
    const double x_range = xi_params.xmax[0] - xi_params.xmin[0];
    const double lo = xi_params.vmin[0] / x_range, hi = xi_params.vmax[0] / x_range;
    auto add = [&](double xmin, double xmax) {
      p.xmin.push_back(xmin);
      p.xmax.push_back(xmax);
      p.vmin.push_back(lo * (xmax - xmin));
      p.vmax.push_back(hi * (xmax - xmin));
    };
    add(problem.variance_min, problem.variance_max);
    add(problem.eta_min, problem.eta_max);
  }
  return p;
}

InversionResult invert(const InverseProblem& problem, const PsoParams& params) {
  if (problem.observed_steps < 1 || problem.observed_steps > problem.scenario.n_steps)
    throw std::invalid_argument("invert: observed_steps must be in [1, n_steps]");
  if (params.dimension() != static_cast<std::size_t>(problem.search_dimension()))
    throw std::invalid_argument("invert: PSO bounds do not match the search dimension");
  if (problem.mode == SearchMode::UnknownStats &&
      (!(problem.variance_min >= 0.0) || !(problem.eta_min > 0.0)))
    throw std::invalid_argument("invert: hyperparameter bounds must be non-negative / positive");

  const BasisProvider bases(problem.scenario.grid, problem.n_modes);
  auto objective = [&](std::span<const double> x) {
    try {
      return evaluate_fitness(problem, bases, x);
    } catch (const std::invalid_argument&) {
      throw;
    } catch (const std::exception&) {
      // A candidate the forward model cannot handle is simply infeasible.
      return std::numeric_limits<double>::infinity();
    }
  };
  PsoResult pso = pso_minimize(objective, params);
  Candidate best = decode_candidate(problem, pso.best.x);
  ScalarField3D lnk = candidate_field(best, bases);
  return {std::move(best), pso.best.fitness, std::move(pso.trace), std::move(lnk), pso.best.x};
}

SyntheticCase make_synthetic_case(const InverseProblem& problem, const Candidate& truth,
                                  double noise, std::uint64_t seed) {
  const BasisProvider bases(problem.scenario.grid, problem.n_modes);
  ScalarField3D lnk = candidate_field(truth, bases);
  Scenario s = problem.scenario;
  s.perm = permeability_from_lnk(lnk);
  Solution sol = problem.forward(s);
  WellObservations obs = observe(s, sol, problem.observed_steps, problem.fitness.perm_domain);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (auto* series : {&obs.rate, &obs.bhp})
    for (auto& well : *series)
      for (double& v : well) v *= 1.0 + noise * normal(rng);
  return {truth, std::move(lnk), std::move(sol), std::move(obs)};
}

}  // namespace subflow
