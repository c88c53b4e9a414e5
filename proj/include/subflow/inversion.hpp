#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "subflow/kle.hpp"
#include "subflow/pso.hpp"
#include "subflow/scenario.hpp"
#include "subflow/simulator.hpp"

namespace subflow {

enum class PermDomain { LogMd, Md };

/// Well data in reporting units: rates m^3/day, BHP bar, permeability ln(mD)
/// (or mD under PermDomain::Md). rate/bhp are [well][step], perm is [well][perforation].
struct WellObservations {
  std::vector<std::vector<double>> rate;
  std::vector<std::vector<double>> bhp;
  std::vector<std::vector<double>> perm;

  int n_steps() const { return rate.empty() ? 0 : static_cast<int>(rate.front().size()); }
};

/// Weighted mismatch objective over well rates, perforation permeabilities and BHPs.
struct FitnessSpec {
  double w_rate = 1.0;
  double w_perm = 1000.0;
  double w_bhp = 10.0;
  WellObservations observed;
  PermDomain perm_domain = PermDomain::LogMd;
};

/// FV = w_rate / (N_t N_well) sum (q - q_ref)^2
///    + w_perm / N_perm sum (k - k_ref)^2          (N_perm = N_well N_k)
///    + w_bhp / (N_t N_well) sum (BHP - BHP_ref)^2
/// Throws std::invalid_argument on shape mismatch or negative weights.
double fitness_value(const WellObservations& predicted, const FitnessSpec& spec);

/// Extracts the first n_steps of rates/BHPs and the perforation permeabilities.
WellObservations observe(const Scenario& scenario, const Solution& solution, int n_steps,
                         PermDomain domain = PermDomain::LogMd);

enum class SearchMode { KnownStats, UnknownStats };

struct InverseProblem {
  Scenario scenario;            // grid, props, wells, dt; n_steps is the full horizon
  CovarianceSpec prior;         // mean always used; variance / eta only under KnownStats
  int n_modes = 13;
  int observed_steps = 10;
  SearchMode mode = SearchMode::KnownStats;
  double variance_min = 0.0, variance_max = 1.0;
  double eta_min = 130.0, eta_max = 190.0;
  FitnessSpec fitness;
  ForwardModel forward = run;

  int search_dimension() const { return n_modes + (mode == SearchMode::UnknownStats ? 2 : 0); }
};

struct Candidate {
  KleSample xi;
  CovarianceSpec cov;
};

/// Search vector layout: xi_1..xi_m, then (variance, eta) under UnknownStats
/// with eta applied to all three axes.
Candidate decode_candidate(const InverseProblem& problem, std::span<const double> x);

/// Unit-variance bases keyed by correlation length; rebuilt on a miss.
class BasisProvider {
 public:
  BasisProvider(Grid3D grid, int n_modes) : grid_(std::move(grid)), n_modes_(n_modes) {}
  std::shared_ptr<const KleBasis> get(const CovarianceSpec& cov) const;

 private:
  Grid3D grid_;
  int n_modes_;
  mutable std::mutex mutex_;
  mutable std::shared_ptr<const KleBasis> cached_;
};

/// ln(mD) field of a candidate.
ScalarField3D candidate_field(const Candidate& c, const BasisProvider& bases);

/// Runs `problem.forward` over the observation window and scores it.
double evaluate_fitness(const InverseProblem& problem, const BasisProvider& bases,
                        std::span<const double> x);

/// Extends xi-dimension PSO settings with bounds for (variance, eta) under
/// UnknownStats. Hyperparameter velocity limits keep the xi ratio
/// v_range / x_range.
PsoParams search_params(const InverseProblem& problem, const PsoParams& xi_params);

struct InversionResult {
  Candidate best;
  double fitness = 0.0;
  std::vector<double> trace;
  ScalarField3D lnk;
  std::vector<double> best_x;
};

InversionResult invert(const InverseProblem& problem, const PsoParams& params);

struct SyntheticCase {
  Candidate truth;
  ScalarField3D lnk;
  Solution solution;            // full horizon
  WellObservations observed;    // observation window, noise applied to rates and BHP
};

/// Observations from a known candidate, each rate and BHP multiplied by
/// (1 + noise * N(0,1)). Permeability data are exact.
SyntheticCase make_synthetic_case(const InverseProblem& problem, const Candidate& truth,
                                  double noise, std::uint64_t seed);

}  // namespace subflow
