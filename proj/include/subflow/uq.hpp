#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "subflow/kle.hpp"
#include "subflow/scenario.hpp"
#include "subflow/simulator.hpp"

namespace subflow {

/// Streaming mean / sum of squared deviations over a flat vector of quantities.
struct Moments {
  std::vector<double> mean;
  std::vector<double> m2;

  void add(std::size_t count_before, std::span<const double> x);
  std::vector<double> variance(std::size_t count) const;  // population, divisor N
};

/// Pointwise statistics of an ensemble of forward solutions.
///
/// Potential moments are flattened as snapshot * n_cells + cell (snapshot 0 is
/// the initial state). Well moments are flattened as well * n_steps + (step - 1).
struct EnsembleStats {
  std::size_t count = 0;
  int n_snapshots = 0;
  std::size_t n_cells = 0;
  int n_wells = 0;
  int n_steps = 0;
  Moments potential;
  Moments rate;   // m^3/s
  Moments bhp;    // Pa

  bool empty() const { return count == 0; }
  void add(const Solution& sol);

  std::vector<double> potential_mean(int snapshot) const;
  std::vector<double> potential_variance(int snapshot) const;
};

/// Pooled moments (parallel-moments combination). Either side may be empty.
/// Throws std::invalid_argument when shapes differ.
EnsembleStats merge_stats(const EnsembleStats& a, const EnsembleStats& b);

/// Carries the index of the first failing realization.
class RealizationError : public std::runtime_error {
 public:
  RealizationError(int index, const std::string& what)
      : std::runtime_error("realization " + std::to_string(index) + ": " + what), index_(index) {}
  int index() const noexcept { return index_; }

 private:
  int index_;
};

struct EnsembleOptions {
  int workers = 1;
  int chunk_size = 16;               // realizations per reduction unit
  bool tolerate_failures = false;    // skip failed realizations instead of throwing
};

struct EnsembleResult {
  EnsembleStats stats;
  std::vector<int> failed;           // indices skipped under tolerate_failures
};

/// Draws n_real KLE samples from `seed`, maps each to a permeability field on
/// the template scenario and accumulates statistics of `forward`'s output.
/// Realizations are reduced in fixed chunks merged in index order, so the
/// result is bitwise independent of the worker count.
EnsembleResult run_ensemble(const KleBasis& basis, const CovarianceSpec& cov,
                            const Scenario& scenario_template, int n_real, std::uint64_t seed,
                            const ForwardModel& forward, const EnsembleOptions& options = {});

}  // namespace subflow
