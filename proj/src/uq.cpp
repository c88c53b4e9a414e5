#include "subflow/uq.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <map>
#include <mutex>
#include <optional>
#include <thread>

namespace subflow {

void Moments::add(std::size_t count_before, std::span<const double> x) {
  if (count_before == 0) {
    mean.assign(x.begin(), x.end());
    m2.assign(x.size(), 0.0);
    return;
  }
  if (x.size() != mean.size()) throw std::invalid_argument("Moments::add: size mismatch");
  const double n = static_cast<double>(count_before + 1);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double delta = x[i] - mean[i];
    mean[i] += delta / n;
    m2[i] += delta * (x[i] - mean[i]);
  }
}

std::vector<double> Moments::variance(std::size_t count) const {
  std::vector<double> v(m2.size(), 0.0);
  if (count == 0) return v;
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::max(0.0, m2[i] / static_cast<double>(count));
  return v;
}

void EnsembleStats::add(const Solution& sol) {
  const int snaps = static_cast<int>(sol.potential.size());
  const std::size_t cells = snaps > 0 ? sol.potential.front().size() : 0;
  const int wells = static_cast<int>(sol.wells.size());
  const int steps = snaps - 1;
  if (count == 0) {
    n_snapshots = snaps;
    n_cells = cells;
    n_wells = wells;
    n_steps = steps;
  } else if (snaps != n_snapshots || cells != n_cells || wells != n_wells) {
    throw std::invalid_argument("EnsembleStats::add: solution shape differs from ensemble");
  }

  std::vector<double> phi;
  phi.reserve(static_cast<std::size_t>(snaps) * cells);
  for (const auto& f : sol.potential) phi.insert(phi.end(), f.data().begin(), f.data().end());
  std::vector<double> q, p;
  for (const WellSolution& w : sol.wells) {
    if (static_cast<int>(w.steps.size()) != steps)
      throw std::invalid_argument("EnsembleStats::add: well series length mismatch");
    for (const WellStep& s : w.steps) {
      q.push_back(s.total_rate);
      p.push_back(s.bhp);
    }
  }
  potential.add(count, phi);
  rate.add(count, q);
  bhp.add(count, p);
  ++count;
}

std::vector<double> EnsembleStats::potential_mean(int snapshot) const {
  const auto first = potential.mean.begin() + static_cast<std::ptrdiff_t>(snapshot * n_cells);
  return {first, first + static_cast<std::ptrdiff_t>(n_cells)};
}

std::vector<double> EnsembleStats::potential_variance(int snapshot) const {
  std::vector<double> out(n_cells);
  for (std::size_t c = 0; c < n_cells; ++c)
    out[c] = std::max(0.0, potential.m2[static_cast<std::size_t>(snapshot) * n_cells + c] /
                               static_cast<double>(count));
  return out;
}

namespace {

// Symmetric in (a, b) so that merging is bitwise commutative.
Moments merge_moments(const Moments& a, std::size_t na, const Moments& b, std::size_t nb) {
  Moments out;
  const double fa = static_cast<double>(na), fb = static_cast<double>(nb), n = fa + fb;
  out.mean.resize(a.mean.size());
  out.m2.resize(a.mean.size());
  for (std::size_t i = 0; i < a.mean.size(); ++i) {
    const double delta = b.mean[i] - a.mean[i];
    out.mean[i] = (fa * a.mean[i] + fb * b.mean[i]) / n;
    out.m2[i] = (a.m2[i] + b.m2[i]) + delta * delta * (fa * fb / n);
  }
  return out;
}

}  // namespace

EnsembleStats merge_stats(const EnsembleStats& a, const EnsembleStats& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  if (a.n_snapshots != b.n_snapshots || a.n_cells != b.n_cells || a.n_wells != b.n_wells ||
      a.n_steps != b.n_steps)
    throw std::invalid_argument("merge_stats: shape mismatch");
  EnsembleStats out = a;
  out.count = a.count + b.count;
  out.potential = merge_moments(a.potential, a.count, b.potential, b.count);
  out.rate = merge_moments(a.rate, a.count, b.rate, b.count);
  out.bhp = merge_moments(a.bhp, a.count, b.bhp, b.count);
  return out;
}

EnsembleResult run_ensemble(const KleBasis& basis, const CovarianceSpec& cov,
                            const Scenario& scenario_template, int n_real, std::uint64_t seed,
                            const ForwardModel& forward, const EnsembleOptions& options) {
  if (n_real < 2) throw std::invalid_argument("run_ensemble: need at least two realizations");
  if (options.chunk_size < 1) throw std::invalid_argument("run_ensemble: chunk_size must be >= 1");
  if (!forward) throw std::invalid_argument("run_ensemble: no forward model");
  const auto samples = draw_samples(seed, n_real, basis.mode_count());
  const int n_chunks = (n_real + options.chunk_size - 1) / options.chunk_size;

  std::mutex mutex;
  std::map<int, EnsembleStats> pending;
  int next_to_merge = 0;
  EnsembleResult result;
  std::map<int, std::string> failures;
  std::atomic<int> next_chunk{0};
  std::atomic<bool> abort{false};

  auto worker = [&] {
    for (;;) {
      const int chunk = next_chunk.fetch_add(1);
      if (chunk >= n_chunks || abort.load()) return;
      EnsembleStats local;
      std::vector<int> local_failed;
      const int begin = chunk * options.chunk_size;
      const int end = std::min(n_real, begin + options.chunk_size);
      for (int r = begin; r < end; ++r) {
        try {
          Scenario s = scenario_template;
          s.perm = permeability_from_lnk(sample_field(basis, samples[static_cast<std::size_t>(r)], cov));
          local.add(forward(s));
        } catch (const std::exception& e) {
          std::lock_guard lock(mutex);
          failures.emplace(r, e.what());
          local_failed.push_back(r);
          if (!options.tolerate_failures) {
            abort = true;
            return;
          }
        }
      }
      std::lock_guard lock(mutex);
      result.failed.insert(result.failed.end(), local_failed.begin(), local_failed.end());
      pending.emplace(chunk, std::move(local));
      for (auto it = pending.find(next_to_merge); it != pending.end();
           it = pending.find(next_to_merge)) {
        result.stats = merge_stats(result.stats, it->second);
        pending.erase(it);
        ++next_to_merge;
      }
    }
  };

  const int n_workers = std::max(1, std::min(options.workers, n_chunks));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }

  if (!failures.empty() && !options.tolerate_failures) {
    const auto& [index, what] = *failures.begin();
    throw RealizationError(index, what);
  }
  std::sort(result.failed.begin(), result.failed.end());
  if (result.stats.empty()) throw std::runtime_error("run_ensemble: every realization failed");
  return result;
}

}  // namespace subflow
