#include "subflow/pso.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <stdexcept>
#include <thread>

namespace subflow {

PsoParams PsoParams::uniform(std::size_t dim, double xmin, double xmax, double vmin, double vmax) {
  PsoParams p;
  p.xmin.assign(dim, xmin);
  p.xmax.assign(dim, xmax);
  p.vmin.assign(dim, vmin);
  p.vmax.assign(dim, vmax);
  return p;
}

void PsoParams::validate() const {
  const std::size_t d = xmin.size();
  if (d == 0) throw std::invalid_argument("PSO: zero-dimensional search space");
  if (xmax.size() != d || vmin.size() != d || vmax.size() != d)
    throw std::invalid_argument("PSO: bound vectors differ in length");
  for (std::size_t i = 0; i < d; ++i) {
    if (!(xmin[i] < xmax[i])) throw std::invalid_argument("PSO: need xmin < xmax");
    if (!(vmin[i] < vmax[i])) throw std::invalid_argument("PSO: need vmin < vmax");
  }
  if (sizepop < 2) throw std::invalid_argument("PSO: sizepop must be >= 2");
  if (maxgen < 1) throw std::invalid_argument("PSO: maxgen must be >= 1");
  if (workers < 1) throw std::invalid_argument("PSO: workers must be >= 1");
}

void move_particle(Particle& p, const GlobalBest& gbest, const PsoParams& params,
                   std::span<const double> r1, std::span<const double> r2) {
  const std::size_t d = p.x.size();
  for (std::size_t i = 0; i < d; ++i) {
    double v = params.omega * p.v[i] + params.c1 * r1[i] * (p.pbest[i] - p.x[i]) +
               params.c2 * r2[i] * (gbest.x[i] - p.x[i]);
    v = std::clamp(v, params.vmin[i], params.vmax[i]);
    p.v[i] = v;
    p.x[i] = std::clamp(p.x[i] + v, params.xmin[i], params.xmax[i]);
  }
}

void update_bests(std::vector<Particle>& swarm, GlobalBest& gbest) {
  if (gbest.x.empty() && !swarm.empty()) gbest.x = swarm.front().x;
  for (Particle& p : swarm) {
    if (p.fitness < p.pbest_fitness) {
      p.pbest_fitness = p.fitness;
      p.pbest = p.x;
    }
  }
  // Particle order decides between equal improvements.
  for (const Particle& p : swarm) {
    if (p.pbest_fitness < gbest.fitness) {
      gbest.fitness = p.pbest_fitness;
      gbest.x = p.pbest;
    }
  }
}

std::vector<double> evaluate_all(const Objective& objective,
                                 const std::vector<std::vector<double>>& points, int workers) {
  std::vector<double> out(points.size());
  std::vector<std::exception_ptr> errors(points.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t n = next.fetch_add(1); n < points.size(); n = next.fetch_add(1)) {
      try {
        out[n] = objective(points[n]);
      } catch (...) {
        errors[n] = std::current_exception();
      }
    }
  };
  const int n_threads = std::max(1, std::min<int>(workers, static_cast<int>(points.size())));
  if (n_threads == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(work);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  for (double& f : out)
    if (std::isnan(f)) f = std::numeric_limits<double>::infinity();
  return out;
}

namespace {

void evaluate_swarm(std::vector<Particle>& swarm, const Objective& objective, int workers) {
  std::vector<std::vector<double>> points;
  points.reserve(swarm.size());
  for (const Particle& p : swarm) points.push_back(p.x);
  const auto f = evaluate_all(objective, points, workers);
  for (std::size_t n = 0; n < swarm.size(); ++n) swarm[n].fitness = f[n];
}

}  // namespace

void pso_step(std::vector<Particle>& swarm, GlobalBest& gbest, const PsoParams& params,
              const Objective& objective, std::vector<std::mt19937_64>& streams) {
  if (streams.size() != swarm.size()) throw std::invalid_argument("pso_step: one stream per particle");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t d = params.dimension();
  std::vector<double> r1(d), r2(d);
  for (std::size_t n = 0; n < swarm.size(); ++n) {
    for (std::size_t i = 0; i < d; ++i) {
      r1[i] = unit(streams[n]);
      r2[i] = unit(streams[n]);
    }
    move_particle(swarm[n], gbest, params, r1, r2);
  }
  evaluate_swarm(swarm, objective, params.workers);
  update_bests(swarm, gbest);
}

PsoResult pso_minimize(const Objective& objective, const PsoParams& params) {
  params.validate();
  const std::size_t d = params.dimension();
  std::seed_seq seq{static_cast<std::uint32_t>(params.seed), static_cast<std::uint32_t>(params.seed >> 32)};
  std::vector<std::uint32_t> seeds(static_cast<std::size_t>(params.sizepop) * 2);
  seq.generate(seeds.begin(), seeds.end());
  std::vector<std::mt19937_64> streams;
  for (int n = 0; n < params.sizepop; ++n)
    streams.emplace_back((static_cast<std::uint64_t>(seeds[2 * n]) << 32) | seeds[2 * n + 1]);

  PsoResult result;
  result.swarm.resize(static_cast<std::size_t>(params.sizepop));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t n = 0; n < result.swarm.size(); ++n) {
    Particle& p = result.swarm[n];
    p.x.resize(d);
    p.v.resize(d);
    for (std::size_t i = 0; i < d; ++i) {
      p.x[i] = params.xmin[i] + unit(streams[n]) * (params.xmax[i] - params.xmin[i]);
      p.v[i] = params.vmin[i] + unit(streams[n]) * (params.vmax[i] - params.vmin[i]);
    }
    p.pbest = p.x;
  }
  evaluate_swarm(result.swarm, objective, params.workers);
  update_bests(result.swarm, result.best);
  result.trace.push_back(result.best.fitness);
  for (int gen = 0; gen < params.maxgen; ++gen) {
    pso_step(result.swarm, result.best, params, objective, streams);
    result.trace.push_back(result.best.fitness);
  }
  return result;
}

}  // namespace subflow
