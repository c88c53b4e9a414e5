#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <vector>

namespace subflow {

/// Synchronous global-best PSO settings. Bounds are per dimension.
struct PsoParams {
  double omega = 0.9;
  double c1 = 2.0;
  double c2 = 2.0;
  int maxgen = 50;
  int sizepop = 20;
  std::vector<double> vmin, vmax;
  std::vector<double> xmin, xmax;
  std::uint64_t seed = 1;
  int workers = 1;   // concurrent fitness evaluations per generation

  /// Same bounds on every dimension.
  static PsoParams uniform(std::size_t dim, double xmin, double xmax, double vmin, double vmax);

  std::size_t dimension() const { return xmin.size(); }
  void validate() const;
};

struct Particle {
  std::vector<double> x;
  std::vector<double> v;
  std::vector<double> pbest;
  double fitness = std::numeric_limits<double>::infinity();
  double pbest_fitness = std::numeric_limits<double>::infinity();
};

struct GlobalBest {
  std::vector<double> x;
  double fitness = std::numeric_limits<double>::infinity();
};

using Objective = std::function<double(std::span<const double>)>;

/// v' = omega v + c1 r1 (pbest - x) + c2 r2 (gbest - x), clamped to [vmin, vmax];
/// x' = x + v' clamped to [xmin, xmax].
void move_particle(Particle& p, const GlobalBest& gbest, const PsoParams& params,
                   std::span<const double> r1, std::span<const double> r2);

/// Replaces pbest / gbest only on strict improvement (ties keep the incumbent).
void update_bests(std::vector<Particle>& swarm, GlobalBest& gbest);

/// One generation: move every particle with fresh uniform draws from its own
/// stream, evaluate the objective (possibly concurrently), update the bests.
void pso_step(std::vector<Particle>& swarm, GlobalBest& gbest, const PsoParams& params,
              const Objective& objective, std::vector<std::mt19937_64>& streams);

struct PsoResult {
  GlobalBest best;
  std::vector<double> trace;   // best fitness after initialization and after each generation
  std::vector<Particle> swarm;
};

/// Random initial population inside the bounds, then maxgen generations.
PsoResult pso_minimize(const Objective& objective, const PsoParams& params);

/// Evaluates objective on every point, using up to `workers` threads.
std::vector<double> evaluate_all(const Objective& objective,
                                 const std::vector<std::vector<double>>& points, int workers);

}  // namespace subflow
