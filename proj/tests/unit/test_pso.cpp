#include <doctest.h>

#include <cmath>

#include "gen.hpp"
#include "subflow/inversion.hpp"
#include "subflow/pso.hpp"

using namespace subflow;
using testgen::rel;

namespace {

double sphere(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

Particle particle(double x, double v, double pbest) {
  Particle p;
  p.x = {x};
  p.v = {v};
  p.pbest = {pbest};
  return p;
}

}  // namespace

TEST_CASE("single particle update by hand") {
  PsoParams p = PsoParams::uniform(1, -10, 10, -5, 5);
  p.omega = 0.5;
  p.c1 = 1.0;
  p.c2 = 1.0;
  const std::vector<double> half{0.5};

  // 0.09 + 1.0 + 1.0 = 2.09, clamped to 1.
  Particle t = particle(1.0, 0.1, 2.0);
  PsoParams table = PsoParams::uniform(1, -4, 4, -1, 1);
  move_particle(t, GlobalBest{{3.0}, 0.0}, table, std::vector<double>{0.5}, std::vector<double>{0.25});
  CHECK(t.v[0] == 1.0);
  CHECK(t.x[0] == 2.0);

  // v' = 0.5*1 + 0.5*(1-0) + 0.5*(3-0) = 2.5, clamped to 2 by vmax.
  Particle a = particle(0.0, 1.0, 1.0);
  PsoParams tight = p;
  tight.vmax = {2.0};
  move_particle(a, GlobalBest{{3.0}, 0.0}, tight, half, half);
  CHECK(a.v[0] == 2.0);
  CHECK(a.x[0] == 2.0);

  // Inertia only.
  Particle b = particle(1.0, 2.0, 0.0);
  PsoParams inertia = p;
  inertia.c1 = inertia.c2 = 0.0;
  move_particle(b, GlobalBest{{7.0}, 0.0}, inertia, half, half);
  CHECK(b.v[0] == 1.0);
  CHECK(b.x[0] == 2.0);

  // No attraction when the particle sits on both bests.
  Particle c = particle(4.0, 0.0, 4.0);
  move_particle(c, GlobalBest{{4.0}, 0.0}, p, half, half);
  CHECK(c.v[0] == 0.0);
  CHECK(c.x[0] == 4.0);

  // Position clamp.
  Particle d = particle(9.5, 5.0, 9.5);
  move_particle(d, GlobalBest{{9.5}, 0.0}, p, half, half);
  CHECK(d.v[0] == 2.5);
  CHECK(d.x[0] == 10.0);
}

TEST_CASE("three generations of one particle against a hand iteration") {
  PsoParams p = PsoParams::uniform(1, -10, 10, -100, 100);
  p.omega = 0.7;
  p.c1 = 1.5;
  p.c2 = 0.0;
  std::vector<Particle> swarm{particle(3.0, -1.0, 3.0)};
  swarm[0].fitness = swarm[0].pbest_fitness = 9.0;
  GlobalBest gbest{{3.0}, 9.0};
  std::vector<std::mt19937_64> streams{std::mt19937_64(77)};
  std::mt19937_64 mirror(77);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  double x = 3.0, v = -1.0, pb = 3.0, pbf = 9.0;
  for (int gen = 0; gen < 3; ++gen) {
    const double r1 = unit(mirror);
    unit(mirror);
    v = 0.7 * v + 1.5 * r1 * (pb - x);
    x += v;
    if (x * x < pbf) {
      pbf = x * x;
      pb = x;
    }
    pso_step(swarm, gbest, p, sphere, streams);
    CHECK(swarm[0].v[0] == v);
    CHECK(swarm[0].x[0] == x);
    CHECK(swarm[0].pbest[0] == pb);
    CHECK(gbest.fitness == pbf);
  }
}

TEST_CASE("strict improvement keeps the incumbent on ties") {
  std::vector<Particle> swarm{particle(1.0, 0.0, 5.0), particle(-1.0, 0.0, -1.0)};
  swarm[0].fitness = 1.0;
  swarm[0].pbest_fitness = 1.0;
  swarm[1].fitness = 1.0;
  swarm[1].pbest_fitness = 2.0;
  GlobalBest g{{5.0}, 1.0};
  update_bests(swarm, g);
  CHECK(swarm[0].pbest[0] == 5.0);
  CHECK(swarm[1].pbest[0] == -1.0);
  CHECK(swarm[1].pbest_fitness == 1.0);
  CHECK(g.x[0] == 5.0);
}

TEST_CASE("swarm invariants") {
  testgen::Gen gen(71);
  for (int t = 0; t < 20; ++t) {
    const std::size_t d = static_cast<std::size_t>(gen.integer(1, 6));
    PsoParams p;
    for (std::size_t i = 0; i < d; ++i) {
      const double lo = gen.uniform(-5, 0), hi = lo + gen.uniform(0.5, 5);
      p.xmin.push_back(lo);
      p.xmax.push_back(hi);
      p.vmin.push_back(-0.3 * (hi - lo));
      p.vmax.push_back(0.3 * (hi - lo));
    }
    p.omega = gen.uniform(0.2, 1.0);
    p.c1 = gen.uniform(0, 2.5);
    p.c2 = gen.uniform(0, 2.5);
    p.sizepop = gen.integer(2, 12);
    p.maxgen = gen.integer(1, 15);
    p.seed = static_cast<std::uint64_t>(gen.integer(1, 1000));
    const auto shifted = [&](std::span<const double> x) {
      double s = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) s += std::abs(x[i] - 0.25);
      return s;
    };
    const PsoResult r = pso_minimize(shifted, p);
    CHECK(r.trace.size() == static_cast<std::size_t>(p.maxgen) + 1);
    for (std::size_t n = 1; n < r.trace.size(); ++n) CHECK(r.trace[n] <= r.trace[n - 1]);
    CHECK(r.best.fitness == r.trace.back());
    CHECK(shifted(r.best.x) == r.best.fitness);
    for (const Particle& q : r.swarm) {
      CHECK(q.pbest_fitness >= r.best.fitness);
      for (std::size_t i = 0; i < d; ++i) {
        CHECK(q.x[i] >= p.xmin[i]);
        CHECK(q.x[i] <= p.xmax[i]);
        CHECK(q.v[i] >= p.vmin[i]);
        CHECK(q.v[i] <= p.vmax[i]);
      }
    }
    p.workers = 3;
    const PsoResult again = pso_minimize(shifted, p);
    CHECK(again.best.x == r.best.x);
    CHECK(again.trace == r.trace);
  }
}

TEST_CASE("sphere converges") {
  PsoParams p = PsoParams::uniform(5, -4, 4, -1, 1);
  p.omega = 0.7;
  p.c1 = p.c2 = 1.5;
  p.sizepop = 30;
  p.maxgen = 200;
  p.seed = 3;
  const PsoResult r = pso_minimize(sphere, p);
  CHECK(r.best.fitness < 1e-6);
  p.seed = 4;
  CHECK(pso_minimize(sphere, p).best.x != r.best.x);
}

TEST_CASE("parameter validation and error propagation") {
  PsoParams p = PsoParams::uniform(2, -1, 1, -1, 1);
  CHECK_NOTHROW(p.validate());
  p.sizepop = 1;
  CHECK_THROWS(p.validate());
  p = PsoParams::uniform(2, 1, 1, -1, 1);
  CHECK_THROWS(p.validate());
  p = PsoParams::uniform(2, -1, 1, -1, 1);
  p.vmax.pop_back();
  CHECK_THROWS(p.validate());
  p = PsoParams::uniform(2, -1, 1, -1, 1);
  p.workers = 2;
  CHECK_THROWS_AS(pso_minimize([](std::span<const double>) -> double { throw std::runtime_error("x"); }, p),
                  std::runtime_error);
  const auto f = evaluate_all([](std::span<const double>) { return std::nan(""); }, {{0.0}}, 1);
  CHECK(std::isinf(f[0]));
}

TEST_CASE("fitness value") {
  FitnessSpec spec;
  spec.w_rate = 1;
  spec.w_perm = 1000;
  spec.w_bhp = 10;
  spec.observed.rate = {{50, 50}, {50, 50}};
  spec.observed.bhp = {{300, 310}, {320, 330}};
  spec.observed.perm = {{4, 4.5}, {3.5, 4}};
  CHECK(fitness_value(spec.observed, spec) == 0.0);

  WellObservations pred = spec.observed;
  for (auto& w : pred.rate)
    for (double& q : w) q += 1.0;
  CHECK(fitness_value(pred, spec) == 1.0);
  pred = spec.observed;
  pred.perm[0][0] += 0.1;
  CHECK(fitness_value(pred, spec) == doctest::Approx(1000 * 0.01 / 4));
  pred = spec.observed;
  pred.bhp[1][1] -= 2.0;
  CHECK(fitness_value(pred, spec) == doctest::Approx(10 * 4.0 / 4));

  pred.rate.pop_back();
  CHECK_THROWS_AS(fitness_value(pred, spec), std::invalid_argument);
  spec.w_bhp = -1;
  CHECK_THROWS_AS(fitness_value(spec.observed, spec), std::invalid_argument);
}

TEST_CASE("search vector layout") {
  const Grid3D g(6, 6, 2, 60, 60, 10);
  InverseProblem prob{Scenario{g, FormationProps{}, ScalarField3D(g, 1e-13), {}}};
  prob.n_modes = 3;
  prob.prior.variance = 0.5;
  const std::vector<double> x{0.1, -0.2, 0.3, 0.8, 150.0};
  CHECK_THROWS_AS(decode_candidate(prob, x), std::invalid_argument);
  const Candidate known = decode_candidate(prob, std::span(x).first(3));
  CHECK(known.xi == KleSample{0.1, -0.2, 0.3});
  CHECK(known.cov.variance == 0.5);

  prob.mode = SearchMode::UnknownStats;
  CHECK(prob.search_dimension() == 5);
  const Candidate c = decode_candidate(prob, x);
  CHECK(c.cov.variance == 0.8);
  CHECK(c.cov.eta_x == 150.0);
  CHECK(c.cov.eta_z == 150.0);
  const std::vector<double> neg{0, 0, 0, -0.1, 140.0};
  CHECK(decode_candidate(prob, neg).cov.variance == 0.0);

  PsoParams xi = PsoParams::uniform(3, -4, 4, -1, 1);
  const PsoParams full = search_params(prob, xi);
  CHECK(full.dimension() == 5u);
  CHECK(full.xmin[3] == 0.0);
  CHECK(full.xmax[3] == 1.0);
  CHECK(full.xmin[4] == 130.0);
  CHECK(full.xmax[4] == 190.0);
  CHECK(full.vmax[3] == doctest::Approx(0.125));
  CHECK(full.vmin[4] == doctest::Approx(-7.5));
  CHECK_THROWS(search_params(prob, PsoParams::uniform(4, -4, 4, -1, 1)));
  prob.mode = SearchMode::KnownStats;
  CHECK(search_params(prob, xi).dimension() == 3u);

  // Variance 0 gives the mean field without building a zero-variance basis.
  const BasisProvider bases(g, 3);
  const auto flat = candidate_field(decode_candidate(prob, std::vector<double>{1, 1, 1}),
                                    bases);
  CHECK(flat[0] != 4.0);
  Candidate zero = decode_candidate(prob, std::vector<double>{1, 1, 1});
  zero.cov.variance = 0.0;
  const auto mean_only = candidate_field(zero, bases);
  for (double v : mean_only.values()) CHECK(v == 4.0);
}

TEST_CASE("small inversion recovers a known field") {
  const Grid3D g(7, 7, 2, 70, 70, 10, 1000);
  std::vector<WellSpec> wells;
  for (auto [i, j] : {std::pair{1, 1}, {5, 1}, {1, 5}, {5, 5}, {3, 3}}) {
    WellSpec w;
    w.name = "P";
    w.i = i;
    w.j = j;
    w.k_top = 0;
    w.k_bot = 1;
    w.control = RateControl{units::m3_per_day_to_si(20.0)};
    wells.push_back(w);
  }
  InverseProblem prob{Scenario{g, FormationProps{}, ScalarField3D(g, 1e-13), wells}};
  prob.scenario.n_steps = 6;
  prob.scenario.dt = units::days_to_s(1.0);
  prob.n_modes = 2;
  prob.observed_steps = 3;
  prob.prior.eta_x = prob.prior.eta_y = prob.prior.eta_z = 60.0;
  prob.fitness.w_bhp = 10.0;

  const Candidate truth{{0.8, -0.6}, prob.prior};
  const SyntheticCase data = make_synthetic_case(prob, truth, 0.0, 1);
  prob.fitness.observed = data.observed;
  CHECK(data.solution.step_count() == 6);
  CHECK(data.observed.n_steps() == 3);

  PsoParams p = PsoParams::uniform(2, -3, 3, -1, 1);
  p.omega = 0.7;
  p.c1 = p.c2 = 1.5;
  p.sizepop = 16;
  p.maxgen = 40;
  p.seed = 5;
  const InversionResult r = invert(prob, p);
  CHECK(r.fitness < 1e-2);
  CHECK(std::abs(r.best.xi[0] - 0.8) < 0.1);
  CHECK(std::abs(r.best.xi[1] + 0.6) < 0.1);
  CHECK(r.trace.size() == 41u);
  CHECK(r.lnk.size() == g.cell_count());

  // Noise perturbs rates and BHPs only.
  const SyntheticCase noisy = make_synthetic_case(prob, truth, 0.1, 2);
  CHECK(noisy.observed.perm == data.observed.perm);
  CHECK(noisy.observed.rate != data.observed.rate);

  InverseProblem bad = prob;
  bad.observed_steps = 7;
  CHECK_THROWS_AS(invert(bad, p), std::invalid_argument);
}
