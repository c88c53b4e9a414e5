#include <doctest.h>

#include <cmath>

#include "gen.hpp"
#include "subflow/residual.hpp"
#include "subflow/simulator.hpp"

using namespace subflow;
using testgen::rel;

TEST_CASE("simulator output satisfies the PDE residual") {
  testgen::Gen gen(51);
  for (int t = 0; t < 25; ++t) {
    const Scenario s = gen.scenario(7, t % 2 == 0);
    const Solution sol = run(s);
    const PdeResidual r = pde_residual(s, sol.potential);
    CHECK(r.n_steps == s.n_steps);
    CHECK(r.values.size() == s.grid.cell_count() * static_cast<std::size_t>(s.n_steps));
    CHECK(r.max_relative() <= 10 * s.solver.tol_rel);
  }
}

TEST_CASE("constant potential without wells has zero residual") {
  testgen::Gen gen(52);
  Scenario s = gen.scenario(5);
  s.wells.clear();
  const std::vector<ScalarField3D> seq(3, ScalarField3D(s.grid, 3.3e7));
  const PdeResidual r = pde_residual(s, seq);
  for (double v : r.values) CHECK(v == 0.0);
}

TEST_CASE("single cell residual is linear in the error") {
  const Grid3D g(1, 1, 1, 10, 10, 10);
  WellSpec w;
  w.name = "W";
  w.control = RateControl{1e-4};
  Scenario s{g, FormationProps{}, ScalarField3D(g, 1e-13), {w}};
  s.n_steps = 1;
  s.solver.tol_rel = 1e-14;
  const Solution sol = run(s);
  const Discretization d(s);
  for (double delta : {1.0, -250.0, 1e4}) {
    std::vector<double> wrong(sol.potential[1].values().begin(), sol.potential[1].values().end());
    wrong[0] += delta;
    const double r = step_residual(d, sol.potential[0].values(), wrong)[0];
    const double expect = -(s.props.storage_coefficient() / s.dt) * delta;
    CHECK(std::abs(r - expect) <= 1e-9 * std::abs(expect) + 1e-12);
  }
}

TEST_CASE("residual perturbation equals a matrix column") {
  testgen::Gen gen(53);
  for (int t = 0; t < 10; ++t) {
    const Scenario s = gen.scenario(4, t % 2 == 1);
    const Discretization d(s);
    const SparseMatrix a = d.matrix();
    std::vector<double> old(s.grid.cell_count()), next(s.grid.cell_count());
    for (std::size_t c = 0; c < old.size(); ++c) {
      old[c] = gen.uniform(3e7, 4e7);
      next[c] = old[c] - gen.uniform(0, 1e5);
    }
    const auto base = step_residual(d, old, next);
    const std::size_t cell = static_cast<std::size_t>(gen.integer(0, static_cast<int>(old.size()) - 1));
    const double delta = 1234.5;
    auto moved = next;
    moved[cell] += delta;
    const auto r = step_residual(d, old, moved);
    const double v = d.cell_volume();
    double scale = 0.0;
    for (double x : base) scale = std::max(scale, std::abs(x));
    for (std::size_t c = 0; c < old.size(); ++c) {
      const double expect = -a.coeff(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(cell)) * delta / v;
      CHECK(std::abs((r[c] - base[c]) - expect) <= 1e-9 * (std::abs(expect) + scale));
    }
  }
}

TEST_CASE("data loss") {
  const Grid3D g(1, 1, 2, 1, 1, 1);
  const std::vector<ScalarField3D> ref{ScalarField3D(g, std::vector<double>{1.0, 2.0})};
  CHECK(data_loss(ref, ref) == 0.0);
  const std::vector<ScalarField3D> shifted{ScalarField3D(g, std::vector<double>{1.5, 2.5})};
  CHECK(data_loss(shifted, ref) == doctest::Approx(0.25));
  CHECK(data_loss(shifted, ref, Normalization::Sum) == doctest::Approx(0.5));
  const std::vector<ScalarField3D> diff{ScalarField3D(g, std::vector<double>{4.0, 6.0})};
  CHECK(data_loss(diff, ref, Normalization::Sum) == 25.0);
  CHECK(data_loss(diff, ref, Normalization::Mean) == 12.5);
  CHECK_THROWS(data_loss(diff, {}));
}

TEST_CASE("boundary loss") {
  const Grid3D g(4, 3, 2, 40, 30, 10);
  const ScalarField3D flat(g, 5.0);
  CHECK(bc_loss({flat}, BoundarySpec::no_flow()) == 0.0);

  const double slope = 0.3;
  ScalarField3D lin(g);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 2; ++k) lin(i, j, k) = slope * g.dx() * (i + 0.5);
  BoundarySpec low_x{{NeumannFace{Axis::X, Side::Low, 0.0}}, {}};
  CHECK(bc_loss({lin}, low_x) == doctest::Approx(slope * slope));
  CHECK(bc_loss({lin}, low_x, Normalization::Sum) == doctest::Approx(slope * slope * 6));
  // Both x faces, a second snapshot: the mean stays s^2.
  BoundarySpec both_x{{NeumannFace{Axis::X, Side::Low, 0.0}, NeumannFace{Axis::X, Side::High, 0.0}}, {}};
  CHECK(bc_loss({lin, lin}, both_x) == doctest::Approx(slope * slope));
  // Matching prescribed flux cancels.
  BoundarySpec matched{{NeumannFace{Axis::X, Side::High, slope}}, {}};
  CHECK(bc_loss({lin}, matched) == doctest::Approx(0.0));

  BoundarySpec dir{{}, {DirichletCell{{0, 0, 0}, 5.0}, DirichletCell{{3, 2, 1}, 5.0}}};
  CHECK(bc_loss({flat}, dir) == 0.0);
  dir.dirichlet[0].value = 7.0;
  CHECK(bc_loss({flat}, dir) == doctest::Approx(2.0));
  const Grid3D inner(3, 3, 3, 3, 3, 3);
  BoundarySpec bad{{}, {DirichletCell{{1, 1, 1}, 0.0}}};
  CHECK_THROWS_AS(bc_loss({ScalarField3D(inner)}, bad), std::invalid_argument);
}

TEST_CASE("hard initial condition") {
  testgen::Gen gen(54);
  for (int n = 0; n < 100; ++n) CHECK(hard_ic_transform(gen.uniform(-1e9, 1e9), 4.1e7, 0.0) == 4.1e7);
  CHECK(hard_ic_transform(0.0, 3.0, 1.0) == 0.0);
  CHECK(hard_ic_transform(1.0, 2.0, 0.5) == 0.5);
  const auto v = hard_ic_transform(std::vector<double>{1.0, 3.0}, 2.0, 0.5);
  CHECK(v == std::vector<double>{0.5, -0.5});
  CHECK_THROWS_AS(hard_ic_transform(0.0, 1.0, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(hard_ic_transform(0.0, 1.0, -0.1), std::invalid_argument);
}

TEST_CASE("total loss") {
  CHECK(total_loss(1, 2, 3, {1, 1, 1}) == 6.0);
  CHECK(total_loss(0, 0, 0, {10, 0.3, 0.3}) == 0.0);
  CHECK(total_loss(1, 1, 1, {10, 0.3, 0.3}) == doctest::Approx(10.6));
  CHECK_THROWS(total_loss(1, 1, 1, {-1, 1, 1}));
  testgen::Gen gen(55);
  for (int n = 0; n < 100; ++n) {
    const LossWeights w{gen.uniform(0, 10), gen.uniform(0, 10), gen.uniform(0, 10)};
    const double d = gen.uniform(0, 5), p = gen.uniform(0, 5), b = gen.uniform(0, 5), e = gen.uniform(0, 1);
    const double base = total_loss(d, p, b, w);
    CHECK(total_loss(d + e, p, b, w) >= base);
    CHECK(total_loss(d, p + e, b, w) >= base);
    CHECK(total_loss(d, p, b + e, w) >= base);
  }
  LossWeights bad{0, 0, 0};
  CHECK_THROWS(bad.validate());
}

TEST_CASE("loss report in scaled units") {
  testgen::Gen gen(56);
  const Scenario s = gen.scenario(4, true);
  const Solution sol = run(s);
  const ResidualReport r =
      evaluate_losses(s, sol.potential, {10, 0.3, 0.3}, BoundarySpec::no_flow(), &sol.potential);
  CHECK(r.data == 0.0);
  CHECK(r.n_k == 1);
  CHECK(r.n_t == s.n_steps);
  CHECK(r.n_tv == s.n_steps);
  CHECK(r.potential_scale == s.p_ref_top);
  CHECK(r.time_scale == s.horizon());
  CHECK(rel(r.residual_scale, s.horizon() * s.props.formation_factor /
                                  (s.props.porosity * s.props.compressibility * s.p_ref_top)) <= 1e-14);
  const PdeResidual raw = pde_residual(s, sol.potential);
  double sum = 0.0;
  for (std::size_t n = 0; n < raw.values.size(); ++n) {
    CHECK(rel(r.residual[n], raw.values[n] * r.residual_scale) <= 1e-14);
    sum += r.residual[n] * r.residual[n];
  }
  CHECK(rel(r.pde, sum / static_cast<double>(raw.values.size())) <= 1e-12);
  CHECK(rel(r.total, 10 * r.data + 0.3 * r.pde + 0.3 * r.bc) <= 1e-14);
  CHECK(r.max_relative_residual <= 10 * s.solver.tol_rel);

  const ResidualReport no_ref = evaluate_losses(s, sol.potential, {1, 1, 1}, BoundarySpec::no_flow());
  CHECK(no_ref.n_k == 0);
  CHECK(no_ref.data == 0.0);
}
