#include <doctest.h>

#include <set>

#include "gen.hpp"
#include "subflow/grid.hpp"
#include "subflow/units.hpp"

using namespace subflow;
using testgen::rel;

TEST_CASE("unit conversions round-trip") {
  testgen::Gen gen(11);
  for (int n = 0; n < 200; ++n) {
    const double x = gen.uniform(1e-6, 1e6);
    CHECK(rel(units::m2_to_md(units::md_to_m2(x)), x) <= 1e-12);
    CHECK(rel(units::pa_to_bar(units::bar_to_pa(x)), x) <= 1e-12);
    CHECK(rel(units::si_to_m3_per_day(units::m3_per_day_to_si(x)), x) <= 1e-12);
    CHECK(rel(units::pas_to_mpas(units::mpas_to_pas(x)), x) <= 1e-12);
    CHECK(rel(units::per_pa_to_per_bar(units::per_bar_to_per_pa(x)), x) <= 1e-12);
    CHECK(rel(units::s_to_days(units::days_to_s(x)), x) <= 1e-12);
  }
  CHECK(units::md_to_m2(1.0) == 9.869233e-16);
  CHECK(units::bar_to_pa(1.0) == 1e5);
  CHECK(units::days_to_s(1.0) == 86400.0);
}

TEST_CASE("grid geometry and validation") {
  const Grid3D g(60, 220, 10, 365.76, 670.56, 51.82, 3657.6);
  CHECK(g.dx() == doctest::Approx(6.096));
  CHECK(g.dy() == doctest::Approx(3.048));
  CHECK(g.dz() == doctest::Approx(5.182));
  CHECK(g.cell_count() == 132000u);
  CHECK(g.depth(0) == doctest::Approx(3657.6 + 2.591));
  CHECK(g.contains(59, 219, 9));
  CHECK_FALSE(g.contains(60, 0, 0));
  CHECK_FALSE(g.contains(0, -1, 0));
  CHECK_THROWS_AS(Grid3D(0, 1, 1, 1, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(Grid3D(1, 1, 1, 1, -1, 1), std::invalid_argument);
}

TEST_CASE("flat index is a k-fastest bijection") {
  testgen::Gen gen(12);
  for (int t = 0; t < 20; ++t) {
    const Grid3D g = gen.grid(6);
    std::set<std::size_t> seen;
    std::size_t expect = 0;
    for (int i = 0; i < g.nx(); ++i)
      for (int j = 0; j < g.ny(); ++j)
        for (int k = 0; k < g.nz(); ++k) {
          const std::size_t o = g.offset(i, j, k);
          CHECK(o == expect++);
          CHECK(g.cell(o) == CellIndex{i, j, k});
          seen.insert(o);
        }
    CHECK(seen.size() == g.cell_count());
  }
}

TEST_CASE("formation props validation") {
  FormationProps p;
  CHECK_NOTHROW(p.validate());
  p.porosity = 1.0;
  CHECK_THROWS(p.validate());
  p = {};
  p.viscosity = 0.0;
  CHECK_THROWS(p.validate());
  p = {};
  CHECK(p.storage_coefficient() == doctest::Approx(0.2 * 1e-9 / 1.02));
}

TEST_CASE("scalar field shape") {
  const Grid3D g(2, 3, 4, 1, 1, 1);
  CHECK(ScalarField3D(g, 1.5).size() == 24u);
  CHECK_THROWS_AS(ScalarField3D(g, std::vector<double>(23)), std::invalid_argument);
  ScalarField3D f(g);
  f(1, 2, 3) = 7.0;
  CHECK(f[g.offset(1, 2, 3)] == 7.0);
}

TEST_CASE("potential and pressure") {
  const FormationProps props;
  SUBCASE("uniform pressure in a datum layer gives potential = pressure") {
    const Grid3D g(2, 2, 1, 10, 10, 1e-9, 100.0);
    const ScalarField3D p(g, 3e7);
    const auto phi = potential_from_pressure(p, props);
    for (double v : phi.values()) CHECK(rel(v, 3e7) <= 1e-12);
  }
  SUBCASE("hydrostatic profile has uniform potential") {
    const Grid3D g(3, 2, 10, 365.76, 670.56, 51.82, 3657.6);
    const auto p = init_hydrostatic(g, props, 413.69e5);
    const auto phi = potential_from_pressure(p, props);
    for (double v : phi.values()) CHECK(rel(v, 413.69e5) <= 1e-12);
    // Top layer sits half a cell below the datum.
    CHECK(rel(p(0, 0, 0), 413.69e5 + props.oil_density * props.gravity * g.dz() / 2) <= 1e-12);
  }
  SUBCASE("zero density gives the reference pressure everywhere") {
    FormationProps light = props;
    light.oil_density = 0.0;
    const Grid3D g(2, 2, 5, 1, 1, 10);
    const auto p = init_hydrostatic(g, light, 2e7);
    for (double v : p.values()) CHECK(v == 2e7);
  }
  SUBCASE("round trip") {
    testgen::Gen gen(13);
    const Grid3D g = gen.grid();
    ScalarField3D p(g);
    for (double& v : p.values()) v = gen.uniform(1e6, 5e7);
    const auto back = pressure_from_potential(potential_from_pressure(p, props), props);
    for (std::size_t c = 0; c < p.size(); ++c) CHECK(rel(back[c], p[c]) <= 1e-12);
  }
  CHECK_THROWS(init_hydrostatic(Grid3D(1, 1, 1, 1, 1, 1), props, 0.0));
}
