#include <doctest.h>

#include <cmath>

#include "gen.hpp"
#include "subflow/kle.hpp"

using namespace subflow;
using testgen::rel;

namespace {

double analytic_cov(const Grid3D& g, const CovarianceSpec& c, std::size_t a, std::size_t b) {
  const CellIndex p = g.cell(a), q = g.cell(b);
  return c.variance * std::exp(-std::abs(p.i - q.i) * g.dx() / c.eta_x - std::abs(p.j - q.j) * g.dy() / c.eta_y -
                               std::abs(p.k - q.k) * g.dz() / c.eta_z);
}

}  // namespace

TEST_CASE("two-cell eigenvalues are variance (1 +- rho)") {
  const Grid3D g(2, 1, 1, 20.0, 1.0, 1.0);
  CovarianceSpec c;
  c.variance = 0.7;
  c.eta_x = 25.0;
  const KleBasis b = build_basis(g, c, 2);
  const double rho = std::exp(-10.0 / 25.0);
  CHECK(rel(b.eigenvalues(0), 0.7 * (1 + rho)) <= 1e-12);
  CHECK(rel(b.eigenvalues(1), 0.7 * (1 - rho)) <= 1e-12);
  // sign rule: first significant component positive
  CHECK(b.modes(0, 0) > 0.0);
  CHECK(b.modes(0, 1) > 0.0);
  CHECK(rel(b.total_variance, 1.4) <= 1e-15);
}

TEST_CASE("full basis reconstructs the covariance on 8x8x4") {
  const Grid3D g(8, 8, 4, 80.0, 120.0, 20.0);
  CovarianceSpec c;
  c.variance = 0.5;
  c.eta_x = 30.0;
  c.eta_y = 50.0;
  c.eta_z = 8.0;
  const int n = static_cast<int>(g.cell_count());
  const KleBasis b = build_basis(g, c, n);
  const Eigen::MatrixXd rec = b.modes * b.eigenvalues.asDiagonal() * b.modes.transpose();
  double worst = 0.0;
  for (std::size_t x = 0; x < g.cell_count(); ++x)
    for (std::size_t y = 0; y < g.cell_count(); ++y)
      worst = std::max(worst, std::abs(rec(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) -
                                       analytic_cov(g, c, x, y)));
  CHECK(worst <= 1e-8);
  CHECK(rel(energy_fraction(b, n), 1.0) <= 1e-12);
  // orthonormal under the plain dot product
  const Eigen::MatrixXd gram = b.modes.transpose() * b.modes;
  CHECK((gram - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("eigenvalues descend with deterministic tie order") {
  testgen::Gen gen(21);
  for (int t = 0; t < 10; ++t) {
    const Grid3D g = gen.grid(6);
    CovarianceSpec c;
    c.eta_x = c.eta_y = c.eta_z = gen.uniform(10.0, 200.0);
    const int m = static_cast<int>(g.cell_count());
    const KleBasis a = build_basis(g, c, m), b = build_basis(g, c, m);
    for (int i = 1; i < m; ++i) CHECK(a.eigenvalues(i) <= a.eigenvalues(i - 1));
    CHECK(a.eigenvalues(m - 1) >= 0.0);
    CHECK(a.axis_modes == b.axis_modes);
    CHECK(a.modes == b.modes);
  }
  // A cube with equal lengths has exactly tied x/y products; ties go to the larger x factor first.
  const Grid3D cube(4, 4, 1, 40.0, 40.0, 1.0);
  CovarianceSpec c;
  const KleBasis b = build_basis(cube, c, 16);
  for (int i = 1; i < 16; ++i) {
    if (b.eigenvalues(i) == b.eigenvalues(i - 1)) CHECK(b.axis_modes[i - 1].i < b.axis_modes[i].i);
  }
}

TEST_CASE("basis argument checks") {
  const Grid3D g(3, 3, 2, 30, 30, 10);
  CovarianceSpec c;
  CHECK_THROWS_AS(build_basis(g, c, 0), std::invalid_argument);
  CHECK_THROWS_AS(build_basis(g, c, 19), std::invalid_argument);
  c.variance = 0.0;
  CHECK_THROWS_AS(build_basis(g, c, 3), std::invalid_argument);
  c = {};
  c.eta_y = 0.0;
  CHECK_THROWS_AS(build_basis(g, c, 3), std::invalid_argument);
  const KleBasis b = build_basis(g, CovarianceSpec{}, 4);
  CHECK_THROWS_AS(energy_fraction(b, 0), std::out_of_range);
  CHECK_THROWS_AS(energy_fraction(b, 5), std::out_of_range);
}

TEST_CASE("sample_field basics") {
  const Grid3D g(5, 4, 3, 50, 40, 15);
  const CovarianceSpec c;
  const KleBasis b = build_basis(g, c, 6);
  SUBCASE("zero coefficients give the mean") {
    const auto z = sample_field(b, KleSample(6, 0.0), c);
    for (double v : z.values()) CHECK(v == 4.0);
    const auto k = permeability_from_lnk(z);
    CHECK(rel(units::m2_to_md(k[0]), std::exp(4.0)) <= 1e-12);
    CHECK(units::m2_to_md(k[0]) == doctest::Approx(54.598).epsilon(1e-4));
  }
  SUBCASE("unit vector picks one mode") {
    KleSample xi(6, 0.0);
    xi[0] = 1.0;
    const auto z = sample_field(b, xi, c);
    for (std::size_t n = 0; n < z.size(); ++n)
      CHECK(std::abs(z[n] - 4.0 - std::sqrt(b.eigenvalues(0)) * b.modes(static_cast<Eigen::Index>(n), 0)) <= 1e-12);
  }
  SUBCASE("variance rescaling") {
    const KleSample xi{0.3, -1.2, 0.8, 0.1, 2.0, -0.4};
    CovarianceSpec half = c;
    half.variance = c.variance / 4;
    const auto full = sample_field(b, xi, c), quarter = sample_field(b, xi, half);
    for (std::size_t n = 0; n < full.size(); ++n) CHECK(std::abs((quarter[n] - 4.0) * 2 - (full[n] - 4.0)) <= 1e-12);
    CovarianceSpec zero = c;
    zero.variance = 0.0;
    const auto mean_only = sample_field(b, xi, zero);
    for (double v : mean_only.values()) CHECK(v == 4.0);
    CovarianceSpec other = c;
    other.eta_x = 100.0;
    CHECK_THROWS_AS(sample_field(b, xi, other), std::invalid_argument);
  }
  CHECK_THROWS_AS(sample_field(b, KleSample(5, 0.0), c), std::invalid_argument);
}

TEST_CASE("draw_samples") {
  CHECK(draw_samples(7, 3, 4) == draw_samples(7, 3, 4));
  CHECK(draw_samples(7, 3, 4) != draw_samples(8, 3, 4));
  const auto one = draw_samples(1, 1, 13);
  CHECK(one.size() == 1u);
  CHECK(one[0].size() == 13u);
  const auto s = draw_samples(99, 2000, 13);
  for (int m = 0; m < 13; ++m) {
    double mean = 0.0;
    for (const auto& x : s) mean += x[static_cast<std::size_t>(m)];
    mean /= 2000.0;
    CHECK(std::abs(mean) <= 3.0 / std::sqrt(2000.0));
  }
  CHECK_THROWS(draw_samples(1, 0, 3));
}

TEST_CASE("empirical covariance approaches the truncated covariance") {
  const Grid3D g(4, 4, 2, 40, 40, 10);
  const CovarianceSpec c;
  const KleBasis b = build_basis(g, c, 8);
  const Eigen::MatrixXd target = b.modes * b.eigenvalues.asDiagonal() * b.modes.transpose();
  auto error_at = [&](int n) {
    const auto xi = draw_samples(5, n, 8);
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(32, 32);
    for (const auto& x : xi) {
      const auto z = sample_field(b, x, c);
      Eigen::VectorXd d(32);
      for (int k = 0; k < 32; ++k) d(k) = z[static_cast<std::size_t>(k)] - 4.0;
      acc += d * d.transpose();
    }
    return (acc / n - target).norm() / target.norm();
  };
  const double e_small = error_at(250), e_large = error_at(16000);
  // 64x more samples: error shrinks by roughly 8x; allow a wide margin.
  CHECK(e_large < e_small / 3.0);
  CHECK(e_large < 0.05);
}
