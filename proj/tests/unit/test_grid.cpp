#include <cmath>
#include <vector>

#include "cdsplit/error.hpp"
#include "cdsplit/grid.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace cdsplit;

TEST_CASE("target grid validation") {
  CHECK_THROWS_AS(TargetGrid({1.0, 1.0, 2.0}), ConfigError);
  CHECK_THROWS_AS(TargetGrid({1.0}), ConfigError);
  CHECK_THROWS_AS(TargetGrid({2.0, 1.0}), ConfigError);
  CHECK_NOTHROW(TargetGrid({0.0, 0.5, 2.0}));
}

TEST_CASE("uniform and spanning grids") {
  const TargetGrid g = TargetGrid::uniform(-1.0, 1.0, 201);
  CHECK(g.size() == 201);
  CHECK(g.is_uniform());
  CHECK(g.step() == doctest::Approx(0.01));
  CHECK(g.front() == -1.0);
  CHECK(g.back() == 1.0);

  const std::vector<double> ys = {2.0, 0.0, 4.0};
  const TargetGrid s = TargetGrid::spanning(ys);
  CHECK(s.size() == 1000);
  CHECK(s.front() == doctest::Approx(-1.0));
  CHECK(s.back() == doctest::Approx(5.0));
}

TEST_CASE("cell lookup") {
  const TargetGrid g({0.0, 1.0, 3.0, 4.0});
  CHECK(g.cell(0.0) == 0);
  CHECK(g.cell(0.99) == 0);
  CHECK(g.cell(1.0) == 1);
  CHECK(g.cell(3.5) == 2);
  CHECK(g.cell(4.0) == 2);
}

TEST_CASE("trapezoid integration is exact for linear functions") {
  const TargetGrid g({0.0, 0.3, 1.0, 1.7, 2.0});
  std::vector<double> v;
  for (double y : g.points()) v.push_back(2.0 * y + 1.0);
  CHECK(g.integrate(v) == doctest::Approx(6.0));
}

TEST_CASE("density grid interpolation and normalization") {
  const auto g = oracle::uniform_grid(-8.0, 8.0, 1601);
  DensityGrid d = oracle::sampled(g, [](double y) { return 3.0 * oracle::phi(y); });
  CHECK(d.mass() == doctest::Approx(3.0).epsilon(1e-6));
  d.normalize();
  CHECK(d.mass() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(d.at(0.0) == doctest::Approx(oracle::phi(0.0)).epsilon(1e-4));
  CHECK(d.at(0.005) == doctest::Approx(0.5 * (d.values[800] + d.values[801])));
  CHECK(d.at(-9.0) == 0.0);
  CHECK(d.at(100.0) == 0.0);
  CHECK(d.max_value() == doctest::Approx(oracle::phi(0.0)).epsilon(1e-4));
}

TEST_CASE("density grid rejects bad values") {
  const auto g = oracle::uniform_grid(0.0, 1.0, 20);
  CHECK_THROWS_AS(DensityGrid(g, std::vector<double>(19, 1.0)), UsageError);
  std::vector<double> v(20, 1.0);
  v[3] = -0.1;
  CHECK_THROWS_AS(DensityGrid(g, v), UsageError);
  const auto tiny = oracle::uniform_grid(0.0, 1.0, 8);
  CHECK_THROWS_AS(DensityGrid(tiny, std::vector<double>(8, 1.0)), UsageError);
}

TEST_CASE("pmf normalization") {
  Pmf p{{2.0, 1.0, 1.0}};
  p.normalize();
  CHECK(p.at(0) == doctest::Approx(0.5));
  CHECK(p.at(2) == doctest::Approx(0.25));
  CHECK(p.at(7) == 0.0);
}
