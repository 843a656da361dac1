#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "cdsplit/cde.hpp"
#include "cdsplit/error.hpp"
#include "cdsplit/partition.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace cdsplit;

namespace {

const GridPtr& wide_grid() {
  static const GridPtr g = oracle::uniform_grid(-40.0, 45.0, 8501);
  return g;
}

DensityGrid normal_density(double mu, double sd) {
  return oracle::sampled(wide_grid(), [=](double y) { return oracle::phi(y, mu, sd); });
}

// Closed-form level cdf of N(mu, sd^2): P(|Y - mu| >= t) with phi_sd(t) = z.
double normal_level_cdf(double z, double sd) {
  const double peak = 1.0 / (sd * std::sqrt(2.0 * M_PI));
  if (z <= 0.0) return 0.0;
  if (z >= peak) return 1.0;
  const double t = std::sqrt(-2.0 * std::log(z / peak));
  return 2.0 * (1.0 - oracle::Phi(t));
}

std::vector<double> point(std::size_t d, double x1) {
  std::vector<double> x(d, 0.0);
  x[0] = x1;
  return x;
}

}  // namespace

TEST_CASE("profile vectors are level cdfs") {
  const auto z = make_z_grid(oracle::phi(0.0));
  const ProfileVector p = make_profile(normal_density(0.0, 1.0), z);
  REQUIRE(p.size() == z.size());
  CHECK(p.values.back() == doctest::Approx(1.0).epsilon(1e-6));
  for (std::size_t i = 1; i < p.size(); ++i) CHECK(p.values[i] >= p.values[i - 1]);
}

TEST_CASE("location family profiles coincide") {
  const auto z = make_z_grid(oracle::phi(0.0));
  const ProfileVector a = make_profile(normal_density(0.0, 1.0), z);
  for (double mu : {0.37, 2.0, 5.0, -7.25}) {
    const ProfileVector b = make_profile(normal_density(mu, 1.0), z);
    CHECK(profile_distance(a, b, z) <= 1e-4);
  }
  CHECK(profile_distance(a, a, z) == 0.0);
}

TEST_CASE("scale family profile distance matches quadrature") {
  const auto z = make_z_grid(oracle::phi(0.0));
  const double d = profile_distance(make_profile(normal_density(0.0, 1.0), z),
                                    make_profile(normal_density(0.0, 2.0), z), z);
  const double top = z.back();
  // The integrand has square-root kinks at both peaks; split the range there.
  auto sq = [](double zz) {
    const double diff = normal_level_cdf(zz, 1.0) - normal_level_cdf(zz, 2.0);
    return diff * diff;
  };
  const double p1 = oracle::phi(0.0);
  const double p2 = oracle::phi(0.0, 0.0, 2.0);
  const double truth = std::sqrt(oracle::simpson(sq, 0.0, p2, 200000) + oracle::simpson(sq, p2, p1, 200000) +
                                 oracle::simpson(sq, p1, top, 2000));
  CHECK(d > 0.0);
  CHECK(std::abs(d - truth) <= 1e-3);
}

TEST_CASE("profile distance is a pseudometric") {
  Scenario s;
  s.kind = ScenarioKind::kBimodal;
  s.d = 1;
  const GridPtr g = oracle::uniform_grid(-12.0, 12.0, 1201);
  const auto z = make_z_grid(0.9);
  Philox4x32 rng(77, 0);
  auto random_profile = [&] {
    return make_profile(oracle_density(s, point(1, -1.5 + 3.0 * rng.uniform01()), g), z);
  };
  for (int t = 0; t < 100; ++t) {
    const ProfileVector a = random_profile();
    const ProfileVector b = random_profile();
    const ProfileVector c = random_profile();
    const double ab = profile_distance(a, b, z);
    const double ba = profile_distance(b, a, z);
    const double bc = profile_distance(b, c, z);
    const double ac = profile_distance(a, c, z);
    CHECK(ab >= 0.0);
    CHECK(std::abs(ab - ba) <= 1e-9);
    CHECK(ac <= ab + bc + 1e-9);
    CHECK(profile_distance(a, a, z) <= 1e-9);
  }
  ProfileVector short_one{{0.0, 1.0}};
  CHECK_THROWS_AS(profile_distance(short_one, random_profile(), z), UsageError);
}

TEST_CASE("threshold partitions") {
  const std::vector<double> four = {1.0, 2.0, 3.0, 4.0};
  const PartitionModel one = build_threshold_partition(four, 1, ThresholdMode::kQuantile, 1);
  CHECK(one.size() == 1);
  CHECK(one.assign(-1e300) == 0);
  CHECK(one.assign(1e300) == 0);

  const PartitionModel two = build_threshold_partition(four, 2, ThresholdMode::kQuantile, 1);
  REQUIRE(two.size() == 2);
  REQUIRE(two.breakpoints().size() == 1);
  CHECK(two.breakpoints()[0] == doctest::Approx(2.5));
  CHECK(two.assign(2.0) == 0);
  CHECK(two.assign(3.0) == 1);

  std::vector<double> grouped;
  for (double c : {0.1, 0.5, 0.9}) {
    for (int i = 0; i < 20; ++i) grouped.push_back(c + 0.001 * i);
  }
  const PartitionModel km = build_threshold_partition(grouped, 3, ThresholdMode::kKMeans1d, 9);
  REQUIRE(km.size() == 3);
  for (std::size_t g = 0; g < 3; ++g) {
    for (std::size_t i = 0; i < 20; ++i) CHECK(km.assign(grouped[g * 20 + i]) == g);
  }

  const PartitionModel reduced = build_threshold_partition(four, 10, ThresholdMode::kQuantile, 1);
  CHECK(reduced.size() <= 4);
  CHECK_FALSE(reduced.warnings.empty());
  CHECK_THROWS_AS(two.assign(ProfileVector{{0.0, 1.0}}), UsageError);
}

TEST_CASE("profile partitions") {
  const auto z = make_z_grid(oracle::phi(0.0));
  std::vector<ProfileVector> profiles;
  Philox4x32 rng(4, 4);
  // Three groups: N(0,1), N(0,9), N(5,1), each with a little scale jitter.
  for (const auto [mu, sd] : {std::pair{0.0, 1.0}, std::pair{0.0, 3.0}, std::pair{5.0, 1.0}}) {
    for (int i = 0; i < 10; ++i) {
      profiles.push_back(make_profile(normal_density(mu, sd * (1.0 + 0.01 * rng.uniform01())), z));
    }
  }
  // Pairwise distances predict the grouping.
  CHECK(profile_distance(profiles[0], profiles[20], z) < 0.01);
  CHECK(profile_distance(profiles[0], profiles[10], z) > 0.05);

  const PartitionModel j1 = build_profile_partition(profiles, z, 1, 3);
  for (const auto& p : profiles) CHECK(j1.assign(p) == 0);

  const PartitionModel j2 = build_profile_partition(profiles, z, 2, 3);
  REQUIRE(j2.size() == 2);
  const std::size_t unit = j2.assign(profiles[0]);
  const std::size_t wide = j2.assign(profiles[10]);
  CHECK(unit != wide);
  for (int i = 0; i < 10; ++i) {
    CHECK(j2.assign(profiles[i]) == unit);
    CHECK(j2.assign(profiles[10 + i]) == wide);
    CHECK(j2.assign(profiles[20 + i]) == unit);
  }

  const PartitionModel all = build_profile_partition(profiles, z, profiles.size(), 3);
  std::set<std::size_t> seen;
  for (const auto& p : profiles) seen.insert(all.assign(p));
  CHECK(seen.size() == profiles.size());

  // A centroid queried as a profile maps to itself.
  const std::size_t m = j2.centroid_dim();
  for (std::size_t j = 0; j < j2.size(); ++j) {
    ProfileVector c;
    c.values.assign(j2.centroids().begin() + static_cast<long>(j * m),
                    j2.centroids().begin() + static_cast<long>((j + 1) * m));
    CHECK(j2.assign(c) == j);
  }
  // Centroids are actual training profiles.
  for (std::size_t j = 0; j < j2.size(); ++j) {
    bool found = false;
    for (const auto& p : profiles) {
      found = found || std::equal(p.values.begin(), p.values.end(), j2.centroids().begin() + static_cast<long>(j * m));
    }
    CHECK(found);
  }
  CHECK_THROWS_AS(j2.assign(0.5), UsageError);
}

TEST_CASE("irrelevant features move Euclidean cells but not profile cells") {
  Scenario s;
  s.d = 3;
  const GridPtr g = oracle::uniform_grid(-8.0, 8.0, 801);
  const OracleCde o(s, g);
  const Dataset train = generate(s, 300, 8);
  const auto z = make_z_grid(0.45);
  std::vector<ProfileVector> profiles;
  for (std::size_t i = 0; i < train.size(); ++i) profiles.push_back(make_profile(o.evaluate(train.features(i)), z));
  const PartitionModel prof = build_profile_partition(profiles, z, 6, 1);
  const PartitionModel eucl = build_euclidean_partition(train.feature_matrix(), 3, 6, 1);

  Philox4x32 rng(10, 10);
  std::size_t euclid_moves = 0;
  for (int t = 0; t < 200; ++t) {
    std::vector<double> x = {-1.5 + 3.0 * rng.uniform01(), -1.5 + 3.0 * rng.uniform01(), -1.5 + 3.0 * rng.uniform01()};
    std::vector<double> shifted = x;
    shifted[1] = -1.5 + 3.0 * rng.uniform01();
    shifted[2] = -1.5 + 3.0 * rng.uniform01();
    CHECK(prof.assign(make_profile(o.evaluate(x), z)) == prof.assign(make_profile(o.evaluate(shifted), z)));
    if (eucl.assign(std::span<const double>(x)) != eucl.assign(std::span<const double>(shifted))) ++euclid_moves;
  }
  CHECK(euclid_moves > 0);
}

TEST_CASE("partition names") {
  for (auto k : {PartitionKind::kUnitary, PartitionKind::kThresholdQuantile, PartitionKind::kThresholdKMeans,
                 PartitionKind::kProfileVoronoi, PartitionKind::kEuclideanVoronoi}) {
    CHECK(parse_partition_kind(to_string(k)) == k);
  }
  CHECK_THROWS_AS(parse_partition_kind("hexagonal"), ConfigError);
  CHECK(PartitionModel::unitary().assign(123.0) == 0);
}
