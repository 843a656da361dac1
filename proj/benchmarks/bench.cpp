#include <benchmark/benchmark.h>

#include <vector>

#include "cdsplit/cde.hpp"
#include "cdsplit/experiment.hpp"
#include "cdsplit/kmeans.hpp"
#include "cdsplit/partition.hpp"

using namespace cdsplit;

namespace {

Dataset training(std::size_t n, std::size_t d) {
  Scenario s;
  s.kind = ScenarioKind::kBimodal;
  s.d = d;
  return generate(s, n, 1);
}

}  // namespace

static void BM_KnnEvaluate(benchmark::State& state) {
  const Dataset train = training(1000, static_cast<std::size_t>(state.range(0)));
  const auto grid = std::make_shared<const TargetGrid>(TargetGrid::spanning(train.targets()));
  const auto model = fit_knn_kernel(train, 100, 0.3, grid);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(model->evaluate(train.features(i++ % train.size())));
  }
}
BENCHMARK(BM_KnnEvaluate)->Arg(1)->Arg(20);

static void BM_LevelQuantile(benchmark::State& state) {
  const Dataset train = training(1000, 1);
  const auto grid = std::make_shared<const TargetGrid>(TargetGrid::spanning(train.targets()));
  const DensityGrid d = fit_knn_kernel(train, 100, 0.3, grid)->evaluate(train.features(0));
  for (auto _ : state) benchmark::DoNotOptimize(level_quantile(d, 0.1));
}
BENCHMARK(BM_LevelQuantile);

static void BM_LevelCdfInverse(benchmark::State& state) {
  Scenario s;
  const auto grid = std::make_shared<const TargetGrid>(TargetGrid::uniform(-8.0, 8.0, kOracleGridPoints));
  const DensityGrid d = oracle_density(s, std::vector<double>(s.d, 0.0), grid);
  for (auto _ : state) benchmark::DoNotOptimize(level_cdf_inverse(d, 0.1));
}
BENCHMARK(BM_LevelCdfInverse);

static void BM_ProfileKMeans(benchmark::State& state) {
  const Dataset train = training(1000, 1);
  const auto grid = std::make_shared<const TargetGrid>(TargetGrid::spanning(train.targets()));
  const auto model = fit_knn_kernel(train, 100, 0.3, grid);
  const auto z = make_z_grid(1.0);
  std::vector<ProfileVector> profiles;
  for (std::size_t i = 0; i < train.size(); ++i) profiles.push_back(make_profile(model->evaluate(train.features(i)), z));
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_profile_partition(profiles, z, static_cast<std::size_t>(state.range(0)), 7));
  }
}
BENCHMARK(BM_ProfileKMeans)->Arg(10)->Arg(50);

static void BM_Replication(benchmark::State& state) {
  const ExperimentConfig c = parse_config(R"({"scenario": "bimodal", "n": 2000, "replications": 1,
    "test_size": 500, "methods": ["cd-split+", "hpd-split", "reg-split"]})");
  const Setting setting = expand_settings(c).front();
  std::size_t rep = 0;
  for (auto _ : state) benchmark::DoNotOptimize(run_replication(c, setting, 0, rep++));
}
BENCHMARK(BM_Replication)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
