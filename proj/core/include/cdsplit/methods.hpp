#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cdsplit/cde.hpp"
#include "cdsplit/conformal.hpp"
#include "cdsplit/datasets.hpp"
#include "cdsplit/knn.hpp"
#include "cdsplit/partition.hpp"
#include "cdsplit/scores.hpp"

namespace cdsplit {

/// The seven method names understood by configs and the CLI.
std::vector<std::string> method_names();

/// A method as configured: its score, and for cd-split its partition.
/// `cd-split+` is accepted as shorthand for cd-split with a profile partition.
struct MethodSpec {
  std::string label;  ///< name written to reports
  ScoreKind score = ScoreKind::kCd;
  PartitionKind partition = PartitionKind::kUnitary;
  std::size_t J = 0;  ///< 0: ceil(n_calibration / 100)
};

/// Throws ConfigError for unknown names, or a partition given to a method
/// that has none.
MethodSpec make_method(const std::string& name, std::optional<std::string> partition = std::nullopt,
                       std::size_t J = 0);

/// Default partition size: ceil(n / 100), at least 1.
std::size_t default_partition_size(std::size_t n_calibration);

struct CdeSettings {
  bool oracle = false;  ///< use the scenario's true law instead of kNN
  std::size_t k = 100;
  double bandwidth = 0.3;
  std::size_t grid_points = 1000;
  double grid_pad = 0.25;
  std::size_t regression_k = 100;  ///< neighbours for the regression baselines
};

/// Models fitted once on the training split and shared by every method of a
/// replication, plus lazily filled per-point caches over both splits.
/// Not thread-safe; use one per replication.
class Workbench {
 public:
  /// `scenario` is required when settings.oracle is set.
  Workbench(Dataset train, Dataset calibration, const CdeSettings& settings, double alpha,
            const Scenario* scenario = nullptr);

  bool discrete() const noexcept { return discrete_; }
  double alpha() const noexcept { return alpha_; }
  const Dataset& train() const noexcept { return train_; }
  const Dataset& calibration() const noexcept { return calibration_; }

  const ConditionalDensityModel& density_model() const;
  const ConditionalPmfModel& pmf_model() const;
  const KnnRegressor& regressor();

  const std::vector<DensityGrid>& train_densities();
  const std::vector<DensityGrid>& calibration_densities();
  const std::vector<Pmf>& train_pmfs();
  const std::vector<Pmf>& calibration_pmfs();
  const std::vector<LocalSummary>& calibration_summaries();

  /// Density maxima of the training points; sets the shared profile z-grid.
  const std::vector<double>& profile_z_grid();

 private:
  Dataset train_;
  Dataset calibration_;
  CdeSettings settings_;
  double alpha_;
  bool discrete_;
  std::shared_ptr<const ConditionalDensityModel> density_model_;
  std::shared_ptr<const ConditionalPmfModel> pmf_model_;
  std::unique_ptr<KnnRegressor> regressor_;
  std::optional<std::vector<DensityGrid>> train_densities_;
  std::optional<std::vector<DensityGrid>> calibration_densities_;
  std::optional<std::vector<Pmf>> train_pmfs_;
  std::optional<std::vector<Pmf>> calibration_pmfs_;
  std::optional<std::vector<LocalSummary>> calibration_summaries_;
  std::optional<std::vector<double>> z_grid_;
};

/// What a fitted method needs to know about one query point. Fields the
/// method does not use may be left null.
struct QueryPoint {
  std::span<const double> x;
  const DensityGrid* density = nullptr;
  const Pmf* pmf = nullptr;
  const LocalSummary* local = nullptr;
};

struct Prediction {
  PredictionRegion region;
  std::size_t element = 0;
};

/// A split-conformal predictor: partition built on the training split,
/// cutoffs calibrated on the calibration split. Immutable once fitted.
class FittedMethod {
 public:
  const MethodSpec& spec() const noexcept { return spec_; }
  const PartitionModel& partition() const noexcept { return partition_; }
  const CalibrationTable& table() const noexcept { return table_; }
  std::vector<std::string> warnings() const;

  /// Partition element of a query point.
  std::size_t element_of(const QueryPoint& q) const;
  Prediction predict(const QueryPoint& q) const;

  /// Which query fields predict() reads.
  bool needs_density() const noexcept;
  bool needs_local() const noexcept;

 private:
  friend FittedMethod fit_method(const MethodSpec&, Workbench&, std::uint64_t);

  MethodSpec spec_;
  double alpha_ = 0.1;
  bool discrete_ = false;
  PartitionModel partition_;
  CalibrationTable table_;
  std::vector<double> z_grid_;
};

/// Builds the partition (seeded by `seed`) and calibrates. Throws ConfigError
/// for methods that do not apply to the task (e.g. reg-split on labels).
FittedMethod fit_method(const MethodSpec& spec, Workbench& bench, std::uint64_t seed);

}  // namespace cdsplit
