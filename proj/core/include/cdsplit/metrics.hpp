#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "cdsplit/conformal.hpp"
#include "cdsplit/datasets.hpp"
#include "cdsplit/grid.hpp"

namespace cdsplit {

inline constexpr std::size_t kOracleGridPoints = 4001;
inline constexpr std::size_t kDefaultSscvBins = 5;

/// Everything the metrics need from the true law at one test point.
struct OracleReference {
  bool discrete = false;
  DensityGrid density;             ///< normalized, on a fine grid over the oracle support
  std::vector<double> cumulative;  ///< running integral of `density` at its grid points
  Pmf pmf;
  PredictionRegion hpd;            ///< oracle HPD set at the requested alpha
  std::uint32_t flags = kFlagNone;
};

OracleReference make_oracle_reference(const Scenario& scenario, std::span<const double> x, double alpha,
                                      std::size_t grid_points = kOracleGridPoints);

/// {y : f(y) >= q_alpha} for the level-cdf quantile computed exactly on the
/// interpolant, so its mass is 1 - alpha up to interpolation error.
PredictionRegion oracle_hpd_set(const DensityGrid& density, double alpha);

/// Integral of the density's linear interpolant over the region, divided by
/// the density's total mass. Parts of the region outside the grid add nothing.
double region_mass(const DensityGrid& density, const PredictionRegion& region);

/// P(Y in region | x) under the oracle.
double conditional_coverage(const PredictionRegion& region, const OracleReference& oracle);

double region_size(const PredictionRegion& region);

/// Lebesgue measure of the intersection / symmetric difference of two
/// interval unions.
double intersection_measure(const PredictionRegion& a, const PredictionRegion& b);
double symmetric_difference_measure(const PredictionRegion& a, const PredictionRegion& b);

/// Measure of region △ oracle HPD set.
double hpd_symmetric_difference(const PredictionRegion& region, const OracleReference& oracle);
double hpd_symmetric_difference(const PredictionRegion& region, const Scenario& scenario,
                                std::span<const double> x, double alpha);

/// Fraction of targets inside their region (closed endpoints). Throws
/// UsageError on a length mismatch or empty input.
double marginal_coverage(std::span<const PredictionRegion> regions, std::span<const double> targets);

/// Mean over test rows of |P(Y in C(x) | x) - (1 - alpha)|.
double conditional_coverage_deviation(std::span<const PredictionRegion> regions, const Dataset& test_points,
                                      const Scenario& scenario, double alpha);

struct SscvResult {
  double value = 0.0;
  std::size_t bins = 0;  ///< bins actually used
  std::vector<std::string> warnings;
};

/// Size-stratified coverage violation: points sorted by region size (ties by
/// position) are cut into `n_bins` equal-count bins; the result is the largest
/// |bin coverage - (1 - alpha)|. With fewer points than bins, one point per bin.
SscvResult sscv(std::span<const double> sizes, std::span<const bool> covered, std::size_t n_bins, double alpha);
SscvResult sscv(std::span<const PredictionRegion> regions, std::span<const double> targets, std::size_t n_bins,
                double alpha);

/// Outcome of one method on one test point.
struct PointOutcome {
  double size = 0.0;
  bool covered = false;
  double cond_cov = std::numeric_limits<double>::quiet_NaN();
  double sym_diff = std::numeric_limits<double>::quiet_NaN();
  std::size_t element = 0;
  std::size_t n_intervals = 0;
  std::uint32_t flags = kFlagNone;
};

/// One (replication, method) row.
struct ReplicationMetrics {
  double marginal_coverage = 0.0;
  double cond_cov_abs_dev = std::numeric_limits<double>::quiet_NaN();
  double mean_region_size = 0.0;
  double sscv = 0.0;
  double mean_sym_diff = std::numeric_limits<double>::quiet_NaN();
  /// Per-flag counts of affected test points, e.g. "empty=3;fallback_cutoff=12".
  std::string flags;
};

ReplicationMetrics summarize_points(std::span<const PointOutcome> points, double alpha,
                                    std::size_t sscv_bins = kDefaultSscvBins);

/// Mean and standard error (sample sd / sqrt(count)) of the finite values.
struct SummaryStat {
  double mean = std::numeric_limits<double>::quiet_NaN();
  double se = std::numeric_limits<double>::quiet_NaN();
  std::size_t count = 0;
};

SummaryStat summarize(std::span<const double> values);

}  // namespace cdsplit
