#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cdsplit/cde.hpp"
#include "cdsplit/grid.hpp"
#include "cdsplit/knn.hpp"
#include "cdsplit/scores.hpp"

namespace cdsplit {

/// Bit flags attached to regions and per-point results.
enum RegionFlag : std::uint32_t {
  kFlagNone = 0,
  kFlagEmpty = 1u << 0,            ///< region is empty
  kFlagDegenerate = 1u << 1,       ///< cutoff at an extreme level or on a plateau
  kFlagFallbackCutoff = 1u << 2,   ///< element too small; global cutoff used
  kFlagInsufficient = 1u << 3,     ///< floor(n alpha) = 0 even globally; nothing excluded
  kFlagMadFloored = 1u << 4,       ///< rho(x) floored in the local-reg score
  kFlagOracleTruncated = 1u << 5,  ///< oracle grid lost > 1e-2 of the mass
};

/// Semicolon-separated flag names, e.g. "empty;fallback_cutoff".
std::string describe_flags(std::uint32_t flags);

/// Closed interval [lo, hi].
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const noexcept { return hi - lo; }
  bool contains(double y) const noexcept { return lo <= y && y <= hi; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Continuous targets: sorted disjoint closed intervals. Discrete targets: a
/// sorted label set.
struct PredictionRegion {
  bool discrete = false;
  std::vector<Interval> intervals;
  std::vector<std::size_t> labels;
  std::uint32_t flags = kFlagNone;

  bool empty() const noexcept { return discrete ? labels.empty() : intervals.empty(); }
  bool contains(double y) const;
  /// Lebesgue measure, or label count.
  double size() const;
};

/// Per-element sorted calibration scores and their cutoffs.
struct CalibrationTable {
  double alpha = 0.1;
  std::vector<std::vector<double>> element_scores;  ///< ascending
  std::vector<double> cutoffs;                      ///< per element
  std::vector<bool> fallback;                       ///< element fell back to the global cutoff
  double global_cutoff = 0.0;
  bool insufficient = false;  ///< floor(n alpha) = 0 for the pooled scores
  std::vector<std::string> warnings;

  std::size_t size() const noexcept { return cutoffs.size(); }
  double cutoff(std::size_t element) const;
  std::uint32_t flags(std::size_t element) const;
};

/// 1-indexed floor(n alpha)-th order statistic rank, robust to rounding in n*alpha.
std::size_t order_statistic_rank(std::size_t n, double alpha);

/// Groups scores by element and takes the floor(|A| alpha)-th order statistic
/// of each group. Elements where that rank is 0 (including empty ones) use the
/// pooled cutoff; if even the pooled rank is 0 the cutoff is -inf.
CalibrationTable calibrate(std::span<const double> scores, std::span<const std::size_t> elements,
                           std::size_t n_elements, double alpha);
/// Single-element (unitary) calibration.
CalibrationTable calibrate(std::span<const double> scores, double alpha);

/// {y : f(y) >= threshold} on the grid's piecewise-linear interpolant.
/// Crossings are located by linear interpolation; grid endpoints are
/// included when above the threshold.
PredictionRegion threshold_region(const DensityGrid& density, double threshold);

/// CD-split region: density thresholded at the element's cutoff.
PredictionRegion predict_region_cd(const DensityGrid& density, double cutoff);

/// HPD-split region: the score cutoff c in [0, 1] is mapped through
/// q = H^{-1}(c | x) and the density is thresholded at q.
PredictionRegion predict_region_hpd(const DensityGrid& density, double cutoff);

/// Super-level sets of the baseline scores, each a single interval:
///   reg        [r - c, r + c]
///   local-reg  [r - c rho, r + c rho]
///   quantile   [q_lo - c, q_hi + c]
/// with c = -cutoff. Empty when the interval inverts.
PredictionRegion predict_region_baseline(ScoreKind kind, const LocalSummary& local, double cutoff);
/// Dist-split: [F^{-1}(1/2 - c), F^{-1}(1/2 + c)], c = -cutoff.
PredictionRegion predict_region_dist(const DensityGrid& density, double cutoff);

/// Labels whose score (cd/probability: P(y|x); hpd: H(P(y|x))) is >= cutoff.
PredictionRegion predict_label_set(const Pmf& pmf, double cutoff, ScoreKind kind);

}  // namespace cdsplit
