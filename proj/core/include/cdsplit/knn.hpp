#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cdsplit/datasets.hpp"

namespace cdsplit {

/// Exact Euclidean nearest neighbours by linear scan. Ties in distance are
/// broken by the lower training index so results are reproducible.
class NeighborIndex {
 public:
  NeighborIndex() = default;
  NeighborIndex(std::span<const double> features, std::size_t dim);

  std::size_t size() const noexcept { return n_; }
  std::size_t dim() const noexcept { return dim_; }

  /// Indices of the k nearest rows, closest first. `exclude` (if < size())
  /// is skipped, which gives leave-one-out neighbourhoods on training rows.
  std::vector<std::size_t> query(std::span<const double> x, std::size_t k,
                                 std::size_t exclude = static_cast<std::size_t>(-1)) const;

 private:
  std::vector<double> features_;
  std::size_t dim_ = 0;
  std::size_t n_ = 0;
};

/// Neighbourhood summaries used by the regression-type baselines.
struct LocalSummary {
  double mean = 0.0;       ///< kNN regression estimate r(x)
  double mad = 0.0;        ///< kNN mean absolute deviation rho(x)
  double lower_q = 0.0;    ///< kNN conditional alpha/2 quantile
  double upper_q = 0.0;    ///< kNN conditional 1 - alpha/2 quantile
};

/// kNN regression, mean absolute deviation and conditional quantiles, all
/// from the same neighbour search.
///
/// The absolute residuals |Y_j - r(x_j)| that feed rho are computed leave-one-out
/// on the training rows.
class KnnRegressor {
 public:
  KnnRegressor(const Dataset& train, std::size_t k, double alpha);

  LocalSummary summarize(std::span<const double> x) const;
  std::size_t dim() const noexcept { return index_.dim(); }
  std::size_t k() const noexcept { return k_; }

 private:
  NeighborIndex index_;
  std::vector<double> targets_;
  std::vector<double> abs_residuals_;
  std::size_t k_;
  double alpha_;
};

/// Type-7 (linear interpolation) empirical quantile of unsorted values.
double empirical_quantile(std::vector<double> values, double p);

}  // namespace cdsplit
