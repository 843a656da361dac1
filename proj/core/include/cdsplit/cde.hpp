#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "cdsplit/datasets.hpp"
#include "cdsplit/grid.hpp"
#include "cdsplit/knn.hpp"

namespace cdsplit {

// ---------------------------------------------------------------------------
// Level cdf and its quantile
//
// For a density f on a grid, H(z) = integral of f over {y : f(y) <= z}.
// Integrals are taken over the piecewise-linear interpolant of the grid
// values, which is exact segment by segment and makes H continuous except at
// flat stretches (plateaus), where it jumps.
// ---------------------------------------------------------------------------

/// Default z-grid: `points` equally spaced values on [0, 1.05 * max_level].
std::vector<double> make_z_grid(double max_level, std::size_t points = 128);

/// H(z) at one level, normalized by the density's own mass.
double level_cdf_at(const DensityGrid& density, double z);
double level_cdf_at(const Pmf& pmf, double z);

/// H sampled on an increasing z-grid.
LevelCdf level_cdf(const DensityGrid& density, std::span<const double> z_grid);
LevelCdf level_cdf(const Pmf& pmf, std::span<const double> z_grid);

struct LevelQuantile {
  double value = 0.0;
  /// The answer sits on a jump of H (a plateau in the density): H violates
  /// the smoothness regime and the run should report it.
  bool plateau = false;
};

/// q_alpha: smallest z with H(z) >= alpha on the default z-grid, linearly
/// interpolated between the bracketing z points. On a jump dominated by a
/// single density level, returns that level and sets `plateau`.
LevelQuantile level_quantile(const DensityGrid& density, double alpha, std::size_t z_points = 128);
LevelQuantile level_quantile(const Pmf& pmf, double alpha, std::size_t z_points = 128);

/// Exact inverse of H on the piecewise-linear interpolant: the smallest z
/// with H(z) >= alpha, found by sweeping the segment breakpoints. Used to
/// build oracle HPD sets without z-grid discretization.
double level_cdf_inverse(const DensityGrid& density, double alpha);

/// Conditional cdf F(y|x) = integral of the density up to y.
double cdf_at(const DensityGrid& density, double y);
/// Inverse of cdf_at, clamped to the grid span.
double cdf_inverse(const DensityGrid& density, double p);

// ---------------------------------------------------------------------------
// Fitted models
// ---------------------------------------------------------------------------

enum class CdeKind { kKnnKernel, kOracle, kExternal };

/// A fitted conditional density for continuous targets. Implementations are
/// immutable after construction and safe to evaluate concurrently.
class ConditionalDensityModel {
 public:
  virtual ~ConditionalDensityModel() = default;

  virtual CdeKind kind() const noexcept { return CdeKind::kExternal; }
  virtual std::size_t dim() const noexcept = 0;
  virtual const GridPtr& grid() const noexcept = 0;
  /// Normalized density at x. Throws UsageError on a dimension mismatch.
  virtual DensityGrid evaluate(std::span<const double> x) const = 0;
};

/// A fitted conditional pmf for discrete targets.
class ConditionalPmfModel {
 public:
  virtual ~ConditionalPmfModel() = default;

  virtual CdeKind kind() const noexcept { return CdeKind::kExternal; }
  virtual std::size_t dim() const noexcept = 0;
  virtual std::size_t n_labels() const noexcept = 0;
  virtual Pmf evaluate(std::span<const double> x) const = 0;
};

/// f(y|x) = mean over the k nearest training rows j of N(y; Y_j, bandwidth^2),
/// renormalized on the grid.
class KnnKernelCde final : public ConditionalDensityModel {
 public:
  KnnKernelCde(const Dataset& train, std::size_t k, double bandwidth, GridPtr grid);

  CdeKind kind() const noexcept override { return CdeKind::kKnnKernel; }
  std::size_t dim() const noexcept override { return index_.dim(); }
  const GridPtr& grid() const noexcept override { return grid_; }
  DensityGrid evaluate(std::span<const double> x) const override;

  std::size_t k() const noexcept { return k_; }
  double bandwidth() const noexcept { return bandwidth_; }

 private:
  void add_kernel(std::vector<double>& acc, double center) const;

  NeighborIndex index_;
  std::vector<double> targets_;
  std::size_t k_;
  double bandwidth_;
  GridPtr grid_;
  std::vector<double> offset_table_;  // exp(-(j h)^2 / (2 b^2)) for uniform grids
};

/// P(y|x) = label frequencies among the k nearest training rows.
class KnnPmf final : public ConditionalPmfModel {
 public:
  KnnPmf(const Dataset& train, std::size_t k);

  CdeKind kind() const noexcept override { return CdeKind::kKnnKernel; }
  std::size_t dim() const noexcept override { return index_.dim(); }
  std::size_t n_labels() const noexcept override { return n_labels_; }
  Pmf evaluate(std::span<const double> x) const override;

 private:
  NeighborIndex index_;
  std::vector<std::size_t> labels_;
  std::size_t n_labels_;
  std::size_t k_;
};

/// The scenario's true conditional density, renormalized on the grid.
class OracleCde final : public ConditionalDensityModel {
 public:
  OracleCde(Scenario scenario, GridPtr grid);

  CdeKind kind() const noexcept override { return CdeKind::kOracle; }
  std::size_t dim() const noexcept override { return scenario_.d; }
  const GridPtr& grid() const noexcept override { return grid_; }
  DensityGrid evaluate(std::span<const double> x) const override;

 private:
  Scenario scenario_;
  GridPtr grid_;
};

class OraclePmf final : public ConditionalPmfModel {
 public:
  explicit OraclePmf(Scenario scenario);

  CdeKind kind() const noexcept override { return CdeKind::kOracle; }
  std::size_t dim() const noexcept override { return scenario_.d; }
  std::size_t n_labels() const noexcept override { return scenario_.n_labels(); }
  Pmf evaluate(std::span<const double> x) const override;

 private:
  Scenario scenario_;
};

/// Throws ConfigError unless 1 <= k <= train.size() and bandwidth > 0.
std::shared_ptr<const KnnKernelCde> fit_knn_kernel(const Dataset& train, std::size_t k,
                                                   double bandwidth, GridPtr grid);
std::shared_ptr<const KnnPmf> fit_knn_pmf(const Dataset& train, std::size_t k);

/// Held-out CDE loss up to the model-independent constant:
/// mean_i [ integral f(y|x_i)^2 dy - 2 f(y_i|x_i) ]. Smaller is better.
double estimate_cde_loss(const ConditionalDensityModel& model, const Dataset& held_out);
double estimate_cde_loss(const ConditionalPmfModel& model, const Dataset& held_out);

}  // namespace cdsplit
