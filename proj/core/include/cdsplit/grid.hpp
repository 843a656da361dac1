#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace cdsplit {

/// Strictly increasing evaluation points over the target space.
class TargetGrid {
 public:
  /// Throws ConfigError unless `points` is strictly increasing with >= 2 entries.
  explicit TargetGrid(std::vector<double> points);

  static TargetGrid uniform(double lo, double hi, std::size_t n);

  /// Default construction: `n` equally spaced points spanning
  /// [min - pad * range, max + pad * range] of `targets`.
  static TargetGrid spanning(std::span<const double> targets, std::size_t n = 1000, double pad = 0.25);

  std::span<const double> points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.size(); }
  double operator[](std::size_t i) const { return points_[i]; }
  double front() const noexcept { return points_.front(); }
  double back() const noexcept { return points_.back(); }
  bool is_uniform() const noexcept { return uniform_; }
  /// Mean spacing; exact for uniform grids.
  double step() const noexcept { return (back() - front()) / static_cast<double>(size() - 1); }

  /// Trapezoid integral of `values` sampled on this grid.
  double integrate(std::span<const double> values) const;

  /// Index i such that points[i] <= y < points[i + 1]; requires front() <= y <= back().
  std::size_t cell(double y) const;

 private:
  std::vector<double> points_;
  bool uniform_ = false;
};

using GridPtr = std::shared_ptr<const TargetGrid>;

/// A nonnegative density sampled on a shared TargetGrid. Between grid points
/// the density is the linear interpolant; outside the grid it is zero.
struct DensityGrid {
  DensityGrid() = default;
  /// Validates length (>= 16, equal to the grid) and nonnegativity.
  DensityGrid(GridPtr grid, std::vector<double> values);

  GridPtr grid;
  std::vector<double> values;
  /// Trapezoid mass before any renormalization.
  double raw_mass = 1.0;

  std::size_t size() const noexcept { return values.size(); }
  double at(double y) const;
  double max_value() const;
  double mass() const { return grid->integrate(values); }
  /// Scales to unit trapezoid mass. A zero density is left as is.
  void normalize();
};

/// A probability mass function over labels 0..L-1.
struct Pmf {
  std::vector<double> probs;

  std::size_t size() const noexcept { return probs.size(); }
  double at(std::size_t label) const { return label < probs.size() ? probs[label] : 0.0; }
  void normalize();
};

/// H(z) sampled on a z-grid: the probability that the density, evaluated at
/// its own draw, is at most z.
struct LevelCdf {
  std::vector<double> z;
  std::vector<double> values;

  double at(double level) const;
};

}  // namespace cdsplit
