#include "cdsplit/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cdsplit/error.hpp"

namespace cdsplit {

TargetGrid::TargetGrid(std::vector<double> points) : points_(std::move(points)) {
  if (points_.size() < 2) throw ConfigError("target grid needs at least 2 points");
  for (std::size_t i = 1; i < points_.size(); ++i) {
    if (!(points_[i] > points_[i - 1])) {
      throw ConfigError("target grid is not strictly increasing at index " + std::to_string(i));
    }
  }
  const double h = step();
  uniform_ = true;
  for (std::size_t i = 1; i < points_.size() && uniform_; ++i) {
    uniform_ = std::abs((points_[i] - points_[i - 1]) - h) <= 1e-9 * std::max(1.0, std::abs(h));
  }
}

TargetGrid TargetGrid::uniform(double lo, double hi, std::size_t n) {
  if (n < 2 || !(hi > lo)) throw ConfigError("uniform grid needs n >= 2 and hi > lo");
  std::vector<double> pts(n);
  const double h = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) pts[i] = lo + h * static_cast<double>(i);
  pts.back() = hi;
  return TargetGrid(std::move(pts));
}

TargetGrid TargetGrid::spanning(std::span<const double> targets, std::size_t n, double pad) {
  if (targets.empty()) throw UsageError("cannot build a target grid from no targets");
  const auto [mn, mx] = std::minmax_element(targets.begin(), targets.end());
  double range = *mx - *mn;
  if (range <= 0.0) range = 1.0;
  return uniform(*mn - pad * range, *mx + pad * range, n);
}

double TargetGrid::integrate(std::span<const double> values) const {
  double total = 0.0;
  for (std::size_t i = 1; i < points_.size(); ++i) {
    total += 0.5 * (values[i] + values[i - 1]) * (points_[i] - points_[i - 1]);
  }
  return total;
}

std::size_t TargetGrid::cell(double y) const {
  if (uniform_) {
    const double pos = (y - front()) / step();
    auto i = static_cast<std::size_t>(std::clamp(pos, 0.0, static_cast<double>(size() - 2)));
    // Guard against rounding at cell borders.
    while (i + 2 < size() && points_[i + 1] <= y) ++i;
    while (i > 0 && points_[i] > y) --i;
    return i;
  }
  auto it = std::upper_bound(points_.begin(), points_.end(), y);
  std::size_t i = static_cast<std::size_t>(std::distance(points_.begin(), it));
  if (i == 0) return 0;
  return std::min(i - 1, size() - 2);
}

DensityGrid::DensityGrid(GridPtr g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
  if (!grid) throw UsageError("density grid without a target grid");
  if (values.size() != grid->size()) throw UsageError("density values do not match the grid length");
  if (values.size() < 16) throw UsageError("density grid needs at least 16 points");
  for (double& x : values) {
    if (!(x >= 0.0)) throw UsageError("density values must be nonnegative");
  }
  raw_mass = mass();
}

double DensityGrid::at(double y) const {
  const TargetGrid& g = *grid;
  if (!(y >= g.front() && y <= g.back())) return 0.0;
  const std::size_t i = g.cell(y);
  const double x0 = g[i];
  const double x1 = g[i + 1];
  const double t = (y - x0) / (x1 - x0);
  return std::max(0.0, values[i] + t * (values[i + 1] - values[i]));
}

double DensityGrid::max_value() const {
  return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
}

void DensityGrid::normalize() {
  const double m = mass();
  if (m > 0.0) {
    for (double& x : values) x /= m;
  }
}

void Pmf::normalize() {
  const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
  if (total > 0.0) {
    for (double& p : probs) p /= total;
  }
}

double LevelCdf::at(double level) const {
  if (z.empty()) return 0.0;
  if (level <= z.front()) return values.front();
  if (level >= z.back()) return values.back();
  auto it = std::upper_bound(z.begin(), z.end(), level);
  const std::size_t i = static_cast<std::size_t>(std::distance(z.begin(), it)) - 1;
  const double t = (level - z[i]) / (z[i + 1] - z[i]);
  return values[i] + t * (values[i + 1] - values[i]);
}

}  // namespace cdsplit
