#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cdsplit/rng.hpp"

namespace cdsplit {

/// Points stored row-major, compared under a diagonally weighted squared
/// distance sum_c w_c (a_c - b_c)^2. With trapezoid weights on a z-grid this
/// is the squared profile distance.
struct WeightedPoints {
  std::span<const double> data;
  std::size_t dim = 0;
  std::span<const double> weights;  ///< empty means all ones

  std::size_t size() const noexcept { return dim == 0 ? 0 : data.size() / dim; }
  std::span<const double> row(std::size_t i) const { return data.subspan(i * dim, dim); }
};

double weighted_sq_distance(std::span<const double> a, std::span<const double> b,
                            std::span<const double> weights);

struct KMeansResult {
  std::vector<double> centroids;  ///< J x dim, row-major
  std::vector<std::size_t> assignment;
  std::vector<double> cost_history;  ///< within-cluster cost after each Lloyd step
  std::size_t iterations = 0;
};

/// k-means++ seeding (D^2 sampling) followed by Lloyd iterations until the
/// assignment stops changing or `max_iter` steps. An empty cluster is
/// re-seeded at the point farthest from its current centroid.
KMeansResult kmeans_pp(const WeightedPoints& points, std::size_t k, Philox4x32& rng,
                       std::size_t max_iter = 100);

/// Index of the nearest centroid; ties go to the lowest index.
std::size_t nearest_centroid(std::span<const double> point, std::span<const double> centroids,
                             std::size_t dim, std::span<const double> weights);

}  // namespace cdsplit
