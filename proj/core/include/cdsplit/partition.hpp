#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cdsplit/cde.hpp"
#include "cdsplit/grid.hpp"

namespace cdsplit {

/// Level cdf of one feature point sampled on a shared z-grid; the clustering
/// coordinate of profile partitions.
struct ProfileVector {
  std::vector<double> values;

  std::size_t size() const noexcept { return values.size(); }
};

ProfileVector make_profile(const DensityGrid& density, std::span<const double> z_grid);
ProfileVector make_profile(const Pmf& pmf, std::span<const double> z_grid);

/// Trapezoid weights of a z-grid.
std::vector<double> trapezoid_weights(std::span<const double> z_grid);

/// sqrt( integral (H_a(z) - H_b(z))^2 dz ), trapezoid rule on the z-grid.
/// Throws UsageError on a length mismatch.
double profile_distance(const ProfileVector& a, const ProfileVector& b, std::span<const double> z_grid);

enum class PartitionKind { kUnitary, kThresholdQuantile, kThresholdKMeans, kProfileVoronoi, kEuclideanVoronoi };

std::string to_string(PartitionKind kind);
/// Names: unitary, threshold-quantile, threshold-kmeans, profile, euclidean.
PartitionKind parse_partition_kind(const std::string& name);

/// A partition of the feature space, described either by breakpoints over the
/// estimated density quantile q_alpha(x) or by Voronoi centroids. Immutable
/// after construction; assignment never looks at targets.
class PartitionModel {
 public:
  static PartitionModel unitary();
  /// Elements are [-inf, b_1), [b_1, b_2), ..., [b_{J-1}, inf).
  static PartitionModel threshold(PartitionKind kind, std::vector<double> breakpoints);
  static PartitionModel voronoi(PartitionKind kind, std::vector<double> centroids, std::size_t dim,
                                std::vector<double> weights);

  PartitionKind kind() const noexcept { return kind_; }
  std::size_t size() const noexcept { return size_; }
  const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }
  const std::vector<double>& centroids() const noexcept { return centroids_; }
  std::size_t centroid_dim() const noexcept { return dim_; }

  /// Query by estimated quantile (threshold partitions; unitary accepts anything).
  std::size_t assign(double qhat) const;
  /// Query by profile (profile-voronoi) or feature vector (euclidean-voronoi).
  std::size_t assign(std::span<const double> point) const;
  std::size_t assign(const ProfileVector& profile) const;

  std::vector<std::string> warnings;

 private:
  PartitionKind kind_ = PartitionKind::kUnitary;
  std::size_t size_ = 1;
  std::vector<double> breakpoints_;
  std::vector<double> centroids_;
  std::size_t dim_ = 0;
  std::vector<double> weights_;
};

enum class ThresholdMode { kQuantile, kKMeans1d };

/// Partition of the q_alpha axis built from training-split values. J is
/// reduced (with a warning) when it exceeds the number of distinct values.
PartitionModel build_threshold_partition(std::span<const double> qhat_values, std::size_t J, ThresholdMode mode,
                                         std::uint64_t seed);

/// k-means++ over training profiles under the squared profile distance; each
/// final centroid is then replaced by the nearest training profile.
PartitionModel build_profile_partition(std::span<const ProfileVector> profiles, std::span<const double> z_grid,
                                       std::size_t J, std::uint64_t seed);

/// k-means++ over raw feature vectors (Euclidean distance).
PartitionModel build_euclidean_partition(std::span<const double> features, std::size_t dim, std::size_t J,
                                         std::uint64_t seed);

}  // namespace cdsplit
