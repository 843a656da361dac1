#include "cdsplit/partition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cdsplit/error.hpp"
#include "cdsplit/kmeans.hpp"
#include "cdsplit/knn.hpp"

namespace cdsplit {

ProfileVector make_profile(const DensityGrid& density, std::span<const double> z_grid) {
  return ProfileVector{level_cdf(density, z_grid).values};
}

ProfileVector make_profile(const Pmf& pmf, std::span<const double> z_grid) {
  return ProfileVector{level_cdf(pmf, z_grid).values};
}

std::vector<double> trapezoid_weights(std::span<const double> z) {
  std::vector<double> w(z.size(), 0.0);
  for (std::size_t i = 0; i + 1 < z.size(); ++i) {
    const double h = z[i + 1] - z[i];
    w[i] += 0.5 * h;
    w[i + 1] += 0.5 * h;
  }
  return w;
}

double profile_distance(const ProfileVector& a, const ProfileVector& b, std::span<const double> z_grid) {
  if (a.size() != b.size() || a.size() != z_grid.size()) {
    throw UsageError("profile vectors must share one z-grid");
  }
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < z_grid.size(); ++i) {
    const double d0 = a.values[i] - b.values[i];
    const double d1 = a.values[i + 1] - b.values[i + 1];
    s += 0.5 * (z_grid[i + 1] - z_grid[i]) * (d0 * d0 + d1 * d1);
  }
  return std::sqrt(s);
}

namespace {
constexpr std::pair<PartitionKind, const char*> kPartitionNames[] = {
    {PartitionKind::kUnitary, "unitary"},
    {PartitionKind::kThresholdQuantile, "threshold-quantile"},
    {PartitionKind::kThresholdKMeans, "threshold-kmeans"},
    {PartitionKind::kProfileVoronoi, "profile"},
    {PartitionKind::kEuclideanVoronoi, "euclidean"},
};
}  // namespace

std::string to_string(PartitionKind kind) {
  for (const auto& [k, name] : kPartitionNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

PartitionKind parse_partition_kind(const std::string& name) {
  for (const auto& [k, n] : kPartitionNames) {
    if (name == n) return k;
  }
  throw ConfigError("unknown partition kind '" + name + "'");
}

// ---------------------------------------------------------------------------
// PartitionModel

PartitionModel PartitionModel::unitary() { return PartitionModel{}; }

PartitionModel PartitionModel::threshold(PartitionKind kind, std::vector<double> breakpoints) {
  if (kind != PartitionKind::kThresholdQuantile && kind != PartitionKind::kThresholdKMeans) {
    throw UsageError("threshold partition needs a threshold kind");
  }
  if (!std::is_sorted(breakpoints.begin(), breakpoints.end())) throw UsageError("breakpoints must be sorted");
  PartitionModel p;
  p.kind_ = kind;
  p.size_ = breakpoints.size() + 1;
  p.breakpoints_ = std::move(breakpoints);
  return p;
}

PartitionModel PartitionModel::voronoi(PartitionKind kind, std::vector<double> centroids, std::size_t dim,
                                       std::vector<double> weights) {
  if (kind != PartitionKind::kProfileVoronoi && kind != PartitionKind::kEuclideanVoronoi) {
    throw UsageError("voronoi partition needs a voronoi kind");
  }
  if (dim == 0 || centroids.empty() || centroids.size() % dim != 0) throw UsageError("malformed centroid matrix");
  if (!weights.empty() && weights.size() != dim) throw UsageError("weight length does not match centroids");
  PartitionModel p;
  p.kind_ = kind;
  p.size_ = centroids.size() / dim;
  p.centroids_ = std::move(centroids);
  p.dim_ = dim;
  p.weights_ = std::move(weights);
  return p;
}

std::size_t PartitionModel::assign(double qhat) const {
  switch (kind_) {
    case PartitionKind::kUnitary:
      return 0;
    case PartitionKind::kThresholdQuantile:
    case PartitionKind::kThresholdKMeans:
      return static_cast<std::size_t>(std::upper_bound(breakpoints_.begin(), breakpoints_.end(), qhat) -
                                      breakpoints_.begin());
    default:
      throw UsageError("a " + to_string(kind_) + " partition cannot be queried by a quantile value");
  }
}

std::size_t PartitionModel::assign(std::span<const double> point) const {
  if (kind_ == PartitionKind::kUnitary) return 0;
  if (kind_ != PartitionKind::kProfileVoronoi && kind_ != PartitionKind::kEuclideanVoronoi) {
    throw UsageError("a " + to_string(kind_) + " partition cannot be queried by a vector");
  }
  if (point.size() != dim_) throw UsageError("query length does not match partition centroids");
  return nearest_centroid(point, centroids_, dim_, weights_);
}

std::size_t PartitionModel::assign(const ProfileVector& profile) const {
  if (kind_ == PartitionKind::kEuclideanVoronoi) {
    throw UsageError("a euclidean partition cannot be queried by a profile");
  }
  return assign(std::span<const double>(profile.values));
}

// ---------------------------------------------------------------------------
// Builders

namespace {

std::size_t count_distinct(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return static_cast<std::size_t>(std::unique(v.begin(), v.end()) - v.begin());
}

std::size_t reduce_j(std::size_t J, std::size_t distinct, std::vector<std::string>& warnings) {
  if (J == 0) throw ConfigError("partition size J must be >= 1");
  if (distinct == 0) throw UsageError("cannot build a partition from no points");
  if (J > distinct) {
    warnings.push_back("partition size reduced from " + std::to_string(J) + " to " + std::to_string(distinct) +
                       " (number of distinct values)");
    return distinct;
  }
  return J;
}

}  // namespace

PartitionModel build_threshold_partition(std::span<const double> qhat_values, std::size_t J, ThresholdMode mode,
                                         std::uint64_t seed) {
  std::vector<std::string> warnings;
  std::vector<double> values(qhat_values.begin(), qhat_values.end());
  J = reduce_j(J, count_distinct(values), warnings);
  if (J == 1) {
    PartitionModel p = PartitionModel::unitary();
    p.warnings = std::move(warnings);
    return p;
  }
  std::vector<double> breaks;
  PartitionKind kind;
  if (mode == ThresholdMode::kQuantile) {
    kind = PartitionKind::kThresholdQuantile;
    std::sort(values.begin(), values.end());
    for (std::size_t j = 1; j < J; ++j) {
      breaks.push_back(empirical_quantile(values, static_cast<double>(j) / static_cast<double>(J)));
    }
  } else {
    kind = PartitionKind::kThresholdKMeans;
    Philox4x32 rng = make_stream(seed, Stream::kPartition);
    const KMeansResult km = kmeans_pp(WeightedPoints{values, 1, {}}, J, rng);
    std::vector<double> centres = km.centroids;
    std::sort(centres.begin(), centres.end());
    for (std::size_t j = 1; j < centres.size(); ++j) breaks.push_back(0.5 * (centres[j - 1] + centres[j]));
  }
  PartitionModel p = PartitionModel::threshold(kind, std::move(breaks));
  p.warnings = std::move(warnings);
  return p;
}

PartitionModel build_profile_partition(std::span<const ProfileVector> profiles, std::span<const double> z_grid,
                                       std::size_t J, std::uint64_t seed) {
  if (profiles.empty()) throw UsageError("cannot build a profile partition from no profiles");
  const std::size_t dim = z_grid.size();
  std::vector<double> data;
  data.reserve(profiles.size() * dim);
  for (const auto& p : profiles) {
    if (p.size() != dim) throw UsageError("profile length does not match the z-grid");
    data.insert(data.end(), p.values.begin(), p.values.end());
  }
  std::vector<std::string> warnings;
  if (J > profiles.size()) {
    warnings.push_back("partition size reduced from " + std::to_string(J) + " to " +
                       std::to_string(profiles.size()) + " (number of profiles)");
    J = profiles.size();
  }
  if (J == 0) throw ConfigError("partition size J must be >= 1");
  std::vector<double> weights = trapezoid_weights(z_grid);
  Philox4x32 rng = make_stream(seed, Stream::kPartition);
  const WeightedPoints pts{data, dim, weights};
  const KMeansResult km = kmeans_pp(pts, J, rng);

  // Snap every centroid to the training profile nearest to it.
  std::vector<double> snapped(J * dim);
  const std::span<const double> cs(km.centroids);
  for (std::size_t j = 0; j < J; ++j) {
    const auto c = cs.subspan(j * dim, dim);
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double d = weighted_sq_distance(pts.row(i), c, weights);
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    const auto r = pts.row(best);
    std::copy(r.begin(), r.end(), snapped.begin() + static_cast<std::ptrdiff_t>(j * dim));
  }
  PartitionModel p =
      PartitionModel::voronoi(PartitionKind::kProfileVoronoi, std::move(snapped), dim, std::move(weights));
  p.warnings = std::move(warnings);
  return p;
}

PartitionModel build_euclidean_partition(std::span<const double> features, std::size_t dim, std::size_t J,
                                         std::uint64_t seed) {
  const std::size_t n = dim == 0 ? 0 : features.size() / dim;
  if (n == 0) throw UsageError("cannot build a euclidean partition from no points");
  std::vector<std::string> warnings;
  if (J > n) {
    warnings.push_back("partition size reduced from " + std::to_string(J) + " to " + std::to_string(n));
    J = n;
  }
  if (J == 0) throw ConfigError("partition size J must be >= 1");
  Philox4x32 rng = make_stream(seed, Stream::kPartition);
  KMeansResult km = kmeans_pp(WeightedPoints{features, dim, {}}, J, rng);
  PartitionModel p = PartitionModel::voronoi(PartitionKind::kEuclideanVoronoi, std::move(km.centroids), dim, {});
  p.warnings = std::move(warnings);
  return p;
}

}  // namespace cdsplit
