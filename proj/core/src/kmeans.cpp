#include "cdsplit/kmeans.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "cdsplit/error.hpp"

namespace cdsplit {

double weighted_sq_distance(std::span<const double> a, std::span<const double> b,
                            std::span<const double> weights) {
  double s = 0.0;
  if (weights.empty()) {
    for (std::size_t c = 0; c < a.size(); ++c) {
      const double d = a[c] - b[c];
      s += d * d;
    }
  } else {
    for (std::size_t c = 0; c < a.size(); ++c) {
      const double d = a[c] - b[c];
      s += weights[c] * d * d;
    }
  }
  return s;
}

std::size_t nearest_centroid(std::span<const double> point, std::span<const double> centroids, std::size_t dim,
                             std::span<const double> weights) {
  const std::size_t k = centroids.size() / dim;
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < k; ++j) {
    const double d = weighted_sq_distance(point, centroids.subspan(j * dim, dim), weights);
    if (d < best_d) {
      best_d = d;
      best = j;
    }
  }
  return best;
}

namespace {

double total_cost(const WeightedPoints& pts, const std::vector<double>& centroids,
                  const std::vector<std::size_t>& assignment) {
  double cost = 0.0;
  const std::span<const double> c(centroids);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    cost += weighted_sq_distance(pts.row(i), c.subspan(assignment[i] * pts.dim, pts.dim), pts.weights);
  }
  return cost;
}

}  // namespace

KMeansResult kmeans_pp(const WeightedPoints& pts, std::size_t k, Philox4x32& rng, std::size_t max_iter) {
  const std::size_t n = pts.size();
  const std::size_t dim = pts.dim;
  if (k == 0) throw ConfigError("k-means needs k >= 1");
  if (k > n) throw ConfigError("k-means needs k <= number of points");

  KMeansResult res;
  res.centroids.resize(k * dim);
  auto set_centroid = [&](std::size_t j, std::size_t i) {
    const auto r = pts.row(i);
    std::copy(r.begin(), r.end(), res.centroids.begin() + static_cast<std::ptrdiff_t>(j * dim));
  };

  // Seeding: first centre uniform, then proportional to D^2.
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  std::size_t first = static_cast<std::size_t>(rng() % n);
  set_centroid(0, first);
  for (std::size_t j = 1; j < k; ++j) {
    const std::span<const double> prev = std::span<const double>(res.centroids).subspan((j - 1) * dim, dim);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], weighted_sq_distance(pts.row(i), prev, pts.weights));
      total += d2[i];
    }
    std::size_t pick = n - 1;
    if (total > 0.0) {
      const double u = rng.uniform01() * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc > u && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      // Every point coincides with a chosen centre; fall back to a uniform pick.
      pick = static_cast<std::size_t>(rng() % n);
    }
    set_centroid(j, pick);
  }

  res.assignment.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    res.assignment[i] = nearest_centroid(pts.row(i), res.centroids, dim, pts.weights);
  }

  std::vector<double> sums(k * dim);
  std::vector<std::size_t> counts(k);
  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    // Update step.
    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t a = res.assignment[i];
      ++counts[a];
      const auto r = pts.row(i);
      for (std::size_t c = 0; c < dim; ++c) sums[a * dim + c] += r[c];
    }
    for (std::size_t j = 0; j < k; ++j) {
      if (counts[j] == 0) continue;
      for (std::size_t c = 0; c < dim; ++c) {
        res.centroids[j * dim + c] = sums[j * dim + c] / static_cast<double>(counts[j]);
      }
    }
    for (std::size_t j = 0; j < k; ++j) {
      if (counts[j] != 0) continue;
      std::size_t far = 0;
      double far_d = -1.0;
      const std::span<const double> cs(res.centroids);
      for (std::size_t i = 0; i < n; ++i) {
        if (counts[res.assignment[i]] <= 1) continue;
        const double d = weighted_sq_distance(pts.row(i), cs.subspan(res.assignment[i] * dim, dim), pts.weights);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      if (far_d < 0.0) continue;
      --counts[res.assignment[far]];
      res.assignment[far] = j;
      counts[j] = 1;
      set_centroid(j, far);
    }
    res.cost_history.push_back(total_cost(pts, res.centroids, res.assignment));

    // Assignment step.
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t a = nearest_centroid(pts.row(i), res.centroids, dim, pts.weights);
      if (a != res.assignment[i]) {
        res.assignment[i] = a;
        changed = true;
      }
    }
    res.iterations = iter + 1;
    if (!changed) break;
  }
  return res;
}

}  // namespace cdsplit
