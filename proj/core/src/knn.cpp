#include "cdsplit/knn.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "cdsplit/error.hpp"

namespace cdsplit {

NeighborIndex::NeighborIndex(std::span<const double> features, std::size_t dim)
    : features_(features.begin(), features.end()), dim_(dim), n_(dim == 0 ? 0 : features.size() / dim) {
  if (dim == 0) throw ConfigError("neighbour index needs dimension >= 1");
}

std::vector<std::size_t> NeighborIndex::query(std::span<const double> x, std::size_t k,
                                              std::size_t exclude) const {
  if (x.size() != dim_) {
    throw UsageError("query has dimension " + std::to_string(x.size()) + ", model expects " +
                     std::to_string(dim_));
  }
  std::vector<std::pair<double, std::size_t>> dist;
  dist.reserve(n_);
  const double* row = features_.data();
  for (std::size_t i = 0; i < n_; ++i, row += dim_) {
    if (i == exclude) continue;
    double s = 0.0;
    for (std::size_t c = 0; c < dim_; ++c) {
      const double diff = row[c] - x[c];
      s += diff * diff;
    }
    dist.emplace_back(s, i);
  }
  k = std::min(k, dist.size());
  std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
  std::sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k));
  std::vector<std::size_t> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = dist[i].second;
  return out;
}

double empirical_quantile(std::vector<double> values, double p) {
  if (values.empty()) throw UsageError("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * std::clamp(p, 0.0, 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

KnnRegressor::KnnRegressor(const Dataset& train, std::size_t k, double alpha)
    : index_(train.feature_matrix(), train.dim()),
      targets_(train.targets().begin(), train.targets().end()),
      k_(k),
      alpha_(alpha) {
  if (k == 0 || k > train.size()) throw ConfigError("kNN regressor needs 1 <= k <= n_train");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  abs_residuals_.resize(train.size());
  const std::size_t k_loo = std::min(k_, train.size() - 1);
  for (std::size_t i = 0; i < train.size(); ++i) {
    double mean = targets_[i];
    if (k_loo > 0) {
      mean = 0.0;
      for (std::size_t j : index_.query(train.features(i), k_loo, i)) mean += targets_[j];
      mean /= static_cast<double>(k_loo);
    }
    abs_residuals_[i] = std::abs(targets_[i] - mean);
  }
}

LocalSummary KnnRegressor::summarize(std::span<const double> x) const {
  const auto nn = index_.query(x, k_);
  LocalSummary s;
  std::vector<double> ys(nn.size());
  for (std::size_t i = 0; i < nn.size(); ++i) {
    ys[i] = targets_[nn[i]];
    s.mean += ys[i];
    s.mad += abs_residuals_[nn[i]];
  }
  s.mean /= static_cast<double>(nn.size());
  s.mad /= static_cast<double>(nn.size());
  s.lower_q = empirical_quantile(ys, alpha_ / 2.0);
  s.upper_q = empirical_quantile(std::move(ys), 1.0 - alpha_ / 2.0);
  return s;
}

}  // namespace cdsplit
