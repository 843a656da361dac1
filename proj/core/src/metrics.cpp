#include "cdsplit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <numeric>

#include "cdsplit/cde.hpp"
#include "cdsplit/error.hpp"

namespace cdsplit {

namespace {

std::vector<Interval> normalized_intervals(const PredictionRegion& r) {
  std::vector<Interval> v;
  for (const Interval& iv : r.intervals) {
    if (iv.hi > iv.lo) v.push_back(iv);
  }
  std::sort(v.begin(), v.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  std::vector<Interval> merged;
  for (const Interval& iv : v) {
    if (!merged.empty() && iv.lo <= merged.back().hi) {
      merged.back().hi = std::max(merged.back().hi, iv.hi);
    } else {
      merged.push_back(iv);
    }
  }
  return merged;
}

// Integral of the interpolant from the grid start to y.
double integral_to(const DensityGrid& d, std::span<const double> cumulative, double y) {
  const TargetGrid& g = *d.grid;
  if (y <= g.front()) return 0.0;
  if (y >= g.back()) return cumulative.back();
  const std::size_t i = g.cell(y);
  const double t = y - g[i];
  const double slope = (d.values[i + 1] - d.values[i]) / (g[i + 1] - g[i]);
  return cumulative[i] + t * (d.values[i] + 0.5 * slope * t);
}

std::vector<double> cumulative_integral(const DensityGrid& d) {
  const TargetGrid& g = *d.grid;
  std::vector<double> c(d.size(), 0.0);
  for (std::size_t i = 1; i < d.size(); ++i) {
    c[i] = c[i - 1] + 0.5 * (g[i] - g[i - 1]) * (d.values[i] + d.values[i - 1]);
  }
  return c;
}

double region_mass_with(const DensityGrid& d, std::span<const double> cumulative, const PredictionRegion& r) {
  const double total = cumulative.back();
  if (total <= 0.0) return 0.0;
  double m = 0.0;
  for (const Interval& iv : normalized_intervals(r)) {
    m += integral_to(d, cumulative, iv.hi) - integral_to(d, cumulative, iv.lo);
  }
  return std::clamp(m / total, 0.0, 1.0);
}

}  // namespace

OracleReference make_oracle_reference(const Scenario& scenario, std::span<const double> x, double alpha,
                                      std::size_t grid_points) {
  OracleReference ref;
  if (scenario.task() == Task::kClassification) {
    ref.discrete = true;
    ref.pmf = oracle_pmf(scenario, x);
    return ref;
  }
  const auto [lo, hi] = oracle_support(scenario, x);
  auto grid = std::make_shared<const TargetGrid>(TargetGrid::uniform(lo, hi, grid_points));
  ref.density = oracle_density(scenario, x, grid);
  if (ref.density.raw_mass < 0.99) ref.flags |= kFlagOracleTruncated;
  ref.density.normalize();
  ref.cumulative = cumulative_integral(ref.density);
  ref.hpd = oracle_hpd_set(ref.density, alpha);
  return ref;
}

PredictionRegion oracle_hpd_set(const DensityGrid& density, double alpha) {
  return threshold_region(density, level_cdf_inverse(density, alpha));
}

double region_mass(const DensityGrid& density, const PredictionRegion& region) {
  const std::vector<double> c = cumulative_integral(density);
  return region_mass_with(density, c, region);
}

double conditional_coverage(const PredictionRegion& region, const OracleReference& oracle) {
  if (oracle.discrete) {
    if (!region.discrete) throw UsageError("continuous region scored against a discrete oracle");
    double p = 0.0;
    for (std::size_t label : region.labels) p += oracle.pmf.at(label);
    return std::clamp(p, 0.0, 1.0);
  }
  if (region.discrete) throw UsageError("label set scored against a continuous oracle");
  return region_mass_with(oracle.density, oracle.cumulative, region);
}

double region_size(const PredictionRegion& region) { return region.size(); }

double intersection_measure(const PredictionRegion& a, const PredictionRegion& b) {
  const auto A = normalized_intervals(a);
  const auto B = normalized_intervals(b);
  double m = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < A.size() && j < B.size()) {
    const double lo = std::max(A[i].lo, B[j].lo);
    const double hi = std::min(A[i].hi, B[j].hi);
    if (hi > lo) m += hi - lo;
    if (A[i].hi < B[j].hi) {
      ++i;
    } else {
      ++j;
    }
  }
  return m;
}

double symmetric_difference_measure(const PredictionRegion& a, const PredictionRegion& b) {
  double sa = 0.0;
  double sb = 0.0;
  for (const Interval& iv : normalized_intervals(a)) sa += iv.length();
  for (const Interval& iv : normalized_intervals(b)) sb += iv.length();
  return std::max(0.0, sa + sb - 2.0 * intersection_measure(a, b));
}

double hpd_symmetric_difference(const PredictionRegion& region, const OracleReference& oracle) {
  if (oracle.discrete || region.discrete) throw UsageError("symmetric difference needs continuous regions");
  return symmetric_difference_measure(region, oracle.hpd);
}

double hpd_symmetric_difference(const PredictionRegion& region, const Scenario& scenario,
                                std::span<const double> x, double alpha) {
  return hpd_symmetric_difference(region, make_oracle_reference(scenario, x, alpha));
}

double marginal_coverage(std::span<const PredictionRegion> regions, std::span<const double> targets) {
  if (regions.size() != targets.size()) throw UsageError("regions and targets differ in length");
  if (regions.empty()) throw UsageError("marginal coverage of no points");
  std::size_t hit = 0;
  for (std::size_t i = 0; i < regions.size(); ++i) hit += regions[i].contains(targets[i]) ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(regions.size());
}

double conditional_coverage_deviation(std::span<const PredictionRegion> regions, const Dataset& test_points,
                                      const Scenario& scenario, double alpha) {
  if (regions.size() != test_points.size()) throw UsageError("regions and test points differ in length");
  if (regions.empty()) throw UsageError("conditional coverage of no points");
  double s = 0.0;
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const OracleReference ref = make_oracle_reference(scenario, test_points.features(i), alpha);
    s += std::abs(conditional_coverage(regions[i], ref) - (1.0 - alpha));
  }
  return s / static_cast<double>(regions.size());
}

SscvResult sscv(std::span<const double> sizes, std::span<const bool> covered, std::size_t n_bins, double alpha) {
  if (sizes.size() != covered.size()) throw UsageError("sizes and coverage indicators differ in length");
  if (sizes.empty()) throw UsageError("sscv of no points");
  if (n_bins == 0) throw ConfigError("sscv needs at least one bin");
  SscvResult out;
  const std::size_t n = sizes.size();
  if (n < n_bins) {
    out.warnings.push_back("sscv: " + std::to_string(n) + " points for " + std::to_string(n_bins) +
                           " bins; using " + std::to_string(n));
    n_bins = n;
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sizes[a] < sizes[b]; });
  out.bins = n_bins;
  for (std::size_t b = 0; b < n_bins; ++b) {
    const std::size_t begin = b * n / n_bins;
    const std::size_t end = (b + 1) * n / n_bins;
    std::size_t hit = 0;
    for (std::size_t k = begin; k < end; ++k) hit += covered[order[k]] ? 1 : 0;
    const double cov = static_cast<double>(hit) / static_cast<double>(end - begin);
    out.value = std::max(out.value, std::abs(cov - (1.0 - alpha)));
  }
  return out;
}

SscvResult sscv(std::span<const PredictionRegion> regions, std::span<const double> targets, std::size_t n_bins,
                double alpha) {
  if (regions.size() != targets.size()) throw UsageError("regions and targets differ in length");
  std::vector<double> sizes;
  std::unique_ptr<bool[]> hits(new bool[regions.size()]);
  for (std::size_t i = 0; i < regions.size(); ++i) {
    sizes.push_back(regions[i].size());
    hits[i] = regions[i].contains(targets[i]);
  }
  return sscv(sizes, std::span<const bool>(hits.get(), regions.size()), n_bins, alpha);
}

ReplicationMetrics summarize_points(std::span<const PointOutcome> points, double alpha, std::size_t sscv_bins) {
  if (points.empty()) throw UsageError("no test points to summarize");
  ReplicationMetrics m;
  const double n = static_cast<double>(points.size());
  std::size_t hit = 0;
  double size = 0.0;
  double dev = 0.0;
  std::size_t n_dev = 0;
  double sym = 0.0;
  std::size_t n_sym = 0;
  std::vector<double> sizes;
  std::unique_ptr<bool[]> covered(new bool[points.size()]);
  std::map<std::uint32_t, std::size_t> counts;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const PointOutcome& p = points[i];
    hit += p.covered ? 1 : 0;
    size += p.size;
    if (std::isfinite(p.cond_cov)) {
      dev += std::abs(p.cond_cov - (1.0 - alpha));
      ++n_dev;
    }
    if (std::isfinite(p.sym_diff)) {
      sym += p.sym_diff;
      ++n_sym;
    }
    sizes.push_back(p.size);
    covered[i] = p.covered;
    for (std::uint32_t bit = 1; bit != 0 && bit <= p.flags; bit <<= 1) {
      if (p.flags & bit) ++counts[bit];
    }
  }
  m.marginal_coverage = static_cast<double>(hit) / n;
  m.mean_region_size = size / n;
  if (n_dev > 0) m.cond_cov_abs_dev = dev / static_cast<double>(n_dev);
  if (n_sym > 0) m.mean_sym_diff = sym / static_cast<double>(n_sym);
  m.sscv = sscv(sizes, std::span<const bool>(covered.get(), points.size()), sscv_bins, alpha).value;
  for (const auto& [bit, count] : counts) {
    if (!m.flags.empty()) m.flags += ';';
    m.flags += describe_flags(bit) + "=" + std::to_string(count);
  }
  return m;
}

SummaryStat summarize(std::span<const double> values) {
  SummaryStat s;
  double sum = 0.0;
  for (double v : values) {
    if (std::isfinite(v)) {
      sum += v;
      ++s.count;
    }
  }
  if (s.count == 0) return s;
  s.mean = sum / static_cast<double>(s.count);
  if (s.count < 2) return s;
  double ss = 0.0;
  for (double v : values) {
    if (std::isfinite(v)) ss += (v - s.mean) * (v - s.mean);
  }
  s.se = std::sqrt(ss / static_cast<double>(s.count - 1)) / std::sqrt(static_cast<double>(s.count));
  return s;
}

}  // namespace cdsplit
