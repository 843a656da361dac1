#include "cdsplit/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cdsplit/error.hpp"

namespace cdsplit {

std::string describe_flags(std::uint32_t flags) {
  static constexpr std::pair<RegionFlag, const char*> kNames[] = {
      {kFlagEmpty, "empty"},
      {kFlagDegenerate, "degenerate"},
      {kFlagFallbackCutoff, "fallback_cutoff"},
      {kFlagInsufficient, "insufficient_calibration"},
      {kFlagMadFloored, "mad_floored"},
      {kFlagOracleTruncated, "oracle_truncated"},
  };
  std::string out;
  for (const auto& [bit, name] : kNames) {
    if (flags & bit) {
      if (!out.empty()) out += ';';
      out += name;
    }
  }
  return out;
}

bool PredictionRegion::contains(double y) const {
  if (discrete) {
    const auto label = static_cast<std::size_t>(y);
    return y >= 0.0 && std::binary_search(labels.begin(), labels.end(), label);
  }
  for (const Interval& iv : intervals) {
    if (iv.contains(y)) return true;
  }
  return false;
}

double PredictionRegion::size() const {
  if (discrete) return static_cast<double>(labels.size());
  double s = 0.0;
  for (const Interval& iv : intervals) s += iv.length();
  return s;
}

// ---------------------------------------------------------------------------
// Calibration

std::size_t order_statistic_rank(std::size_t n, double alpha) {
  return static_cast<std::size_t>(std::floor(static_cast<double>(n) * alpha + 1e-9));
}

double CalibrationTable::cutoff(std::size_t element) const {
  if (element >= cutoffs.size()) return global_cutoff;
  return cutoffs[element];
}

std::uint32_t CalibrationTable::flags(std::size_t element) const {
  std::uint32_t f = kFlagNone;
  if (element >= fallback.size() || fallback[element]) f |= kFlagFallbackCutoff;
  if (insufficient && (element >= fallback.size() || fallback[element])) f |= kFlagInsufficient;
  return f;
}

CalibrationTable calibrate(std::span<const double> scores, std::span<const std::size_t> elements,
                           std::size_t n_elements, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (scores.size() != elements.size()) throw UsageError("scores and element assignments differ in length");
  if (n_elements == 0) throw UsageError("calibration needs at least one partition element");

  CalibrationTable table;
  table.alpha = alpha;
  table.element_scores.resize(n_elements);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (elements[i] >= n_elements) throw UsageError("element index out of range");
    table.element_scores[elements[i]].push_back(scores[i]);
  }

  std::vector<double> pooled(scores.begin(), scores.end());
  std::sort(pooled.begin(), pooled.end());
  const std::size_t global_rank = order_statistic_rank(pooled.size(), alpha);
  if (global_rank == 0) {
    table.global_cutoff = -std::numeric_limits<double>::infinity();
    table.insufficient = true;
    table.warnings.push_back("insufficient calibration: floor(" + std::to_string(pooled.size()) +
                             " * alpha) = 0; regions cover the whole target space");
  } else {
    table.global_cutoff = pooled[global_rank - 1];
  }

  table.cutoffs.resize(n_elements);
  table.fallback.assign(n_elements, false);
  std::size_t n_fallback = 0;
  for (std::size_t j = 0; j < n_elements; ++j) {
    auto& s = table.element_scores[j];
    std::sort(s.begin(), s.end());
    const std::size_t rank = order_statistic_rank(s.size(), alpha);
    if (rank == 0) {
      table.cutoffs[j] = table.global_cutoff;
      table.fallback[j] = true;
      ++n_fallback;
    } else {
      table.cutoffs[j] = s[rank - 1];
    }
  }
  if (n_fallback > 0 && n_elements > 1) {
    table.warnings.push_back(std::to_string(n_fallback) + " of " + std::to_string(n_elements) +
                             " partition elements have too few calibration points; global cutoff used");
  }
  return table;
}

CalibrationTable calibrate(std::span<const double> scores, double alpha) {
  const std::vector<std::size_t> zeros(scores.size(), 0);
  return calibrate(scores, zeros, 1, alpha);
}

// ---------------------------------------------------------------------------
// Regions

PredictionRegion threshold_region(const DensityGrid& density, double t) {
  const TargetGrid& g = *density.grid;
  const auto& v = density.values;
  const std::size_t n = v.size();
  PredictionRegion region;
  if (t <= 0.0) {
    region.intervals.push_back({g.front(), g.back()});
    return region;
  }
  std::size_t i = 0;
  while (i < n) {
    if (v[i] < t) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    while (i < n && v[i] >= t) ++i;
    const std::size_t end = i - 1;
    double lo = g[start];
    if (start > 0) {
      lo = g[start - 1] + (t - v[start - 1]) / (v[start] - v[start - 1]) * (g[start] - g[start - 1]);
    }
    double hi = g[end];
    if (end + 1 < n) {
      hi = g[end] + (v[end] - t) / (v[end] - v[end + 1]) * (g[end + 1] - g[end]);
    }
    region.intervals.push_back({lo, hi});
  }
  if (region.intervals.empty()) region.flags |= kFlagEmpty;
  return region;
}

PredictionRegion predict_region_cd(const DensityGrid& density, double cutoff) {
  return threshold_region(density, cutoff);
}

PredictionRegion predict_region_hpd(const DensityGrid& density, double cutoff) {
  if (cutoff <= 0.0) return threshold_region(density, 0.0);
  if (cutoff >= 1.0) {
    PredictionRegion r = threshold_region(density, density.max_value());
    r.flags |= kFlagDegenerate;
    return r;
  }
  const LevelQuantile q = level_quantile(density, cutoff);
  PredictionRegion r = threshold_region(density, q.value);
  if (q.plateau) r.flags |= kFlagDegenerate;
  return r;
}

PredictionRegion predict_region_baseline(ScoreKind kind, const LocalSummary& local, double cutoff) {
  const double c = -cutoff;
  PredictionRegion r;
  double lo = 0.0;
  double hi = 0.0;
  switch (kind) {
    case ScoreKind::kReg:
      lo = local.mean - c;
      hi = local.mean + c;
      break;
    case ScoreKind::kLocalReg: {
      const double rho = local.mad > kMadFloor ? local.mad : kMadFloor;
      if (!(local.mad > kMadFloor)) r.flags |= kFlagMadFloored;
      lo = local.mean - c * rho;
      hi = local.mean + c * rho;
      break;
    }
    case ScoreKind::kQuantile:
      lo = local.lower_q - c;
      hi = local.upper_q + c;
      break;
    default:
      throw UsageError("predict_region_baseline handles reg, local-reg and quantile; got " + to_string(kind));
  }
  if (lo <= hi) {
    r.intervals.push_back({lo, hi});
  } else {
    r.flags |= kFlagEmpty;
  }
  return r;
}

PredictionRegion predict_region_dist(const DensityGrid& density, double cutoff) {
  const double c = -cutoff;
  PredictionRegion r;
  if (c < 0.0) {
    r.flags |= kFlagEmpty;
    return r;
  }
  const double lo = c >= 0.5 ? density.grid->front() : cdf_inverse(density, 0.5 - c);
  const double hi = c >= 0.5 ? density.grid->back() : cdf_inverse(density, 0.5 + c);
  r.intervals.push_back({lo, hi});
  return r;
}

PredictionRegion predict_label_set(const Pmf& pmf, double cutoff, ScoreKind kind) {
  PredictionRegion r;
  r.discrete = true;
  for (std::size_t label = 0; label < pmf.size(); ++label) {
    double score = 0.0;
    switch (kind) {
      case ScoreKind::kCd:
      case ScoreKind::kProbability:
        score = probability_score(pmf, label);
        break;
      case ScoreKind::kHpd:
        score = hpd_score(pmf, label);
        break;
      default:
        throw UsageError("label sets support cd, hpd and probability scores; got " + to_string(kind));
    }
    if (score >= cutoff) r.labels.push_back(label);
  }
  if (r.labels.empty()) r.flags |= kFlagEmpty;
  return r;
}

}  // namespace cdsplit
