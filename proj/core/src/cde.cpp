#include "cdsplit/cde.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "cdsplit/error.hpp"

namespace cdsplit {

std::vector<double> make_z_grid(double max_level, std::size_t points) {
  if (points < 2) throw ConfigError("z-grid needs at least 2 points");
  const double top = max_level > 0.0 ? 1.05 * max_level : 1.0;
  std::vector<double> z(points);
  for (std::size_t i = 0; i < points; ++i) {
    z[i] = top * static_cast<double>(i) / static_cast<double>(points - 1);
  }
  return z;
}

// ---------------------------------------------------------------------------
// Level cdf

double level_cdf_at(const DensityGrid& density, double z) {
  const TargetGrid& g = *density.grid;
  const auto& v = density.values;
  double total = 0.0;
  double below = 0.0;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    const double h = g[i + 1] - g[i];
    const double lo = std::min(v[i], v[i + 1]);
    const double hi = std::max(v[i], v[i + 1]);
    const double full = 0.5 * h * (lo + hi);
    total += full;
    if (hi <= z) {
      below += full;
    } else if (lo < z) {
      below += 0.5 * h * (z * z - lo * lo) / (hi - lo);
    }
  }
  return total > 0.0 ? std::clamp(below / total, 0.0, 1.0) : 0.0;
}

double level_cdf_at(const Pmf& pmf, double z) {
  double total = 0.0;
  double below = 0.0;
  for (double p : pmf.probs) {
    total += p;
    if (p <= z) below += p;
  }
  return total > 0.0 ? below / total : 0.0;
}

LevelCdf level_cdf(const DensityGrid& density, std::span<const double> z_grid) {
  const std::size_t m = z_grid.size();
  LevelCdf out;
  out.z.assign(z_grid.begin(), z_grid.end());
  out.values.assign(m, 0.0);
  if (m == 0) return out;

  // Each segment contributes a*z^2 + c on its partial range and a constant
  // once z passes its upper value; accumulate with difference arrays.
  std::vector<double> quad(m + 1, 0.0);
  std::vector<double> constant(m + 1, 0.0);
  const TargetGrid& g = *density.grid;
  const auto& v = density.values;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    const double h = g[i + 1] - g[i];
    const double lo = std::min(v[i], v[i + 1]);
    const double hi = std::max(v[i], v[i + 1]);
    const double full = 0.5 * h * (lo + hi);
    total += full;
    const auto first_full =
        static_cast<std::size_t>(std::lower_bound(z_grid.begin(), z_grid.end(), hi) - z_grid.begin());
    constant[first_full] += full;
    if (hi > lo) {
      const auto first_partial =
          static_cast<std::size_t>(std::upper_bound(z_grid.begin(), z_grid.end(), lo) - z_grid.begin());
      if (first_partial < first_full) {
        const double a = 0.5 * h / (hi - lo);
        quad[first_partial] += a;
        quad[first_full] -= a;
        constant[first_partial] -= a * lo * lo;
        constant[first_full] += a * lo * lo;
      }
    }
  }
  double q = 0.0;
  double c = 0.0;
  double running_max = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    q += quad[j];
    c += constant[j];
    double value = total > 0.0 ? (q * z_grid[j] * z_grid[j] + c) / total : 0.0;
    value = std::clamp(value, running_max, 1.0);
    running_max = value;
    out.values[j] = value;
  }
  return out;
}

LevelCdf level_cdf(const Pmf& pmf, std::span<const double> z_grid) {
  LevelCdf out;
  out.z.assign(z_grid.begin(), z_grid.end());
  out.values.reserve(z_grid.size());
  for (double z : z_grid) out.values.push_back(level_cdf_at(pmf, z));
  return out;
}

LevelQuantile level_quantile(const DensityGrid& density, double alpha, std::size_t z_points) {
  const double top = density.max_value();
  if (alpha <= 0.0) return {0.0, false};
  if (alpha >= 1.0) return {top, false};
  const std::vector<double> z = make_z_grid(top, z_points);
  const LevelCdf H = level_cdf(density, z);
  std::size_t j = 0;
  while (j < z.size() && H.values[j] < alpha) ++j;
  if (j == 0) return {0.0, false};
  if (j == z.size()) return {top, false};
  const double z0 = z[j - 1];
  const double z1 = z[j];
  const double h0 = H.values[j - 1];
  const double h1 = H.values[j];

  // Mass carried by flat stretches whose level falls inside (z0, z1].
  const TargetGrid& g = *density.grid;
  const auto& v = density.values;
  const double total = density.mass();
  std::map<double, double> atoms;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    if (v[i] == v[i + 1] && v[i] > z0 && v[i] <= z1) {
      atoms[v[i]] += (g[i + 1] - g[i]) * v[i] / total;
    }
  }
  if (!atoms.empty()) {
    const auto heaviest =
        std::max_element(atoms.begin(), atoms.end(), [](const auto& a, const auto& b) { return a.second < b.second; });
    if (heaviest->second >= 0.5 * (h1 - h0) && heaviest->second >= 1e-3) {
      return {heaviest->first, true};
    }
  }
  if (h1 <= h0) return {z1, false};
  return {z0 + (alpha - h0) / (h1 - h0) * (z1 - z0), false};
}

LevelQuantile level_quantile(const Pmf& pmf, double alpha, std::size_t /*z_points*/) {
  std::vector<double> sorted = pmf.probs;
  std::sort(sorted.begin(), sorted.end());
  if (sorted.empty()) return {0.0, false};
  if (alpha <= 0.0) return {0.0, false};
  const double total = std::accumulate(sorted.begin(), sorted.end(), 0.0);
  double acc = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    acc += sorted[i];
    // All labels sharing this probability are included together.
    if (i + 1 < sorted.size() && sorted[i + 1] == sorted[i]) continue;
    if (acc / total >= alpha - 1e-12) return {sorted[i], false};
  }
  return {sorted.back(), false};
}

namespace {

// Unnormalized mass of {f <= z} on the interpolant.
double mass_at_or_below(const DensityGrid& density, double z) {
  const TargetGrid& g = *density.grid;
  const auto& v = density.values;
  double below = 0.0;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    const double h = g[i + 1] - g[i];
    const double lo = std::min(v[i], v[i + 1]);
    const double hi = std::max(v[i], v[i + 1]);
    if (hi <= z) {
      below += 0.5 * h * (lo + hi);
    } else if (lo < z) {
      below += 0.5 * h * (z * z - lo * lo) / (hi - lo);
    }
  }
  return below;
}

}  // namespace

double level_cdf_inverse(const DensityGrid& density, double alpha) {
  const TargetGrid& g = *density.grid;
  const auto& v = density.values;
  if (alpha <= 0.0) return 0.0;
  if (alpha >= 1.0) return density.max_value();
  const double total = g.integrate(v);
  if (total <= 0.0) return 0.0;
  const double target = alpha * total;

  // Between consecutive distinct levels the mass is exactly a quadratic in z.
  // Bracket the answer with whole-grid evaluations, then solve the quadratic
  // from the segments active inside the bracket only. A running sweep would
  // add and remove huge slopes from nearly flat tail segments and lose the
  // answer to cancellation.
  std::vector<double> levels(v.begin(), v.end());
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  std::size_t lo_idx = 0;
  std::size_t hi_idx = levels.size() - 1;
  if (mass_at_or_below(density, levels[0]) >= target) return levels[0];
  // Invariant: mass(levels[lo_idx]) < target <= mass(levels[hi_idx]).
  while (hi_idx - lo_idx > 1) {
    const std::size_t mid = lo_idx + (hi_idx - lo_idx) / 2;
    if (mass_at_or_below(density, levels[mid]) >= target) {
      hi_idx = mid;
    } else {
      lo_idx = mid;
    }
  }
  const double z_lo = levels[lo_idx];
  const double z_hi = levels[hi_idx];
  double fixed = 0.0;
  double quad = 0.0;
  double constant = 0.0;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    const double h = g[i + 1] - g[i];
    const double lo = std::min(v[i], v[i + 1]);
    const double hi = std::max(v[i], v[i + 1]);
    if (hi <= z_lo) {
      fixed += 0.5 * h * (lo + hi);
    } else if (lo <= z_lo && hi > z_lo) {
      const double a = 0.5 * h / (hi - lo);
      quad += a;
      constant += a * lo * lo;
    }
  }
  if (quad <= 0.0) return z_hi;  // a jump: the mass arrives all at once at z_hi
  const double z2 = (target - fixed + constant) / quad;
  return std::clamp(std::sqrt(std::max(0.0, z2)), z_lo, z_hi);
}

double cdf_at(const DensityGrid& density, double y) {
  const TargetGrid& g = *density.grid;
  const auto& v = density.values;
  const double total = density.mass();
  if (total <= 0.0 || y <= g.front()) return 0.0;
  if (y >= g.back()) return 1.0;
  const std::size_t cell = g.cell(y);
  double acc = 0.0;
  for (std::size_t i = 0; i < cell; ++i) acc += 0.5 * (v[i] + v[i + 1]) * (g[i + 1] - g[i]);
  acc += 0.5 * (v[cell] + density.at(y)) * (y - g[cell]);
  return std::clamp(acc / total, 0.0, 1.0);
}

double cdf_inverse(const DensityGrid& density, double p) {
  const TargetGrid& g = *density.grid;
  const auto& v = density.values;
  const double total = density.mass();
  if (total <= 0.0) return g.front();
  if (p <= 0.0) p = 0.0;
  const double target = std::min(p, 1.0) * total;
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    const double h = g[i + 1] - g[i];
    const double cell_mass = 0.5 * (v[i] + v[i + 1]) * h;
    if (cell_mass > 0.0 && acc + cell_mass >= target) {
      // Cumulative mass inside the cell is quadratic in the offset t in [0, 1].
      const double r = std::max(0.0, target - acc);
      const double b = h * v[i];
      const double a2 = h * (v[i + 1] - v[i]);
      const double disc = std::max(0.0, b * b + 2.0 * a2 * r);
      const double denom = b + std::sqrt(disc);
      const double t = denom > 0.0 ? std::clamp(2.0 * r / denom, 0.0, 1.0) : 0.0;
      return g[i] + t * h;
    }
    acc += cell_mass;
  }
  return g.back();
}

// ---------------------------------------------------------------------------
// kNN kernel CDE

namespace {
constexpr double kKernelReach = 8.5;  // bandwidths; Gaussian tail < 1e-15
constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;
}  // namespace

KnnKernelCde::KnnKernelCde(const Dataset& train, std::size_t k, double bandwidth, GridPtr grid)
    : index_(train.feature_matrix(), train.dim()),
      targets_(train.targets().begin(), train.targets().end()),
      k_(k),
      bandwidth_(bandwidth),
      grid_(std::move(grid)) {
  if (train.task() != Task::kRegression) throw ConfigError("kNN kernel CDE needs a regression dataset");
  if (train.empty()) throw ConfigError("kNN kernel CDE needs training data");
  if (k == 0 || k > train.size()) {
    throw ConfigError("kNN kernel CDE needs 1 <= k <= n_train (k = " + std::to_string(k) +
                      ", n_train = " + std::to_string(train.size()) + ")");
  }
  if (!(bandwidth > 0.0)) throw ConfigError("kernel bandwidth must be positive");
  if (!grid_) throw ConfigError("kNN kernel CDE needs a target grid");
  if (grid_->is_uniform()) {
    const double h = grid_->step();
    const auto reach = static_cast<std::size_t>(std::ceil(kKernelReach * bandwidth_ / h)) + 1;
    offset_table_.resize(reach);
    for (std::size_t j = 0; j < reach; ++j) {
      const double d = static_cast<double>(j) * h;
      offset_table_[j] = std::exp(-0.5 * d * d / (bandwidth_ * bandwidth_));
    }
  }
}

void KnnKernelCde::add_kernel(std::vector<double>& acc, double center) const {
  const TargetGrid& g = *grid_;
  const double b2 = bandwidth_ * bandwidth_;
  const double norm = kInvSqrt2Pi / bandwidth_;
  const auto n = static_cast<std::ptrdiff_t>(g.size());
  if (!offset_table_.empty()) {
    // exp(-(j h - r)^2 / 2b^2) = T[j] * exp(j h r / b^2) * exp(-r^2 / 2b^2)
    const double h = g.step();
    const double u = (center - g.front()) / h;
    const double m = std::round(u);
    const double r = (u - m) * h;
    const double base = norm * std::exp(-0.5 * r * r / b2);
    const double grow = std::exp(h * r / b2);
    const double shrink = 1.0 / grow;
    const auto mi = static_cast<std::ptrdiff_t>(m);
    const auto reach = static_cast<std::ptrdiff_t>(offset_table_.size());
    double p = base;
    for (std::ptrdiff_t j = 0; j < reach; ++j, p *= grow) {
      const std::ptrdiff_t i = mi + j;
      if (i >= n) break;
      if (i >= 0) acc[static_cast<std::size_t>(i)] += offset_table_[static_cast<std::size_t>(j)] * p;
    }
    p = base * shrink;
    for (std::ptrdiff_t j = 1; j < reach; ++j, p *= shrink) {
      const std::ptrdiff_t i = mi - j;
      if (i < 0) break;
      if (i < n) acc[static_cast<std::size_t>(i)] += offset_table_[static_cast<std::size_t>(j)] * p;
    }
    return;
  }
  const auto pts = g.points();
  auto first = std::lower_bound(pts.begin(), pts.end(), center - kKernelReach * bandwidth_);
  auto last = std::upper_bound(pts.begin(), pts.end(), center + kKernelReach * bandwidth_);
  for (auto it = first; it != last; ++it) {
    const double d = *it - center;
    acc[static_cast<std::size_t>(it - pts.begin())] += norm * std::exp(-0.5 * d * d / b2);
  }
}

DensityGrid KnnKernelCde::evaluate(std::span<const double> x) const {
  const auto nn = index_.query(x, k_);
  std::vector<double> acc(grid_->size(), 0.0);
  for (std::size_t j : nn) add_kernel(acc, targets_[j]);
  const double inv_k = 1.0 / static_cast<double>(nn.size());
  for (double& a : acc) a *= inv_k;
  DensityGrid out(grid_, std::move(acc));
  out.normalize();
  return out;
}

std::shared_ptr<const KnnKernelCde> fit_knn_kernel(const Dataset& train, std::size_t k, double bandwidth,
                                                   GridPtr grid) {
  return std::make_shared<const KnnKernelCde>(train, k, bandwidth, std::move(grid));
}

// ---------------------------------------------------------------------------
// kNN pmf

KnnPmf::KnnPmf(const Dataset& train, std::size_t k)
    : index_(train.feature_matrix(), train.dim()), n_labels_(train.n_labels()), k_(k) {
  if (train.task() != Task::kClassification) throw ConfigError("kNN pmf needs a classification dataset");
  if (k == 0 || k > train.size()) throw ConfigError("kNN pmf needs 1 <= k <= n_train");
  labels_.reserve(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) labels_.push_back(train.label(i));
}

Pmf KnnPmf::evaluate(std::span<const double> x) const {
  Pmf pmf;
  pmf.probs.assign(n_labels_, 0.0);
  const auto nn = index_.query(x, k_);
  for (std::size_t j : nn) pmf.probs[labels_[j]] += 1.0;
  pmf.normalize();
  return pmf;
}

std::shared_ptr<const KnnPmf> fit_knn_pmf(const Dataset& train, std::size_t k) {
  return std::make_shared<const KnnPmf>(train, k);
}

// ---------------------------------------------------------------------------
// Oracles

OracleCde::OracleCde(Scenario scenario, GridPtr grid) : scenario_(std::move(scenario)), grid_(std::move(grid)) {
  scenario_.validate();
  if (scenario_.task() != Task::kRegression) throw ConfigError("oracle CDE needs a regression scenario");
  if (!grid_) throw ConfigError("oracle CDE needs a target grid");
}

DensityGrid OracleCde::evaluate(std::span<const double> x) const {
  DensityGrid out = oracle_density(scenario_, x, grid_);
  out.normalize();
  return out;
}

OraclePmf::OraclePmf(Scenario scenario) : scenario_(std::move(scenario)) {
  scenario_.validate();
  if (scenario_.task() != Task::kClassification) throw ConfigError("oracle pmf needs the logistic scenario");
}

Pmf OraclePmf::evaluate(std::span<const double> x) const { return oracle_pmf(scenario_, x); }

// ---------------------------------------------------------------------------
// CDE loss

double estimate_cde_loss(const ConditionalDensityModel& model, const Dataset& held_out) {
  if (held_out.empty()) throw UsageError("CDE loss needs a nonempty held-out set");
  double total = 0.0;
  std::vector<double> sq;
  for (std::size_t i = 0; i < held_out.size(); ++i) {
    const DensityGrid d = model.evaluate(held_out.features(i));
    sq.resize(d.size());
    for (std::size_t j = 0; j < d.size(); ++j) sq[j] = d.values[j] * d.values[j];
    total += d.grid->integrate(sq) - 2.0 * d.at(held_out.target(i));
  }
  return total / static_cast<double>(held_out.size());
}

double estimate_cde_loss(const ConditionalPmfModel& model, const Dataset& held_out) {
  if (held_out.empty()) throw UsageError("CDE loss needs a nonempty held-out set");
  double total = 0.0;
  for (std::size_t i = 0; i < held_out.size(); ++i) {
    const Pmf p = model.evaluate(held_out.features(i));
    double sq = 0.0;
    for (double v : p.probs) sq += v * v;
    total += sq - 2.0 * p.at(held_out.label(i));
  }
  return total / static_cast<double>(held_out.size());
}

}  // namespace cdsplit
