#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cdsplit/grid.hpp"
#include "cdsplit/rng.hpp"

namespace cdsplit {

enum class Task { kRegression, kClassification };

/// Row-major feature matrix plus one target per row. Classification targets
/// are stored as label indices (0, 1, ...) cast to double.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::size_t dim, Task task, std::size_t n_labels = 0);

  std::size_t size() const noexcept { return targets_.size(); }
  bool empty() const noexcept { return targets_.empty(); }
  std::size_t dim() const noexcept { return dim_; }
  Task task() const noexcept { return task_; }
  std::size_t n_labels() const noexcept { return n_labels_; }

  std::span<const double> features(std::size_t i) const {
    return {features_.data() + i * dim_, dim_};
  }
  double target(std::size_t i) const { return targets_[i]; }
  std::size_t label(std::size_t i) const { return static_cast<std::size_t>(targets_[i]); }

  std::span<const double> feature_matrix() const noexcept { return features_; }
  std::span<const double> targets() const noexcept { return targets_; }

  void push_back(std::span<const double> x, double y);
  void reserve(std::size_t n);

  /// Subset in the given order.
  Dataset subset(std::span<const std::size_t> rows) const;

  /// Original label strings for CSV-ingested classification data.
  std::vector<std::string> label_names;
  std::vector<std::string> feature_names;

 private:
  std::size_t dim_ = 0;
  Task task_ = Task::kRegression;
  std::size_t n_labels_ = 0;
  std::vector<double> features_;
  std::vector<double> targets_;
};

enum class ScenarioKind { kHomoscedastic, kBimodal, kHeteroscedastic, kAsymmetric, kLogistic };

/// A synthetic data-generating process with a known conditional law.
///
/// Regression scenarios draw X uniformly on (-1.5, 1.5)^d; only x1 matters.
///   homoscedastic:   Y|x ~ N(0.3 x1, 1)
///   bimodal:         Y|x ~ 0.5 N(f - g, s2) + 0.5 N(f + g, s2),
///                    f = (x1 - 1)^2 (x1 + 1), g = 2 1{x1 >= -0.5} sqrt(x1 + 0.5),
///                    s2 = 0.25 + |x1| (a variance)
///   heteroscedastic: Y|x ~ N(0.3 x1, 1 + 0.3|x1|) (second argument a variance)
///   asymmetric:      Y = 1.5 x1 + e, e ~ Gamma(shape a, rate a), a = 1 + 0.6|x1|
/// The logistic scenario draws X ~ N(0, I_d) and P(Y = i|x) ∝ exp(beta_i x1).
struct Scenario {
  ScenarioKind kind = ScenarioKind::kHomoscedastic;
  std::size_t d = 20;
  std::vector<double> beta = {-6.0, -5.0, -1.5, 0.0, 1.5, 5.0, 6.0};

  Task task() const noexcept {
    return kind == ScenarioKind::kLogistic ? Task::kClassification : Task::kRegression;
  }
  std::size_t n_labels() const noexcept { return kind == ScenarioKind::kLogistic ? beta.size() : 0; }

  /// Throws ConfigError on d = 0 or an empty beta.
  void validate() const;
};

std::string to_string(ScenarioKind kind);
/// Accepts the lowercase names: homoscedastic, bimodal, heteroscedastic,
/// asymmetric, logistic. Throws ConfigError otherwise.
ScenarioKind parse_scenario_kind(const std::string& name);
std::vector<std::string> scenario_names();

/// n i.i.d. draws; a pure function of (scenario, n, seed).
Dataset generate(const Scenario& scenario, std::size_t n, std::uint64_t seed);

/// Draws one target from the conditional law at x using the caller's stream.
double sample_target(const Scenario& scenario, std::span<const double> x, Philox4x32& rng);

/// True conditional density on `grid`, unnormalized; `raw_mass` carries the
/// trapezoid mass so callers can flag grids that truncate the law.
DensityGrid oracle_density(const Scenario& scenario, std::span<const double> x, GridPtr grid);

/// Pointwise true density f(y|x) of a regression scenario.
double oracle_pdf(const Scenario& scenario, std::span<const double> x, double y);

/// True label probabilities of the logistic scenario.
Pmf oracle_pmf(const Scenario& scenario, std::span<const double> x);

/// An interval holding all but a negligible (< 1e-8) part of Y|x.
std::pair<double, double> oracle_support(const Scenario& scenario, std::span<const double> x);

/// Reads a comma-separated file with a header row. All columns other than
/// `target_column` must be numeric. Classification targets are relabeled
/// densely in order of first appearance; the mapping is kept in
/// Dataset::label_names.
Dataset load_csv(const std::filesystem::path& path, const std::string& target_column, Task task);

/// Reads a feature-only CSV (e.g. query points). Columns named in `skip` are
/// ignored if present.
Dataset load_feature_csv(const std::filesystem::path& path, const std::vector<std::string>& skip = {});

struct SplitResult {
  Dataset train;
  Dataset calibration;
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> calibration_rows;
};

/// Random train/calibration split; calibration size = round(n * fraction).
SplitResult split_data(const Dataset& samples, double calibration_fraction, std::uint64_t seed);

}  // namespace cdsplit
