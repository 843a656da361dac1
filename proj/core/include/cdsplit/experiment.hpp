#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "cdsplit/datasets.hpp"
#include "cdsplit/methods.hpp"
#include "cdsplit/metrics.hpp"

namespace cdsplit {

/// One configured method. An empty J list means the default partition size;
/// several values sweep J.
struct MethodEntry {
  MethodSpec spec;
  std::vector<std::size_t> J;
};

/// A simulation study. Lists (n, d, cde k, cde bandwidth) are swept as a
/// full cross product; every method runs on the same data inside a
/// replication.
struct ExperimentConfig {
  Scenario scenario;
  std::vector<std::size_t> n_values = {2000};
  std::vector<std::size_t> d_values;  ///< empty: scenario.d
  double alpha = 0.1;
  std::vector<MethodEntry> methods;
  CdeSettings cde;
  std::vector<std::size_t> cde_k;        ///< empty: cde.k
  std::vector<double> cde_bandwidth;     ///< empty: cde.bandwidth
  std::size_t replications = 200;
  std::uint64_t seed = 1;
  std::size_t test_size = 500;
  double calibration_fraction = 0.5;
  std::size_t sscv_bins = kDefaultSscvBins;
  std::filesystem::path output = "results";
  std::size_t threads = 1;
  /// Pin the first feature of every test point (targets are redrawn there).
  std::optional<double> fixed_test_x1;
  bool write_regions = false;
  bool cde_loss = false;

  /// Throws ConfigError on any inconsistency.
  void validate() const;
};

/// Parses the JSON config format documented in the README. Unknown keys,
/// unknown scenarios or methods, and out-of-range values raise ConfigError.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);
/// The fully resolved config (defaults filled in) as pretty-printed JSON.
std::string config_to_json(const ExperimentConfig& config);

/// One cell of the sweep.
struct Setting {
  std::size_t n = 0;
  std::size_t d = 0;
  CdeSettings cde;
  std::string suffix;  ///< appended to method labels when several CDE variants run
};

std::vector<Setting> expand_settings(const ExperimentConfig& config);

struct MethodOutcome {
  std::string method;  ///< label, including any CDE suffix
  std::size_t J = 1;
  std::vector<PointOutcome> points;
  std::vector<PredictionRegion> regions;  ///< kept only when regions are requested
  ReplicationMetrics metrics;
  std::vector<std::string> warnings;
};

struct ReplicationResult {
  std::size_t setting = 0;
  std::size_t replication = 0;
  std::string error;  ///< nonempty when the replication failed
  std::vector<MethodOutcome> methods;
  double cde_loss = std::numeric_limits<double>::quiet_NaN();
  Dataset test;  ///< kept only when regions are requested
};

/// Seed of one replication; depends on (master seed, n, d, replication) only,
/// so every thread count and every CDE variant sees the same data.
std::uint64_t replication_seed(std::uint64_t master, std::size_t n, std::size_t d, std::size_t replication);

/// generate -> split -> fit on the training split -> partition -> calibrate
/// -> predict on a fresh test set -> metrics. Throws on failure.
ReplicationResult run_replication(const ExperimentConfig& config, const Setting& setting, std::size_t setting_index,
                                  std::size_t replication);

struct ExperimentResult {
  std::vector<Setting> settings;
  std::vector<ReplicationResult> replications;  ///< ordered by (setting, replication)
  std::size_t failed = 0;

  /// More than 10% of replications failed.
  bool partial_failure() const noexcept { return failed * 10 > replications.size(); }
};

using Logger = std::function<void(const std::string&)>;

/// Runs every replication on `config.threads` workers. Per-replication
/// errors are recorded, not thrown.
ExperimentResult run_experiment(const ExperimentConfig& config, const Logger& log = {});

/// raw.csv, summary.csv, config_echo.json, plus cde_loss.csv and regions.csv
/// when enabled. Creates `dir` if needed.
void write_reports(const ExperimentConfig& config, const ExperimentResult& result, const std::filesystem::path& dir);

/// Serialized region: "lo:hi;lo:hi" for intervals, "0;3" for labels, "" if empty.
std::string format_region(const PredictionRegion& region);
PredictionRegion parse_region(const std::string& text, bool discrete);

/// Recomputes metric rows from a regions.csv written by write_reports.
/// Returns raw.csv-formatted text.
std::string evaluate_regions_csv(const ExperimentConfig& config, const std::filesystem::path& regions_csv);

/// Shortest round-trip decimal text for a double; "nan" for NaN.
std::string format_number(double v);

}  // namespace cdsplit
