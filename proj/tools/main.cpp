// cdsplit: simulate, predict, evaluate, list.

#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "cdsplit/error.hpp"
#include "cdsplit/experiment.hpp"
#include "cdsplit/methods.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitPartial = 2;

void log_line(const std::string& msg) { std::cerr << "[cdsplit] " << msg << '\n'; }

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::optional<std::string> out;
};

void apply_overrides(cdsplit::ExperimentConfig& c, const Overrides& o) {
  if (o.seed && *o.seed != c.seed) {
    log_line("notice: --seed " + std::to_string(*o.seed) + " overrides config seed " + std::to_string(c.seed));
    c.seed = *o.seed;
  }
  if (o.threads && *o.threads != c.threads) {
    log_line("notice: --threads " + std::to_string(*o.threads) + " overrides config threads " +
             std::to_string(c.threads));
    c.threads = *o.threads;
  }
  if (o.out && *o.out != c.output.string()) {
    log_line("notice: --out " + *o.out + " overrides config output " + c.output.string());
    c.output = *o.out;
  }
  c.validate();
}

int run_simulate(const std::string& config_path, const Overrides& o) {
  cdsplit::ExperimentConfig c = cdsplit::load_config(config_path);
  apply_overrides(c, o);
  const auto result = cdsplit::run_experiment(c, log_line);
  cdsplit::write_reports(c, result, c.output);
  log_line("wrote " + std::to_string(result.replications.size()) + " replications to " + c.output.string());
  if (result.partial_failure()) {
    log_line(std::to_string(result.failed) + " of " + std::to_string(result.replications.size()) +
             " replications failed");
    return kExitPartial;
  }
  return kExitOk;
}

struct PredictOptions {
  std::string train;
  std::string query;
  std::string target = "y";
  std::string task = "regression";
  std::string method = "cd-split+";
  std::optional<std::string> partition;
  std::size_t J = 0;
  double alpha = 0.1;
  double calibration_fraction = 0.5;
  cdsplit::CdeSettings cde;
  std::uint64_t seed = 1;
  std::string out;
};

int run_predict(const PredictOptions& p) {
  using namespace cdsplit;
  if (!(p.alpha > 0.0 && p.alpha < 1.0)) throw ConfigError("--alpha must lie in (0, 1)");
  if (p.task != "regression" && p.task != "classification") {
    throw ConfigError("--task must be regression or classification");
  }
  const Task task = p.task == "regression" ? Task::kRegression : Task::kClassification;
  const MethodSpec spec = make_method(p.method, p.partition, p.J);
  const Dataset data = load_csv(p.train, p.target, task);
  Dataset query = load_feature_csv(p.query, {p.target});
  if (query.dim() != data.dim()) {
    throw ConfigError("query has " + std::to_string(query.dim()) + " feature columns, training data has " +
                      std::to_string(data.dim()));
  }
  SplitResult split = split_data(data, p.calibration_fraction, derive_seed(p.seed, 2));
  Workbench bench(std::move(split.train), std::move(split.calibration), p.cde, p.alpha);
  const FittedMethod fitted = fit_method(spec, bench, derive_seed(p.seed, 4));
  for (const std::string& w : fitted.warnings()) log_line("warning: " + w);

  std::ofstream file;
  if (!p.out.empty()) {
    file.open(p.out);
    if (!file) throw ConfigError("cannot write '" + p.out + "'");
  }
  std::ostream& out = p.out.empty() ? std::cout : file;
  out << "row,element,size,flags,region\n";
  for (std::size_t i = 0; i < query.size(); ++i) {
    const auto x = query.features(i);
    QueryPoint q{x};
    DensityGrid density;
    Pmf pmf;
    LocalSummary local;
    if (fitted.needs_density()) {
      if (bench.discrete()) {
        pmf = bench.pmf_model().evaluate(x);
        q.pmf = &pmf;
      } else {
        density = bench.density_model().evaluate(x);
        q.density = &density;
      }
    }
    if (fitted.needs_local()) {
      local = bench.regressor().summarize(x);
      q.local = &local;
    }
    const Prediction pred = fitted.predict(q);
    std::string region;
    if (pred.region.discrete) {
      for (std::size_t l : pred.region.labels) {
        if (!region.empty()) region += ';';
        region += l < data.label_names.size() ? data.label_names[l] : std::to_string(l);
      }
    } else {
      region = format_region(pred.region);
    }
    out << i << ',' << pred.element << ',' << format_number(pred.region.size()) << ','
        << describe_flags(pred.region.flags) << ',' << region << '\n';
  }
  return kExitOk;
}

int run_evaluate(const std::string& config_path, const std::string& regions, const std::optional<std::string>& out) {
  const cdsplit::ExperimentConfig c = cdsplit::load_config(config_path);
  const std::string raw = cdsplit::evaluate_regions_csv(c, regions);
  if (!out) {
    std::cout << raw;
    return kExitOk;
  }
  std::filesystem::create_directories(*out);
  std::ofstream f(std::filesystem::path(*out) / "raw.csv", std::ios::binary);
  if (!f) throw cdsplit::ConfigError("cannot write to '" + *out + "'");
  f << raw;
  return kExitOk;
}

void run_list() {
  std::cout << "scenarios:\n";
  for (const auto& s : cdsplit::scenario_names()) std::cout << "  " << s << '\n';
  std::cout << "methods:\n";
  for (const auto& m : cdsplit::method_names()) std::cout << "  " << m << '\n';
  std::cout << "partitions (cd-split):\n"
            << "  threshold-quantile (default), threshold-kmeans, profile (alias cd-split+), euclidean, unitary\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Density-based split conformal prediction: simulations and predictions"};
  app.require_subcommand(1);

  Overrides overrides;
  std::string config_path;

  auto* simulate = app.add_subcommand("simulate", "Run a simulation study from a JSON config");
  simulate->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  simulate->add_option("--seed", overrides.seed, "Master seed (overrides the config)");
  simulate->add_option("--threads", overrides.threads, "Worker threads (overrides the config)")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--out", overrides.out, "Output directory (overrides the config)");

  PredictOptions pred;
  auto* predict = app.add_subcommand("predict", "Fit on a CSV and emit prediction regions for query rows");
  predict->add_option("--train", pred.train, "Training CSV with a header row")->required()->check(CLI::ExistingFile);
  predict->add_option("--query", pred.query, "Query CSV with the same feature columns")
      ->required()
      ->check(CLI::ExistingFile);
  predict->add_option("--target", pred.target, "Name of the target column")->capture_default_str();
  predict->add_option("--task", pred.task, "regression or classification")->capture_default_str();
  predict->add_option("--method", pred.method, "Method name (see `list`)")->capture_default_str();
  predict->add_option("--partition", pred.partition, "Partition for cd-split");
  predict->add_option("--J", pred.J, "Partition size (0: ceil(n_calibration / 100))")->capture_default_str();
  predict->add_option("--alpha", pred.alpha, "Miscoverage level")->capture_default_str();
  predict->add_option("--calibration-fraction", pred.calibration_fraction, "Share of rows used for calibration")
      ->capture_default_str();
  predict->add_option("--k", pred.cde.k, "Neighbours for the kNN density estimate")->capture_default_str();
  predict->add_option("--bandwidth", pred.cde.bandwidth, "Kernel bandwidth")->capture_default_str();
  predict->add_option("--grid-points", pred.cde.grid_points, "Target grid size")->capture_default_str();
  predict->add_option("--seed", pred.seed, "Seed for the split and partition")->capture_default_str();
  predict->add_option("--out", pred.out, "Output CSV (default: stdout)");
  std::string predict_config;
  predict->add_option("--config", predict_config, "Accepted for symmetry; predict reads its settings from flags");
  std::optional<std::size_t> predict_threads;
  predict->add_option("--threads", predict_threads, "Accepted for symmetry; prediction runs on one thread");

  std::string eval_config;
  std::string eval_regions;
  std::optional<std::string> eval_out;
  auto* evaluate = app.add_subcommand("evaluate", "Recompute metrics from a stored regions.csv");
  evaluate->add_option("--config", eval_config, "Config naming the scenario and alpha")
      ->required()
      ->check(CLI::ExistingFile);
  evaluate->add_option("--regions", eval_regions, "regions.csv written by simulate")
      ->required()
      ->check(CLI::ExistingFile);
  evaluate->add_option("--out", eval_out, "Directory for raw.csv (default: stdout)");

  auto* list = app.add_subcommand("list", "List scenarios and methods");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*simulate) return run_simulate(config_path, overrides);
    if (*predict) {
      if (!predict_config.empty()) log_line("notice: predict ignores --config; settings come from flags");
      return run_predict(pred);
    }
    if (*evaluate) return run_evaluate(eval_config, eval_regions, eval_out);
    if (*list) {
      run_list();
      return kExitOk;
    }
  } catch (const cdsplit::ConfigError& e) {
    log_line(std::string("configuration error: ") + e.what());
    return kExitConfig;
  } catch (const cdsplit::IngestionError& e) {
    log_line(std::string("input error: ") + e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    log_line(std::string("error: ") + e.what());
    return kExitConfig;
  }
  return kExitOk;
}
