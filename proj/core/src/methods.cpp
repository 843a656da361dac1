#include "cdsplit/methods.hpp"

#include <algorithm>
#include <cmath>

#include "cdsplit/error.hpp"

namespace cdsplit {

std::vector<std::string> method_names() {
  return {"cd-split",       "hpd-split",  "reg-split",         "local-reg-split",
          "quantile-split", "dist-split", "probability-split"};
}

MethodSpec make_method(const std::string& name, std::optional<std::string> partition, std::size_t J) {
  MethodSpec m;
  m.label = name;
  m.J = J;
  if (name == "cd-split" || name == "cd-split+") {
    m.score = ScoreKind::kCd;
    const std::string fallback = name == "cd-split+" ? "profile" : "threshold-quantile";
    m.partition = parse_partition_kind(partition.value_or(fallback));
    if (name == "cd-split+" && m.partition != PartitionKind::kProfileVoronoi) {
      throw ConfigError("cd-split+ always uses the profile partition");
    }
    return m;
  }
  if (partition && *partition != "unitary") {
    throw ConfigError("method '" + name + "' does not take a partition");
  }
  if (name == "hpd-split") {
    m.score = ScoreKind::kHpd;
  } else if (name == "reg-split") {
    m.score = ScoreKind::kReg;
  } else if (name == "local-reg-split") {
    m.score = ScoreKind::kLocalReg;
  } else if (name == "quantile-split") {
    m.score = ScoreKind::kQuantile;
  } else if (name == "dist-split") {
    m.score = ScoreKind::kDist;
  } else if (name == "probability-split") {
    m.score = ScoreKind::kProbability;
  } else {
    throw ConfigError("unknown method '" + name + "'");
  }
  return m;
}

std::size_t default_partition_size(std::size_t n_calibration) {
  return std::max<std::size_t>(1, (n_calibration + 99) / 100);
}

// ---------------------------------------------------------------------------
// Workbench

Workbench::Workbench(Dataset train, Dataset calibration, const CdeSettings& settings, double alpha,
                     const Scenario* scenario)
    : train_(std::move(train)),
      calibration_(std::move(calibration)),
      settings_(settings),
      alpha_(alpha),
      discrete_(train_.task() == Task::kClassification) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (train_.empty() || calibration_.empty()) throw ConfigError("training and calibration splits must be nonempty");
  if (settings.oracle && scenario == nullptr) throw ConfigError("the oracle CDE needs a scenario");
  if (discrete_) {
    if (settings.oracle) {
      pmf_model_ = std::make_shared<const OraclePmf>(*scenario);
    } else {
      pmf_model_ = fit_knn_pmf(train_, std::min(settings.k, train_.size()));
    }
    return;
  }
  auto grid = std::make_shared<const TargetGrid>(
      TargetGrid::spanning(train_.targets(), settings.grid_points, settings.grid_pad));
  if (settings.oracle) {
    density_model_ = std::make_shared<const OracleCde>(*scenario, grid);
  } else {
    density_model_ = fit_knn_kernel(train_, std::min(settings.k, train_.size()), settings.bandwidth, grid);
  }
}

const ConditionalDensityModel& Workbench::density_model() const {
  if (!density_model_) throw UsageError("no density model for a classification task");
  return *density_model_;
}

const ConditionalPmfModel& Workbench::pmf_model() const {
  if (!pmf_model_) throw UsageError("no pmf model for a regression task");
  return *pmf_model_;
}

const KnnRegressor& Workbench::regressor() {
  if (discrete_) throw ConfigError("regression baselines need a continuous target");
  if (!regressor_) {
    regressor_ = std::make_unique<KnnRegressor>(train_, std::min(settings_.regression_k, train_.size()), alpha_);
  }
  return *regressor_;
}

namespace {

std::vector<DensityGrid> evaluate_all(const ConditionalDensityModel& model, const Dataset& data) {
  std::vector<DensityGrid> out;
  out.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) out.push_back(model.evaluate(data.features(i)));
  return out;
}

std::vector<Pmf> evaluate_all(const ConditionalPmfModel& model, const Dataset& data) {
  std::vector<Pmf> out;
  out.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) out.push_back(model.evaluate(data.features(i)));
  return out;
}

}  // namespace

const std::vector<DensityGrid>& Workbench::train_densities() {
  if (!train_densities_) train_densities_ = evaluate_all(density_model(), train_);
  return *train_densities_;
}

const std::vector<DensityGrid>& Workbench::calibration_densities() {
  if (!calibration_densities_) calibration_densities_ = evaluate_all(density_model(), calibration_);
  return *calibration_densities_;
}

const std::vector<Pmf>& Workbench::train_pmfs() {
  if (!train_pmfs_) train_pmfs_ = evaluate_all(pmf_model(), train_);
  return *train_pmfs_;
}

const std::vector<Pmf>& Workbench::calibration_pmfs() {
  if (!calibration_pmfs_) calibration_pmfs_ = evaluate_all(pmf_model(), calibration_);
  return *calibration_pmfs_;
}

const std::vector<LocalSummary>& Workbench::calibration_summaries() {
  if (!calibration_summaries_) {
    const KnnRegressor& r = regressor();
    std::vector<LocalSummary> out;
    out.reserve(calibration_.size());
    for (std::size_t i = 0; i < calibration_.size(); ++i) out.push_back(r.summarize(calibration_.features(i)));
    calibration_summaries_ = std::move(out);
  }
  return *calibration_summaries_;
}

const std::vector<double>& Workbench::profile_z_grid() {
  if (!z_grid_) {
    double top = 1.0;
    if (!discrete_) {
      top = 0.0;
      for (const DensityGrid& d : train_densities()) top = std::max(top, d.max_value());
    }
    z_grid_ = make_z_grid(top);
  }
  return *z_grid_;
}

// ---------------------------------------------------------------------------
// FittedMethod

namespace {

bool uses_local(ScoreKind s) {
  return s == ScoreKind::kReg || s == ScoreKind::kLocalReg || s == ScoreKind::kQuantile;
}

}  // namespace

bool FittedMethod::needs_density() const noexcept { return !uses_local(spec_.score); }
bool FittedMethod::needs_local() const noexcept { return uses_local(spec_.score); }

std::vector<std::string> FittedMethod::warnings() const {
  std::vector<std::string> w = partition_.warnings;
  w.insert(w.end(), table_.warnings.begin(), table_.warnings.end());
  return w;
}

std::size_t FittedMethod::element_of(const QueryPoint& q) const {
  switch (partition_.kind()) {
    case PartitionKind::kUnitary:
      return 0;
    case PartitionKind::kThresholdQuantile:
    case PartitionKind::kThresholdKMeans: {
      const double qhat = discrete_ ? level_quantile(*q.pmf, alpha_).value : level_quantile(*q.density, alpha_).value;
      return partition_.assign(qhat);
    }
    case PartitionKind::kProfileVoronoi:
      return partition_.assign(discrete_ ? make_profile(*q.pmf, z_grid_) : make_profile(*q.density, z_grid_));
    case PartitionKind::kEuclideanVoronoi:
      return partition_.assign(q.x);
  }
  return 0;
}

Prediction FittedMethod::predict(const QueryPoint& q) const {
  if (needs_density() && (discrete_ ? q.pmf == nullptr : q.density == nullptr)) {
    throw UsageError("query point lacks the estimated density");
  }
  if (needs_local() && q.local == nullptr) throw UsageError("query point lacks the regression summary");
  Prediction p;
  p.element = element_of(q);
  const double cutoff = table_.cutoff(p.element);
  if (discrete_) {
    p.region = predict_label_set(*q.pmf, cutoff, spec_.score);
  } else {
    switch (spec_.score) {
      case ScoreKind::kCd:
      case ScoreKind::kProbability:
        p.region = predict_region_cd(*q.density, cutoff);
        break;
      case ScoreKind::kHpd:
        p.region = predict_region_hpd(*q.density, cutoff);
        break;
      case ScoreKind::kDist:
        p.region = predict_region_dist(*q.density, cutoff);
        break;
      default:
        p.region = predict_region_baseline(spec_.score, *q.local, cutoff);
        break;
    }
  }
  p.region.flags |= table_.flags(p.element);
  return p;
}

FittedMethod fit_method(const MethodSpec& spec, Workbench& bench, std::uint64_t seed) {
  const bool discrete = bench.discrete();
  if (discrete && (uses_local(spec.score) || spec.score == ScoreKind::kDist)) {
    throw ConfigError("method '" + spec.label + "' needs a continuous target");
  }
  FittedMethod m;
  m.spec_ = spec;
  m.alpha_ = bench.alpha();
  m.discrete_ = discrete;
  const std::size_t J = spec.J > 0 ? spec.J : default_partition_size(bench.calibration().size());
  const double alpha = bench.alpha();

  switch (spec.partition) {
    case PartitionKind::kUnitary:
      m.partition_ = PartitionModel::unitary();
      break;
    case PartitionKind::kThresholdQuantile:
    case PartitionKind::kThresholdKMeans: {
      std::vector<double> qhat;
      if (discrete) {
        for (const Pmf& p : bench.train_pmfs()) qhat.push_back(level_quantile(p, alpha).value);
      } else {
        for (const DensityGrid& d : bench.train_densities()) qhat.push_back(level_quantile(d, alpha).value);
      }
      const ThresholdMode mode =
          spec.partition == PartitionKind::kThresholdQuantile ? ThresholdMode::kQuantile : ThresholdMode::kKMeans1d;
      m.partition_ = build_threshold_partition(qhat, J, mode, seed);
      break;
    }
    case PartitionKind::kProfileVoronoi: {
      m.z_grid_ = bench.profile_z_grid();
      std::vector<ProfileVector> profiles;
      if (discrete) {
        for (const Pmf& p : bench.train_pmfs()) profiles.push_back(make_profile(p, m.z_grid_));
      } else {
        for (const DensityGrid& d : bench.train_densities()) profiles.push_back(make_profile(d, m.z_grid_));
      }
      m.partition_ = build_profile_partition(profiles, m.z_grid_, J, seed);
      break;
    }
    case PartitionKind::kEuclideanVoronoi:
      m.partition_ = build_euclidean_partition(bench.train().feature_matrix(), bench.train().dim(), J, seed);
      break;
  }

  const Dataset& cal = bench.calibration();
  std::vector<double> scores(cal.size());
  std::vector<std::size_t> elements(cal.size());
  for (std::size_t i = 0; i < cal.size(); ++i) {
    QueryPoint q{cal.features(i)};
    if (discrete) {
      const Pmf& p = bench.calibration_pmfs()[i];
      q.pmf = &p;
      scores[i] = spec.score == ScoreKind::kHpd ? hpd_score(p, cal.label(i)) : probability_score(p, cal.label(i));
    } else if (uses_local(spec.score)) {
      const LocalSummary& s = bench.calibration_summaries()[i];
      q.local = &s;
      scores[i] = baseline_score(spec.score, s, cal.target(i));
    } else {
      const DensityGrid& d = bench.calibration_densities()[i];
      q.density = &d;
      const double y = cal.target(i);
      switch (spec.score) {
        case ScoreKind::kHpd:
          scores[i] = hpd_score(d, y);
          break;
        case ScoreKind::kDist:
          scores[i] = dist_score(d, y);
          break;
        default:
          scores[i] = cd_score(d, y);
          break;
      }
    }
    elements[i] = m.element_of(q);
  }
  m.table_ = calibrate(scores, elements, m.partition_.size(), alpha);
  return m;
}

}  // namespace cdsplit
