#include "cdsplit/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "json.hpp"

#include "cdsplit/error.hpp"
#include "cdsplit/parallel.hpp"
#include "cdsplit/rng.hpp"

namespace cdsplit {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Config

void ExperimentConfig::validate() const {
  scenario.validate();
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (replications == 0) throw ConfigError("replications must be >= 1");
  if (n_values.empty()) throw ConfigError("at least one sample size n is required");
  for (std::size_t n : n_values) {
    if (n < 4) throw ConfigError("sample size n must be >= 4");
  }
  for (std::size_t d : d_values) {
    if (d == 0) throw ConfigError("dimension d must be >= 1");
  }
  if (methods.empty()) throw ConfigError("at least one method is required");
  if (test_size == 0) throw ConfigError("test_size must be >= 1");
  if (!(calibration_fraction > 0.0 && calibration_fraction < 1.0)) {
    throw ConfigError("calibration_fraction must lie in (0, 1)");
  }
  if (sscv_bins == 0) throw ConfigError("sscv_bins must be >= 1");
  if (threads == 0) throw ConfigError("threads must be >= 1");
  const auto check_cde = [](std::size_t k, double bw) {
    if (k == 0) throw ConfigError("cde.k must be >= 1");
    if (!(bw > 0.0)) throw ConfigError("cde.bandwidth must be positive");
  };
  check_cde(cde.k, cde.bandwidth);
  for (std::size_t k : cde_k) check_cde(k, cde.bandwidth);
  for (double bw : cde_bandwidth) check_cde(cde.k, bw);
  if (cde.grid_points < 16) throw ConfigError("cde.grid_points must be >= 16");
  if (cde.grid_pad < 0.0) throw ConfigError("cde.grid_pad must be >= 0");
  if (cde.regression_k == 0) throw ConfigError("cde.regression_k must be >= 1");
  std::set<std::string> labels;
  for (const MethodEntry& m : methods) {
    if (!labels.insert(m.spec.label).second) throw ConfigError("method label '" + m.spec.label + "' used twice");
    for (std::size_t J : m.J) {
      if (J == 0) throw ConfigError("partition size J must be >= 1");
    }
    if (scenario.task() == Task::kClassification) {
      const ScoreKind s = m.spec.score;
      if (s == ScoreKind::kReg || s == ScoreKind::kLocalReg || s == ScoreKind::kQuantile || s == ScoreKind::kDist) {
        throw ConfigError("method '" + m.spec.label + "' needs a continuous target");
      }
    }
  }
  if (fixed_test_x1 && !std::isfinite(*fixed_test_x1)) throw ConfigError("fixed_test_x1 must be finite");
}

namespace {

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }) == allowed.end()) {
      throw ConfigError("unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
T get_as(const json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config field '" + key + "' has the wrong type");
  }
}

std::size_t get_count(const json& j, const std::string& key) {
  if (!j.is_number_integer() || j.get<long long>() < 0) {
    throw ConfigError("config field '" + key + "' must be a nonnegative integer");
  }
  return j.get<std::size_t>();
}

std::vector<std::size_t> get_counts(const json& j, const std::string& key) {
  std::vector<std::size_t> out;
  if (j.is_array()) {
    for (const auto& e : j) out.push_back(get_count(e, key));
    if (out.empty()) throw ConfigError("config field '" + key + "' is an empty list");
  } else {
    out.push_back(get_count(j, key));
  }
  return out;
}

std::vector<double> get_reals(const json& j, const std::string& key) {
  std::vector<double> out;
  if (j.is_array()) {
    for (const auto& e : j) out.push_back(get_as<double>(e, key));
    if (out.empty()) throw ConfigError("config field '" + key + "' is an empty list");
  } else {
    out.push_back(get_as<double>(j, key));
  }
  return out;
}

MethodEntry parse_method_entry(const json& j) {
  if (j.is_string()) return MethodEntry{make_method(j.get<std::string>()), {}};
  if (!j.is_object()) throw ConfigError("each method must be a name or an object");
  reject_unknown_keys(j, {"name", "partition", "J", "label"}, "method");
  if (!j.contains("name")) throw ConfigError("method object needs a 'name'");
  const auto name = get_as<std::string>(j["name"], "name");
  std::optional<std::string> partition;
  if (j.contains("partition")) partition = get_as<std::string>(j["partition"], "partition");
  MethodEntry e{make_method(name, partition), {}};
  if (j.contains("J")) e.J = get_counts(j["J"], "J");
  if (j.contains("label")) e.spec.label = get_as<std::string>(j["label"], "label");
  if (e.spec.label.empty() || e.spec.label.find_first_of(",\"\n") != std::string::npos) {
    throw ConfigError("method label must be nonempty and free of commas and quotes");
  }
  return e;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown_keys(j,
                      {"scenario", "n", "d", "alpha", "methods", "J", "cde", "replications", "seed", "test_size",
                       "calibration_fraction", "sscv_bins", "output", "threads", "fixed_test_x1", "write_regions",
                       "cde_loss", "description"},
                      "config");
  ExperimentConfig c;
  if (!j.contains("scenario")) throw ConfigError("config needs a 'scenario'");
  const json& s = j["scenario"];
  if (s.is_string()) {
    c.scenario.kind = parse_scenario_kind(s.get<std::string>());
  } else if (s.is_object()) {
    reject_unknown_keys(s, {"name", "d", "beta"}, "scenario");
    if (!s.contains("name")) throw ConfigError("scenario object needs a 'name'");
    c.scenario.kind = parse_scenario_kind(get_as<std::string>(s["name"], "scenario.name"));
    if (s.contains("d")) c.scenario.d = get_count(s["d"], "scenario.d");
    if (s.contains("beta")) c.scenario.beta = get_reals(s["beta"], "scenario.beta");
  } else {
    throw ConfigError("'scenario' must be a name or an object");
  }
  if (j.contains("n")) c.n_values = get_counts(j["n"], "n");
  if (j.contains("d")) c.d_values = get_counts(j["d"], "d");
  if (j.contains("alpha")) c.alpha = get_as<double>(j["alpha"], "alpha");
  if (!j.contains("methods") || !j["methods"].is_array()) throw ConfigError("config needs a 'methods' list");
  for (const auto& m : j["methods"]) c.methods.push_back(parse_method_entry(m));
  if (j.contains("J")) {
    const std::vector<std::size_t> sweep = get_counts(j["J"], "J");
    for (MethodEntry& m : c.methods) {
      if (m.spec.partition != PartitionKind::kUnitary && m.J.empty()) m.J = sweep;
    }
  }
  if (j.contains("cde")) {
    const json& d = j["cde"];
    if (!d.is_object()) throw ConfigError("'cde' must be an object");
    reject_unknown_keys(d, {"kind", "k", "bandwidth", "grid_points", "grid_pad", "regression_k"}, "cde");
    if (d.contains("kind")) {
      const auto kind = get_as<std::string>(d["kind"], "cde.kind");
      if (kind == "oracle") {
        c.cde.oracle = true;
      } else if (kind != "knn") {
        throw ConfigError("cde.kind must be 'knn' or 'oracle'");
      }
    }
    if (d.contains("k")) {
      c.cde_k = get_counts(d["k"], "cde.k");
      c.cde.k = c.cde_k.front();
      if (c.cde_k.size() == 1) c.cde_k.clear();
    }
    if (d.contains("bandwidth")) {
      c.cde_bandwidth = get_reals(d["bandwidth"], "cde.bandwidth");
      c.cde.bandwidth = c.cde_bandwidth.front();
      if (c.cde_bandwidth.size() == 1) c.cde_bandwidth.clear();
    }
    if (d.contains("grid_points")) c.cde.grid_points = get_count(d["grid_points"], "cde.grid_points");
    if (d.contains("grid_pad")) c.cde.grid_pad = get_as<double>(d["grid_pad"], "cde.grid_pad");
    if (d.contains("regression_k")) c.cde.regression_k = get_count(d["regression_k"], "cde.regression_k");
  }
  if (j.contains("replications")) c.replications = get_count(j["replications"], "replications");
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned() && !(j["seed"].is_number_integer() && j["seed"].get<long long>() >= 0)) {
      throw ConfigError("seed must be a nonnegative integer");
    }
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("test_size")) c.test_size = get_count(j["test_size"], "test_size");
  if (j.contains("calibration_fraction")) {
    c.calibration_fraction = get_as<double>(j["calibration_fraction"], "calibration_fraction");
  }
  if (j.contains("sscv_bins")) c.sscv_bins = get_count(j["sscv_bins"], "sscv_bins");
  if (j.contains("output")) c.output = get_as<std::string>(j["output"], "output");
  if (j.contains("threads")) c.threads = get_count(j["threads"], "threads");
  if (j.contains("fixed_test_x1")) c.fixed_test_x1 = get_as<double>(j["fixed_test_x1"], "fixed_test_x1");
  if (j.contains("write_regions")) c.write_regions = get_as<bool>(j["write_regions"], "write_regions");
  if (j.contains("cde_loss")) c.cde_loss = get_as<bool>(j["cde_loss"], "cde_loss");
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const ExperimentConfig& c) {
  json j;
  j["scenario"] = {{"name", to_string(c.scenario.kind)}, {"d", c.scenario.d}, {"beta", c.scenario.beta}};
  j["n"] = c.n_values;
  j["d"] = c.d_values.empty() ? std::vector<std::size_t>{c.scenario.d} : c.d_values;
  j["alpha"] = c.alpha;
  json methods = json::array();
  for (const MethodEntry& m : c.methods) {
    json e = {{"label", m.spec.label},
              {"score", to_string(m.spec.score)},
              {"partition", to_string(m.spec.partition)}};
    if (m.J.empty()) {
      e["J"] = "default";
    } else {
      e["J"] = m.J;
    }
    methods.push_back(e);
  }
  j["methods"] = methods;
  j["cde"] = {{"kind", c.cde.oracle ? "oracle" : "knn"},
              {"k", c.cde_k.empty() ? std::vector<std::size_t>{c.cde.k} : c.cde_k},
              {"bandwidth", c.cde_bandwidth.empty() ? std::vector<double>{c.cde.bandwidth} : c.cde_bandwidth},
              {"grid_points", c.cde.grid_points},
              {"grid_pad", c.cde.grid_pad},
              {"regression_k", c.cde.regression_k}};
  j["replications"] = c.replications;
  j["seed"] = c.seed;
  j["test_size"] = c.test_size;
  j["calibration_fraction"] = c.calibration_fraction;
  j["sscv_bins"] = c.sscv_bins;
  j["output"] = c.output.string();
  j["threads"] = c.threads;
  if (c.fixed_test_x1) j["fixed_test_x1"] = *c.fixed_test_x1;
  j["write_regions"] = c.write_regions;
  j["cde_loss"] = c.cde_loss;
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Running

std::vector<Setting> expand_settings(const ExperimentConfig& c) {
  const std::vector<std::size_t> ds = c.d_values.empty() ? std::vector<std::size_t>{c.scenario.d} : c.d_values;
  const std::vector<std::size_t> ks = c.cde_k.empty() ? std::vector<std::size_t>{c.cde.k} : c.cde_k;
  const std::vector<double> bws =
      c.cde_bandwidth.empty() ? std::vector<double>{c.cde.bandwidth} : c.cde_bandwidth;
  const bool tagged = ks.size() > 1 || bws.size() > 1;
  std::vector<Setting> out;
  for (std::size_t n : c.n_values) {
    for (std::size_t d : ds) {
      for (std::size_t k : ks) {
        for (double bw : bws) {
          Setting s{n, d, c.cde, ""};
          s.cde.k = k;
          s.cde.bandwidth = bw;
          if (tagged) s.suffix = "@k=" + std::to_string(k) + ";bw=" + format_number(bw);
          out.push_back(s);
        }
      }
    }
  }
  return out;
}

std::uint64_t replication_seed(std::uint64_t master, std::size_t n, std::size_t d, std::size_t replication) {
  return derive_seed(master, n, d, replication);
}

namespace {

Dataset make_test_set(const ExperimentConfig& c, const Scenario& scenario, std::uint64_t seed) {
  Dataset test = generate(scenario, c.test_size, seed);
  if (!c.fixed_test_x1) return test;
  Dataset pinned(scenario.d, scenario.task(), scenario.n_labels());
  pinned.reserve(test.size());
  Philox4x32 rng = make_stream(seed, Stream::kTest);
  std::vector<double> x(scenario.d);
  for (std::size_t i = 0; i < test.size(); ++i) {
    const auto row = test.features(i);
    std::copy(row.begin(), row.end(), x.begin());
    x[0] = *c.fixed_test_x1;
    const double y = sample_target(scenario, x, rng);
    pinned.push_back(x, y);
  }
  return pinned;
}

}  // namespace

ReplicationResult run_replication(const ExperimentConfig& c, const Setting& setting, std::size_t setting_index,
                                  std::size_t replication) {
  ReplicationResult out;
  out.setting = setting_index;
  out.replication = replication;
  Scenario scenario = c.scenario;
  scenario.d = setting.d;
  const std::uint64_t seed = replication_seed(c.seed, setting.n, setting.d, replication);
  const Dataset data = generate(scenario, setting.n, derive_seed(seed, 1));
  SplitResult split = split_data(data, c.calibration_fraction, derive_seed(seed, 2));
  const Dataset test = make_test_set(c, scenario, derive_seed(seed, 3));
  const std::size_t n_cal = split.calibration.size();
  Workbench bench(std::move(split.train), std::move(split.calibration), setting.cde, c.alpha, &scenario);

  // Fit every (method, J) pair on the shared workbench.
  struct Job {
    std::string label;
    std::size_t J;
    FittedMethod fitted;
  };
  std::vector<Job> jobs;
  bool need_density = false;
  bool need_local = false;
  for (std::size_t mi = 0; mi < c.methods.size(); ++mi) {
    const MethodEntry& entry = c.methods[mi];
    const bool partitioned = entry.spec.partition != PartitionKind::kUnitary;
    std::vector<std::size_t> Js = entry.J;
    if (Js.empty()) Js.push_back(partitioned ? default_partition_size(n_cal) : 1);
    for (std::size_t J : Js) {
      MethodSpec spec = entry.spec;
      spec.J = J;
      FittedMethod f = fit_method(spec, bench, derive_seed(seed, 4, mi, J));
      need_density = need_density || f.needs_density();
      need_local = need_local || f.needs_local();
      jobs.push_back({entry.spec.label + setting.suffix, partitioned ? J : 1, std::move(f)});
    }
  }

  // Per test point: estimated law, regression summary and oracle reference,
  // shared by all methods.
  const std::size_t m = test.size();
  std::vector<std::vector<PointOutcome>> points(jobs.size(), std::vector<PointOutcome>(m));
  std::vector<std::vector<PredictionRegion>> regions(jobs.size());
  if (c.write_regions) {
    for (auto& r : regions) r.resize(m);
  }
  for (std::size_t i = 0; i < m; ++i) {
    const auto x = test.features(i);
    const double y = test.target(i);
    QueryPoint q{x};
    DensityGrid density;
    Pmf pmf;
    LocalSummary local;
    if (need_density) {
      if (bench.discrete()) {
        pmf = bench.pmf_model().evaluate(x);
        q.pmf = &pmf;
      } else {
        density = bench.density_model().evaluate(x);
        q.density = &density;
      }
    }
    if (need_local) {
      local = bench.regressor().summarize(x);
      q.local = &local;
    }
    const OracleReference oracle = make_oracle_reference(scenario, x, c.alpha);
    for (std::size_t k = 0; k < jobs.size(); ++k) {
      Prediction p = jobs[k].fitted.predict(q);
      PointOutcome& o = points[k][i];
      o.size = p.region.size();
      o.covered = p.region.contains(y);
      o.cond_cov = conditional_coverage(p.region, oracle);
      if (!oracle.discrete) o.sym_diff = hpd_symmetric_difference(p.region, oracle);
      o.element = p.element;
      o.n_intervals = p.region.intervals.size();
      o.flags = p.region.flags | oracle.flags;
      if (c.write_regions) regions[k][i] = std::move(p.region);
    }
  }

  for (std::size_t k = 0; k < jobs.size(); ++k) {
    MethodOutcome mo;
    mo.method = jobs[k].label;
    mo.J = jobs[k].J;
    mo.metrics = summarize_points(points[k], c.alpha, c.sscv_bins);
    mo.points = std::move(points[k]);
    mo.regions = std::move(regions[k]);
    mo.warnings = jobs[k].fitted.warnings();
    out.methods.push_back(std::move(mo));
  }
  if (c.cde_loss) {
    out.cde_loss = bench.discrete() ? estimate_cde_loss(bench.pmf_model(), test)
                                    : estimate_cde_loss(bench.density_model(), test);
  }
  if (c.write_regions) out.test = test;
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& c, const Logger& log) {
  c.validate();
  ExperimentResult result;
  result.settings = expand_settings(c);
  const std::size_t R = c.replications;
  const std::size_t total = result.settings.size() * R;
  result.replications.resize(total);
  parallel_for(total, c.threads, [&](std::size_t t) {
    const std::size_t s = t / R;
    const std::size_t r = t % R;
    try {
      result.replications[t] = run_replication(c, result.settings[s], s, r);
    } catch (const std::exception& e) {
      ReplicationResult failed;
      failed.setting = s;
      failed.replication = r;
      failed.error = e.what();
      if (failed.error.empty()) failed.error = "unknown error";
      result.replications[t] = std::move(failed);
    }
  });
  for (const ReplicationResult& r : result.replications) {
    if (!r.error.empty()) {
      ++result.failed;
      if (log) log("replication " + std::to_string(r.replication) + " failed: " + r.error);
    }
  }
  if (log) {
    std::set<std::string> seen;
    for (const ReplicationResult& r : result.replications) {
      for (const MethodOutcome& m : r.methods) {
        for (const std::string& w : m.warnings) {
          if (seen.insert(m.method + ": " + w).second) log("warning (" + m.method + "): " + w);
        }
      }
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Reports

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::string sanitize(std::string s) {
  for (char& ch : s) {
    if (ch == ',' || ch == '\n' || ch == '\r' || ch == '"') ch = ' ';
  }
  return s;
}

constexpr const char* kRawHeader =
    "replication,method,n,d,J,marginal_coverage,cond_cov_abs_dev,mean_region_size,sscv,mean_sym_diff,flags\n";

std::string raw_row(std::size_t rep, const std::string& method, std::size_t n, std::size_t d, std::size_t J,
                    const ReplicationMetrics& m) {
  std::string row = std::to_string(rep) + "," + method + "," + std::to_string(n) + "," + std::to_string(d) + "," +
                    std::to_string(J) + "," + format_number(m.marginal_coverage) + "," +
                    format_number(m.cond_cov_abs_dev) + "," + format_number(m.mean_region_size) + "," +
                    format_number(m.sscv) + "," + format_number(m.mean_sym_diff) + "," + sanitize(m.flags) + "\n";
  return row;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

// Method labels and J values in first-seen order, for failed-row output.
std::vector<std::pair<std::string, std::size_t>> method_rows(const ExperimentConfig& c, const Setting& s) {
  const std::size_t n_cal = static_cast<std::size_t>(std::llround(static_cast<double>(s.n) * c.calibration_fraction));
  std::vector<std::pair<std::string, std::size_t>> rows;
  for (const MethodEntry& m : c.methods) {
    const bool partitioned = m.spec.partition != PartitionKind::kUnitary;
    if (m.J.empty()) {
      rows.emplace_back(m.spec.label + s.suffix, partitioned ? default_partition_size(n_cal) : 1);
    } else {
      for (std::size_t J : m.J) rows.emplace_back(m.spec.label + s.suffix, partitioned ? J : 1);
    }
  }
  return rows;
}

}  // namespace

std::string format_region(const PredictionRegion& region) {
  std::string out;
  if (region.discrete) {
    for (std::size_t l : region.labels) {
      if (!out.empty()) out += ';';
      out += std::to_string(l);
    }
    return out;
  }
  for (const Interval& iv : region.intervals) {
    if (!out.empty()) out += ';';
    out += format_number(iv.lo) + ":" + format_number(iv.hi);
  }
  return out;
}

PredictionRegion parse_region(const std::string& text, bool discrete) {
  PredictionRegion r;
  r.discrete = discrete;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ';')) {
    if (part.empty()) continue;
    try {
      if (discrete) {
        r.labels.push_back(static_cast<std::size_t>(std::stoull(part)));
      } else {
        const auto colon = part.find(':');
        if (colon == std::string::npos) throw ConfigError("interval '" + part + "' lacks ':'");
        r.intervals.push_back({std::stod(part.substr(0, colon)), std::stod(part.substr(colon + 1))});
      }
    } catch (const std::logic_error&) {
      throw ConfigError("malformed region '" + text + "'");
    }
  }
  std::sort(r.labels.begin(), r.labels.end());
  if (r.empty()) r.flags |= kFlagEmpty;
  return r;
}

void write_reports(const ExperimentConfig& c, const ExperimentResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);

  std::string raw = kRawHeader;
  // (setting, method, J) -> metric columns across replications
  using Key = std::tuple<std::size_t, std::string, std::size_t>;
  std::map<Key, std::vector<ReplicationMetrics>> groups;
  std::vector<Key> order;
  for (const ReplicationResult& r : result.replications) {
    const Setting& s = result.settings[r.setting];
    if (!r.error.empty()) {
      for (const auto& [label, J] : method_rows(c, s)) {
        ReplicationMetrics m;
        m.marginal_coverage = std::numeric_limits<double>::quiet_NaN();
        m.mean_region_size = std::numeric_limits<double>::quiet_NaN();
        m.sscv = std::numeric_limits<double>::quiet_NaN();
        m.flags = "error=" + r.error;
        raw += raw_row(r.replication, label, s.n, s.d, J, m);
      }
      continue;
    }
    for (const MethodOutcome& mo : r.methods) {
      raw += raw_row(r.replication, mo.method, s.n, s.d, mo.J, mo.metrics);
      const Key key{r.setting, mo.method, mo.J};
      auto [it, inserted] = groups.try_emplace(key);
      if (inserted) order.push_back(key);
      it->second.push_back(mo.metrics);
    }
  }
  write_file(dir / "raw.csv", raw);

  std::sort(order.begin(), order.end(), [](const Key& a, const Key& b) { return a < b; });
  std::string summary = "method,n,d,J,metric,mean,se,count\n";
  for (const Key& key : order) {
    const auto& [setting, method, J] = key;
    const Setting& s = result.settings[setting];
    const auto& rows = groups.at(key);
    const std::pair<const char*, double ReplicationMetrics::*> columns[] = {
        {"marginal_coverage", &ReplicationMetrics::marginal_coverage},
        {"cond_cov_abs_dev", &ReplicationMetrics::cond_cov_abs_dev},
        {"mean_region_size", &ReplicationMetrics::mean_region_size},
        {"sscv", &ReplicationMetrics::sscv},
        {"mean_sym_diff", &ReplicationMetrics::mean_sym_diff},
    };
    for (const auto& [name, member] : columns) {
      std::vector<double> values;
      values.reserve(rows.size());
      for (const ReplicationMetrics& m : rows) values.push_back(m.*member);
      const SummaryStat st = summarize(values);
      summary += method + "," + std::to_string(s.n) + "," + std::to_string(s.d) + "," + std::to_string(J) + "," +
                 name + "," + format_number(st.mean) + "," + format_number(st.se) + "," +
                 std::to_string(st.count) + "\n";
    }
  }
  write_file(dir / "summary.csv", summary);
  write_file(dir / "config_echo.json", config_to_json(c));

  if (c.cde_loss) {
    std::string text = "replication,n,d,cde_k,cde_bandwidth,cde_loss\n";
    for (const ReplicationResult& r : result.replications) {
      const Setting& s = result.settings[r.setting];
      text += std::to_string(r.replication) + "," + std::to_string(s.n) + "," + std::to_string(s.d) + "," +
              std::to_string(s.cde.k) + "," + format_number(s.cde.bandwidth) + "," + format_number(r.cde_loss) + "\n";
    }
    write_file(dir / "cde_loss.csv", text);
  }

  if (c.write_regions) {
    std::string text = "replication,method,n,d,J,test_index,x,y,flags,region\n";
    for (const ReplicationResult& r : result.replications) {
      if (!r.error.empty()) continue;
      const Setting& s = result.settings[r.setting];
      for (const MethodOutcome& mo : r.methods) {
        for (std::size_t i = 0; i < mo.regions.size(); ++i) {
          std::string x;
          for (double v : r.test.features(i)) {
            if (!x.empty()) x += ';';
            x += format_number(v);
          }
          text += std::to_string(r.replication) + "," + mo.method + "," + std::to_string(s.n) + "," +
                  std::to_string(s.d) + "," + std::to_string(mo.J) + "," + std::to_string(i) + "," + x + "," +
                  format_number(r.test.target(i)) + "," + std::to_string(mo.regions[i].flags) + "," +
                  format_region(mo.regions[i]) + "\n";
        }
      }
    }
    write_file(dir / "regions.csv", text);
  }
}

std::string evaluate_regions_csv(const ExperimentConfig& c, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open regions file '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("regions file is empty");
  if (line.rfind("replication,method,n,d,J,test_index,x,y,flags,region", 0) != 0) {
    throw ConfigError("regions file has an unexpected header");
  }
  struct Group {
    std::size_t rep, n, d, J;
    std::string method;
    std::vector<PointOutcome> points;
  };
  std::vector<Group> groups;
  std::map<std::tuple<std::size_t, std::string, std::size_t, std::size_t, std::size_t>, std::size_t> index;
  const bool discrete = c.scenario.task() == Task::kClassification;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (f.size() != 10) throw ConfigError("regions file line " + std::to_string(line_no) + ": expected 10 fields");
    try {
      const std::size_t rep = std::stoull(f[0]);
      const std::size_t n = std::stoull(f[2]);
      const std::size_t d = std::stoull(f[3]);
      const std::size_t J = std::stoull(f[4]);
      std::vector<double> x;
      std::stringstream xs(f[6]);
      std::string v;
      while (std::getline(xs, v, ';')) x.push_back(std::stod(v));
      const double y = std::stod(f[7]);
      const auto flags = static_cast<std::uint32_t>(std::stoul(f[8]));
      Scenario scenario = c.scenario;
      scenario.d = d;
      if (x.size() != d) throw ConfigError("feature count does not match d");
      PredictionRegion region = parse_region(f[9], discrete);
      const OracleReference oracle = make_oracle_reference(scenario, x, c.alpha);
      PointOutcome o;
      o.size = region.size();
      o.covered = region.contains(y);
      o.cond_cov = conditional_coverage(region, oracle);
      if (!discrete) o.sym_diff = hpd_symmetric_difference(region, oracle);
      o.flags = flags | oracle.flags;
      const auto key = std::make_tuple(rep, f[1], n, d, J);
      auto it = index.find(key);
      if (it == index.end()) {
        it = index.emplace(key, groups.size()).first;
        groups.push_back({rep, n, d, J, f[1], {}});
      }
      groups[it->second].points.push_back(o);
    } catch (const std::logic_error& e) {
      throw ConfigError("regions file line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  std::string raw = kRawHeader;
  for (const Group& g : groups) {
    raw += raw_row(g.rep, g.method, g.n, g.d, g.J, summarize_points(g.points, c.alpha, c.sscv_bins));
  }
  return raw;
}

}  // namespace cdsplit
