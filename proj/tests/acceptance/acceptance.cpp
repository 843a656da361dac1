// Acceptance suite: one PASS/FAIL line per criterion.
// Usage: cdsplit_acceptance [criterion numbers...]   (default: all)
// CDSPLIT_THREADS sets the worker count for the simulation criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "cdsplit/cde.hpp"
#include "cdsplit/conformal.hpp"
#include "cdsplit/experiment.hpp"
#include "cdsplit/metrics.hpp"
#include "cdsplit/partition.hpp"
#include "cdsplit/scores.hpp"

using namespace cdsplit;
namespace fs = std::filesystem;

namespace {

std::size_t g_threads = 1;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1e", v);
  return buf;
}

double normal_pdf(double y, double mu = 0.0, double sd = 1.0) {
  return boost::math::pdf(boost::math::normal(mu, sd), y);
}

ExperimentResult run(const std::string& json) {
  ExperimentConfig c = parse_config(json);
  c.threads = g_threads;
  ExperimentResult r = run_experiment(c);
  if (r.failed > 0) {
    for (const auto& rep : r.replications) {
      if (!rep.error.empty()) throw std::runtime_error("replication failed: " + rep.error);
    }
  }
  return r;
}

// Per-method replication metrics, keyed by label (and setting index).
std::map<std::string, std::vector<const MethodOutcome*>> by_method(const ExperimentResult& r,
                                                                   std::size_t setting = 0) {
  std::map<std::string, std::vector<const MethodOutcome*>> out;
  for (const auto& rep : r.replications) {
    if (rep.setting != setting) continue;
    for (const auto& m : rep.methods) out[m.method].push_back(&m);
  }
  return out;
}

SummaryStat stat(const std::vector<const MethodOutcome*>& rows, double ReplicationMetrics::*member) {
  std::vector<double> v;
  for (const MethodOutcome* m : rows) v.push_back(m->metrics.*member);
  return summarize(v);
}

const char* kRegressionMethods =
    R"(["cd-split", "cd-split+", "hpd-split", "reg-split", "local-reg-split", "quantile-split", "dist-split"])";

// 1. Marginal validity with one fresh test point per replication.
Verdict marginal_validity() {
  Verdict v{true, ""};
  for (const char* scenario : {"homoscedastic", "bimodal"}) {
    const auto r = run(std::string(R"({"scenario": ")") + scenario +
                       R"(", "n": 2000, "alpha": 0.1, "replications": 200, "test_size": 1, "seed": 101, "methods": )" +
                       kRegressionMethods + "}");
    for (const auto& [label, rows] : by_method(r)) {
      const double cov = stat(rows, &ReplicationMetrics::marginal_coverage).mean;
      const bool ok = cov >= 0.855 && cov <= 0.945;
      v.pass = v.pass && ok;
      v.detail += std::string(scenario) + "/" + label + "=" + fmt(cov, 3) + (ok ? "" : "(!)") + " ";
    }
  }
  return v;
}

// 2. Local validity of CD-split+: pooled per-element coverage.
Verdict local_validity() {
  Verdict v{true, ""};
  for (const char* scenario : {"homoscedastic", "bimodal"}) {
    const auto r = run(std::string(R"({"scenario": ")") + scenario +
                       R"(", "n": 2000, "replications": 40, "test_size": 500, "seed": 202, "methods": ["cd-split+"]})");
    std::map<std::size_t, std::pair<std::size_t, std::size_t>> pooled;  // element -> (covered, total)
    for (const auto& rep : r.replications) {
      for (const PointOutcome& p : rep.methods[0].points) {
        pooled[p.element].first += p.covered;
        ++pooled[p.element].second;
      }
    }
    double worst = 1.0;
    std::size_t checked = 0;
    for (const auto& [element, ct] : pooled) {
      if (ct.second < 100) continue;
      ++checked;
      worst = std::min(worst, static_cast<double>(ct.first) / static_cast<double>(ct.second));
    }
    const bool ok = worst >= 0.855 && checked > 0;
    v.pass = v.pass && ok;
    v.detail += std::string(scenario) + ": " + std::to_string(checked) + " elements, min coverage " + fmt(worst, 3) +
                " ";
  }
  return v;
}

// 3. Oracle HPD scores are U(0,1).
Verdict oracle_uniformity() {
  Scenario s;
  s.kind = ScenarioKind::kBimodal;
  const Dataset pilot = generate(s, 2000, 303);
  const auto grid = std::make_shared<const TargetGrid>(TargetGrid::spanning(pilot.targets()));
  const OracleCde oracle(s, grid);
  const Dataset draws = generate(s, 10000, 304);
  std::vector<double> u;
  for (std::size_t i = 0; i < draws.size(); ++i) u.push_back(hpd_score(oracle, draws.features(i), draws.target(i)));
  std::sort(u.begin(), u.end());
  double ks = 0.0;
  const double n = static_cast<double>(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double F = std::clamp(u[i], 0.0, 1.0);
    ks = std::max({ks, static_cast<double>(i + 1) / n - F, F - static_cast<double>(i) / n});
  }
  const double critical = 1.6276 / std::sqrt(n);
  return {ks < critical, "KS=" + fmt(ks) + " critical(1%)=" + fmt(critical)};
}

// 4. Oracle-CDE HPD-split converges to the oracle HPD set.
Verdict hpd_convergence() {
  Verdict v{true, ""};
  for (const char* scenario : {"homoscedastic", "bimodal", "heteroscedastic", "asymmetric"}) {
    const auto r = run(std::string(R"({"scenario": ")") + scenario +
                       R"(", "n": [500, 2000, 8000], "replications": 20, "test_size": 200, "seed": 404,
                          "cde": {"kind": "oracle"}, "methods": ["hpd-split"]})");
    std::vector<SummaryStat> s;
    for (std::size_t k = 0; k < 3; ++k) s.push_back(stat(by_method(r, k).at("hpd-split"), &ReplicationMetrics::mean_sym_diff));
    bool ok = s[0].mean > s[1].mean && s[1].mean > s[2].mean;
    if (std::string(scenario) == "homoscedastic") ok = ok && s[2].mean < 0.1;
    v.pass = v.pass && ok;
    v.detail += std::string(scenario) + " " + fmt(s[0].mean, 3) + ">" + fmt(s[1].mean, 3) + ">" + fmt(s[2].mean, 3) +
                (ok ? "" : "(!)") + " ";
  }
  return v;
}

// 5. Two-interval regions at x1 = 1 on the bimodal scenario.
Verdict bimodal_structure() {
  const auto r = run(R"({"scenario": "bimodal", "n": 2000, "replications": 100, "test_size": 1, "seed": 505,
                         "fixed_test_x1": 1.0, "cde": {"kind": "oracle"},
                         "methods": ["hpd-split", "cd-split+", "reg-split"]})");
  const auto m = by_method(r);
  auto two_share = [&](const std::string& label) {
    double hits = 0.0;
    for (const MethodOutcome* o : m.at(label)) hits += o->points[0].n_intervals == 2;
    return hits / static_cast<double>(m.at(label).size());
  };
  const double reg = stat(m.at("reg-split"), &ReplicationMetrics::mean_region_size).mean;
  Verdict v{true, ""};
  for (const char* label : {"hpd-split", "cd-split+"}) {
    const double share = two_share(label);
    const double size = stat(m.at(label), &ReplicationMetrics::mean_region_size).mean;
    const bool ok = share >= 0.9 && size < reg;
    v.pass = v.pass && ok;
    v.detail += std::string(label) + ": two intervals " + fmt(100.0 * share, 0) + "%, size " + fmt(size, 3) + "; ";
  }
  double reg_cov = 0.0;
  for (const MethodOutcome* o : m.at("reg-split")) reg_cov += o->points[0].cond_cov;
  reg_cov /= static_cast<double>(m.at("reg-split").size());
  // reg-split is only marginally calibrated; at x1 = 1 it undercovers, which is what keeps it short
  v.detail += "reg-split size " + fmt(reg, 3) + " with coverage " + fmt(reg_cov, 3) + " at x1=1";
  return v;
}

// 6. Conditional coverage deviation below Reg-split with 2-SE separation.
Verdict conditional_ranking() {
  Verdict v{true, ""};
  for (const char* scenario : {"bimodal", "asymmetric"}) {
    const auto r = run(std::string(R"({"scenario": ")") + scenario +
                       R"(", "n": 2000, "replications": 100, "test_size": 500, "seed": 606,
                          "methods": ["cd-split+", "hpd-split", "reg-split"]})");
    const auto m = by_method(r);
    const SummaryStat reg = stat(m.at("reg-split"), &ReplicationMetrics::cond_cov_abs_dev);
    v.detail += std::string(scenario) + ": reg " + fmt(reg.mean) + "±" + fmt(reg.se);
    for (const char* label : {"cd-split+", "hpd-split"}) {
      const SummaryStat s = stat(m.at(label), &ReplicationMetrics::cond_cov_abs_dev);
      const double gap = reg.mean - s.mean;
      const double se = std::sqrt(reg.se * reg.se + s.se * s.se);
      const bool ok = gap > 2.0 * se;
      v.pass = v.pass && ok;
      v.detail += ", " + std::string(label) + " " + fmt(s.mean) + "±" + fmt(s.se) + (ok ? "" : "(!)");
    }
    v.detail += "; ";
  }
  return v;
}

// 7. Profile distance: location family, pseudometric, irrelevant features.
Verdict profile_properties() {
  const auto wide = std::make_shared<const TargetGrid>(TargetGrid::uniform(-40.0, 45.0, 8501));
  auto normal_density = [&](double mu) {
    std::vector<double> vals;
    for (double y : wide->points()) vals.push_back(normal_pdf(y, mu));
    return DensityGrid(wide, vals);
  };
  const auto z = make_z_grid(normal_pdf(0.0));
  const ProfileVector base = make_profile(normal_density(0.0), z);
  double location = 0.0;
  for (double mu : {0.37, 2.0, 5.0, -7.25}) location = std::max(location, profile_distance(base, make_profile(normal_density(mu), z), z));

  Scenario bi;
  bi.kind = ScenarioKind::kBimodal;
  const auto g = std::make_shared<const TargetGrid>(TargetGrid::uniform(-12.0, 12.0, 1201));
  const auto zb = make_z_grid(0.9);
  Philox4x32 rng(707, 0);
  auto random_profile = [&] {
    std::vector<double> x(bi.d);
    for (double& c : x) c = -1.5 + 3.0 * rng.uniform01();
    return make_profile(oracle_density(bi, x, g), zb);
  };
  double worst_axiom = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto a = random_profile();
    const auto b = random_profile();
    const auto c = random_profile();
    const double ab = profile_distance(a, b, zb);
    const double bc = profile_distance(b, c, zb);
    const double ac = profile_distance(a, c, zb);
    worst_axiom = std::max({worst_axiom, -ab, std::abs(ab - profile_distance(b, a, zb)), ac - ab - bc,
                            profile_distance(a, a, zb)});
  }

  // Oracle CDE depends on x1 only: resampling x2..xd never moves a profile cell.
  Scenario homo;
  const auto gh = std::make_shared<const TargetGrid>(TargetGrid::uniform(-8.0, 8.0, 801));
  const OracleCde o(homo, gh);
  const Dataset train = generate(homo, 500, 708);
  const auto zh = make_z_grid(0.45);
  std::vector<ProfileVector> profiles;
  for (std::size_t i = 0; i < train.size(); ++i) profiles.push_back(make_profile(o.evaluate(train.features(i)), zh));
  const PartitionModel part = build_profile_partition(profiles, zh, 8, 709);
  std::size_t moved = 0;
  for (int t = 0; t < 500; ++t) {
    std::vector<double> x(homo.d);
    for (double& c : x) c = -1.5 + 3.0 * rng.uniform01();
    std::vector<double> shifted = x;
    for (std::size_t k = 1; k < shifted.size(); ++k) shifted[k] = -1.5 + 3.0 * rng.uniform01();
    moved += part.assign(make_profile(o.evaluate(x), zh)) != part.assign(make_profile(o.evaluate(shifted), zh));
  }
  const bool ok = location <= 1e-4 && worst_axiom <= 1e-9 && moved == 0;
  return {ok, "location max " + sci(location) + ", worst axiom violation " + sci(std::max(0.0, worst_axiom)) +
                  ", irrelevant-feature moves " + std::to_string(moved) + "/500"};
}

// 8. Classification: CD-split+ against Probability-split.
Verdict classification() {
  const auto r = run(R"({"scenario": "logistic", "n": 2000, "replications": 100, "test_size": 500, "seed": 808,
                         "methods": ["cd-split+", "probability-split"]})");
  const auto m = by_method(r);
  const SummaryStat cd = stat(m.at("cd-split+"), &ReplicationMetrics::cond_cov_abs_dev);
  const SummaryStat pr = stat(m.at("probability-split"), &ReplicationMetrics::cond_cov_abs_dev);
  const SummaryStat cd_s = stat(m.at("cd-split+"), &ReplicationMetrics::sscv);
  const SummaryStat pr_s = stat(m.at("probability-split"), &ReplicationMetrics::sscv);
  const double se = std::sqrt(cd.se * cd.se + pr.se * pr.se);
  const bool ok = cd.mean <= pr.mean + se && cd_s.mean <= pr_s.mean + 0.02;
  return {ok, "cond dev cd-split+ " + fmt(cd.mean) + "±" + fmt(cd.se) + " vs probability-split " + fmt(pr.mean) + "±" +
                  fmt(pr.se) + "; SSCV " + fmt(cd_s.mean) + " vs " + fmt(pr_s.mean)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 9. Byte-identical raw.csv for 1 and 8 threads.
Verdict determinism() {
  ExperimentConfig c = parse_config(R"({"scenario": "bimodal", "n": 1000, "replications": 16, "test_size": 100,
    "seed": 909, "methods": ["cd-split+", {"name": "cd-split", "partition": "threshold-kmeans"},
    {"name": "cd-split", "partition": "euclidean", "label": "cd-split-euclidean"}, "hpd-split", "quantile-split"]})");
  const fs::path base = fs::temp_directory_path() / "cdsplit_acceptance_determinism";
  fs::remove_all(base);
  c.threads = 1;
  write_reports(c, run_experiment(c), base / "t1");
  c.threads = 8;
  write_reports(c, run_experiment(c), base / "t8");
  const std::string a = slurp(base / "t1" / "raw.csv");
  const std::string b = slurp(base / "t8" / "raw.csv");
  fs::remove_all(base);
  return {!a.empty() && a == b, "raw.csv " + std::to_string(a.size()) + " bytes, " + (a == b ? "identical" : "DIFFERENT")};
}

// 10. Quantile and index spot checks.
Verdict unit_spots() {
  std::vector<double> scores(100);
  for (std::size_t i = 0; i < 100; ++i) scores[i] = static_cast<double>(100 - i);
  const double cutoff = calibrate(scores, 0.1).cutoff(0);

  const auto g = std::make_shared<const TargetGrid>(TargetGrid::uniform(-8.0, 8.0, 1601));
  std::vector<double> vals;
  for (double y : g->points()) vals.push_back(normal_pdf(y));
  const double h = hpd_score(DensityGrid(g, vals), 1.6449);

  std::vector<double> sizes = {1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0};
  bool covered[10] = {true, true, true, true, true, true, true, false, false, false};
  const double single = sscv(sizes, std::span<const bool>(covered, 10), 1, 0.1).value;
  const double marginal_dev = std::abs(0.7 - 0.9);

  const bool ok = cutoff == 10.0 && std::abs(h - 0.10) <= 0.01 && std::abs(single - marginal_dev) < 1e-12;
  return {ok, "cutoff " + fmt(cutoff, 1) + ", hpd_score " + fmt(h) + ", single-bin sscv " + fmt(single) +
                  " vs marginal deviation " + fmt(marginal_dev)};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Verdict()> check;
};

}  // namespace

int main(int argc, char** argv) {
  if (const char* t = std::getenv("CDSPLIT_THREADS")) g_threads = std::max<std::size_t>(1, std::strtoul(t, nullptr, 10));
  const std::vector<Criterion> all = {
      {1, "marginal validity", marginal_validity},
      {2, "local validity of cd-split+", local_validity},
      {3, "oracle hpd score uniformity", oracle_uniformity},
      {4, "convergence to the oracle hpd set", hpd_convergence},
      {5, "bimodal two-interval structure", bimodal_structure},
      {6, "conditional coverage ranking", conditional_ranking},
      {7, "profile distance properties", profile_properties},
      {8, "classification against probability-split", classification},
      {9, "determinism across thread counts", determinism},
      {10, "quantile and index spot checks", unit_spots},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failed = 0;
  int ran = 0;
  for (const Criterion& c : all) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    ++ran;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s [%d] %s: %s (%.1fs)\n", v.pass ? "PASS" : "FAIL", c.id, c.name, v.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !v.pass;
  }
  std::printf("acceptance: %d/%d criteria passed\n", ran - failed, ran);
  return failed == 0 ? 0 : 1;
}
