#include "cdsplit/scores.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <utility>

#include "cdsplit/error.hpp"

namespace cdsplit {

namespace {
constexpr std::array<std::pair<ScoreKind, const char*>, 7> kScoreNames = {{
    {ScoreKind::kCd, "cd"},
    {ScoreKind::kHpd, "hpd"},
    {ScoreKind::kDist, "dist"},
    {ScoreKind::kReg, "reg"},
    {ScoreKind::kLocalReg, "local-reg"},
    {ScoreKind::kQuantile, "quantile"},
    {ScoreKind::kProbability, "probability"},
}};
}  // namespace

std::string to_string(ScoreKind kind) {
  for (const auto& [k, name] : kScoreNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

ScoreKind parse_score_kind(const std::string& name) {
  for (const auto& [k, n] : kScoreNames) {
    if (name == n) return k;
  }
  throw ConfigError("unknown score kind '" + name + "'");
}

double cd_score(const DensityGrid& density, double y) { return density.at(y); }

double cd_score(const ConditionalDensityModel& model, std::span<const double> x, double y) {
  return cd_score(model.evaluate(x), y);
}

double cd_score(const Pmf& pmf, std::size_t label) { return pmf.at(label); }

double hpd_score(const DensityGrid& density, double y) { return level_cdf_at(density, density.at(y)); }

double hpd_score(const ConditionalDensityModel& model, std::span<const double> x, double y) {
  return hpd_score(model.evaluate(x), y);
}

double hpd_score(const Pmf& pmf, std::size_t label) { return level_cdf_at(pmf, pmf.at(label)); }

double probability_score(const Pmf& pmf, std::size_t label) { return cd_score(pmf, label); }

double probability_score(const ConditionalPmfModel& model, std::span<const double> x, std::size_t label) {
  return probability_score(model.evaluate(x), label);
}

double dist_score(const DensityGrid& density, double y) { return -std::abs(cdf_at(density, y) - 0.5); }

double baseline_score(ScoreKind kind, const LocalSummary& local, double y, bool* floored) {
  switch (kind) {
    case ScoreKind::kReg:
      return -std::abs(y - local.mean);
    case ScoreKind::kLocalReg: {
      double rho = local.mad;
      if (!(rho > kMadFloor)) {
        rho = kMadFloor;
        if (floored) *floored = true;
      }
      return -std::abs(y - local.mean) / rho;
    }
    case ScoreKind::kQuantile:
      return -std::max(local.lower_q - y, y - local.upper_q);
    default:
      throw UsageError("baseline_score handles reg, local-reg and quantile; got " + to_string(kind));
  }
}

}  // namespace cdsplit
