#pragma once

#include <span>
#include <string>
#include <vector>

#include "cdsplit/cde.hpp"
#include "cdsplit/grid.hpp"
#include "cdsplit/knn.hpp"

namespace cdsplit {

// Every score follows one convention: larger means more conforming. Scores
// whose usual form is a residual are negated, so calibration always keeps
// {y : score(x, y) >= cutoff}.

enum class ScoreKind { kCd, kHpd, kDist, kReg, kLocalReg, kQuantile, kProbability };

std::string to_string(ScoreKind kind);
ScoreKind parse_score_kind(const std::string& name);

/// f(y|x) read off the grid by linear interpolation; 0 outside the grid.
double cd_score(const DensityGrid& density, double y);
double cd_score(const ConditionalDensityModel& model, std::span<const double> x, double y);
double cd_score(const Pmf& pmf, std::size_t label);

/// H(f(y|x) | x): the mass at density levels at or below the one at y.
double hpd_score(const DensityGrid& density, double y);
double hpd_score(const ConditionalDensityModel& model, std::span<const double> x, double y);
/// Sum of the pmf values <= P(label|x); ties count in full.
double hpd_score(const Pmf& pmf, std::size_t label);

/// Probability-split score, P(y|x). Identical to cd_score on the pmf.
double probability_score(const Pmf& pmf, std::size_t label);
double probability_score(const ConditionalPmfModel& model, std::span<const double> x, std::size_t label);

/// -|F(y|x) - 1/2|.
double dist_score(const DensityGrid& density, double y);

/// Floor applied to nonpositive rho(x) in the local-reg score.
inline constexpr double kMadFloor = 1e-8;

/// Regression-type baselines from a neighbourhood summary:
///   reg:       -|y - r(x)|
///   local-reg: -|y - r(x)| / rho(x)
///   quantile:  -max(q_lo(x) - y, y - q_hi(x))
/// `floored` is set when rho(x) had to be raised to kMadFloor.
double baseline_score(ScoreKind kind, const LocalSummary& local, double y, bool* floored = nullptr);

}  // namespace cdsplit
