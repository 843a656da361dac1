#include "cdsplit/datasets.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include <boost/random/gamma_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include "cdsplit/error.hpp"

namespace cdsplit {

// ---------------------------------------------------------------------------
// Dataset

Dataset::Dataset(std::size_t dim, Task task, std::size_t n_labels)
    : dim_(dim), task_(task), n_labels_(n_labels) {}

void Dataset::push_back(std::span<const double> x, double y) {
  if (x.size() != dim_) throw UsageError("feature length does not match dataset dimension");
  if (task_ == Task::kClassification) {
    if (y < 0.0 || y != std::floor(y) || static_cast<std::size_t>(y) >= n_labels_) {
      throw UsageError("classification label out of range");
    }
  }
  features_.insert(features_.end(), x.begin(), x.end());
  targets_.push_back(y);
}

void Dataset::reserve(std::size_t n) {
  features_.reserve(n * dim_);
  targets_.reserve(n);
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out(dim_, task_, n_labels_);
  out.label_names = label_names;
  out.feature_names = feature_names;
  out.reserve(rows.size());
  for (std::size_t r : rows) out.push_back(features(r), targets_[r]);
  return out;
}

// ---------------------------------------------------------------------------
// Scenarios

namespace {

constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;

double normal_pdf(double y, double mean, double variance) {
  const double z = (y - mean);
  return kInvSqrt2Pi / std::sqrt(variance) * std::exp(-0.5 * z * z / variance);
}

struct BimodalParams {
  double center;
  double half_gap;
  double variance;
};

BimodalParams bimodal_params(double x1) {
  const double f = (x1 - 1.0) * (x1 - 1.0) * (x1 + 1.0);
  const double g = x1 >= -0.5 ? 2.0 * std::sqrt(x1 + 0.5) : 0.0;
  return {f, g, 0.25 + std::abs(x1)};
}

double hetero_variance(double x1) { return 1.0 + 0.3 * std::abs(x1); }

double gamma_shape(double x1) { return 1.0 + 0.6 * std::abs(x1); }

// Gamma(shape a, rate a) density; at e = 0 the right limit is used.
double gamma_pdf(double e, double a) {
  if (e < 0.0) return 0.0;
  if (e == 0.0) return a == 1.0 ? 1.0 : 0.0;
  return std::exp(a * std::log(a) + (a - 1.0) * std::log(e) - a * e - std::lgamma(a));
}

const std::vector<std::pair<ScenarioKind, std::string>>& scenario_table() {
  static const std::vector<std::pair<ScenarioKind, std::string>> table = {
      {ScenarioKind::kHomoscedastic, "homoscedastic"},
      {ScenarioKind::kBimodal, "bimodal"},
      {ScenarioKind::kHeteroscedastic, "heteroscedastic"},
      {ScenarioKind::kAsymmetric, "asymmetric"},
      {ScenarioKind::kLogistic, "logistic"},
  };
  return table;
}

void check_dim(const Scenario& s, std::span<const double> x) {
  if (x.size() != s.d) throw UsageError("feature vector has dimension " + std::to_string(x.size()) +
                                        ", scenario expects " + std::to_string(s.d));
}

}  // namespace

void Scenario::validate() const {
  if (d == 0) throw ConfigError("scenario dimension d must be >= 1");
  if (kind == ScenarioKind::kLogistic && beta.size() < 2) {
    throw ConfigError("logistic scenario needs at least two coefficients");
  }
}

std::string to_string(ScenarioKind kind) {
  for (const auto& [k, name] : scenario_table()) {
    if (k == kind) return name;
  }
  return "unknown";
}

ScenarioKind parse_scenario_kind(const std::string& name) {
  for (const auto& [k, n] : scenario_table()) {
    if (n == name) return k;
  }
  throw ConfigError("unknown scenario '" + name + "'");
}

std::vector<std::string> scenario_names() {
  std::vector<std::string> out;
  for (const auto& entry : scenario_table()) out.push_back(entry.second);
  return out;
}

double sample_target(const Scenario& s, std::span<const double> x, Philox4x32& rng) {
  check_dim(s, x);
  const double x1 = x[0];
  switch (s.kind) {
    case ScenarioKind::kHomoscedastic:
      return boost::random::normal_distribution<double>(0.3 * x1, 1.0)(rng);
    case ScenarioKind::kBimodal: {
      const BimodalParams p = bimodal_params(x1);
      const double sign = rng.uniform01() < 0.5 ? -1.0 : 1.0;
      return boost::random::normal_distribution<double>(p.center + sign * p.half_gap,
                                                        std::sqrt(p.variance))(rng);
    }
    case ScenarioKind::kHeteroscedastic:
      return boost::random::normal_distribution<double>(0.3 * x1, std::sqrt(hetero_variance(x1)))(rng);
    case ScenarioKind::kAsymmetric: {
      const double a = gamma_shape(x1);
      return 1.5 * x1 + boost::random::gamma_distribution<double>(a, 1.0 / a)(rng);
    }
    case ScenarioKind::kLogistic: {
      const Pmf pmf = oracle_pmf(s, x);
      const double u = rng.uniform01();
      double acc = 0.0;
      for (std::size_t i = 0; i < pmf.size(); ++i) {
        acc += pmf.probs[i];
        if (u < acc) return static_cast<double>(i);
      }
      return static_cast<double>(pmf.size() - 1);
    }
  }
  return 0.0;
}

Dataset generate(const Scenario& s, std::size_t n, std::uint64_t seed) {
  s.validate();
  if (n == 0) throw ConfigError("cannot generate an empty sample (n = 0)");
  Philox4x32 rng = make_stream(seed, Stream::kData);
  Dataset out(s.d, s.task(), s.n_labels());
  out.reserve(n);
  std::vector<double> x(s.d);
  boost::random::uniform_real_distribution<double> unif(-1.5, 1.5);
  boost::random::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (double& xi : x) xi = s.kind == ScenarioKind::kLogistic ? gauss(rng) : unif(rng);
    out.push_back(x, sample_target(s, x, rng));
  }
  return out;
}

double oracle_pdf(const Scenario& s, std::span<const double> x, double y) {
  check_dim(s, x);
  const double x1 = x[0];
  switch (s.kind) {
    case ScenarioKind::kHomoscedastic:
      return normal_pdf(y, 0.3 * x1, 1.0);
    case ScenarioKind::kBimodal: {
      const BimodalParams p = bimodal_params(x1);
      return 0.5 * normal_pdf(y, p.center - p.half_gap, p.variance) +
             0.5 * normal_pdf(y, p.center + p.half_gap, p.variance);
    }
    case ScenarioKind::kHeteroscedastic:
      return normal_pdf(y, 0.3 * x1, hetero_variance(x1));
    case ScenarioKind::kAsymmetric:
      return gamma_pdf(y - 1.5 * x1, gamma_shape(x1));
    case ScenarioKind::kLogistic:
      throw UsageError("oracle_pdf is undefined for the classification scenario");
  }
  return 0.0;
}

DensityGrid oracle_density(const Scenario& s, std::span<const double> x, GridPtr grid) {
  std::vector<double> values(grid->size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = oracle_pdf(s, x, (*grid)[i]);
  return DensityGrid(std::move(grid), std::move(values));
}

Pmf oracle_pmf(const Scenario& s, std::span<const double> x) {
  check_dim(s, x);
  if (s.kind != ScenarioKind::kLogistic) throw UsageError("oracle_pmf needs the classification scenario");
  Pmf pmf;
  pmf.probs.resize(s.beta.size());
  const double top = *std::max_element(s.beta.begin(), s.beta.end(),
                                       [&](double a, double b) { return a * x[0] < b * x[0]; }) * x[0];
  for (std::size_t i = 0; i < s.beta.size(); ++i) pmf.probs[i] = std::exp(s.beta[i] * x[0] - top);
  pmf.normalize();
  return pmf;
}

std::pair<double, double> oracle_support(const Scenario& s, std::span<const double> x) {
  check_dim(s, x);
  const double x1 = x[0];
  constexpr double kSd = 6.5;  // two-sided normal tail < 1e-10
  switch (s.kind) {
    case ScenarioKind::kHomoscedastic:
      return {0.3 * x1 - kSd, 0.3 * x1 + kSd};
    case ScenarioKind::kBimodal: {
      const BimodalParams p = bimodal_params(x1);
      const double sd = std::sqrt(p.variance);
      return {p.center - p.half_gap - kSd * sd, p.center + p.half_gap + kSd * sd};
    }
    case ScenarioKind::kHeteroscedastic: {
      const double sd = std::sqrt(hetero_variance(x1));
      return {0.3 * x1 - kSd * sd, 0.3 * x1 + kSd * sd};
    }
    case ScenarioKind::kAsymmetric:
      // Gamma(a, a) with a >= 1 has tail P(e > 25) < 1e-10.
      return {1.5 * x1, 1.5 * x1 + 25.0};
    case ScenarioKind::kLogistic:
      return {0.0, static_cast<double>(s.beta.size() - 1)};
  }
  return {0.0, 0.0};
}

// ---------------------------------------------------------------------------
// CSV ingestion

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r' || s[b] == '\n')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r' || s[e - 1] == '\n')) --e;
  std::string out(s.substr(b, e - b));
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
  return out;
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    cells.push_back(trim(std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos
                                                                                          : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return cells;
}

bool parse_double(const std::string& cell, double& out) {
  if (cell.empty()) return false;
  const char* first = cell.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, cell.data() + cell.size(), out);
  return ec == std::errc() && ptr == cell.data() + cell.size() && std::isfinite(out);
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;
};

CsvTable read_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open '" + path.string() + "'");
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (!have_header) {
      if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line = line.substr(3);  // BOM
      table.header = split_row(line);
      have_header = true;
      continue;
    }
    auto cells = split_row(line);
    if (cells.size() != table.header.size()) {
      throw IngestionError(path.string() + ": row " + std::to_string(line_no) + " has " +
                           std::to_string(cells.size()) + " cells, header has " +
                           std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(cells));
    table.line_numbers.push_back(line_no);
  }
  if (!have_header) throw IngestionError(path.string() + ": file is empty");
  if (table.rows.empty()) throw IngestionError(path.string() + ": no data rows");
  return table;
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path, const std::string& target_column, Task task) {
  CsvTable table = read_table(path);
  const auto it = std::find(table.header.begin(), table.header.end(), target_column);
  if (it == table.header.end()) {
    throw IngestionError(path.string() + ": missing target column '" + target_column + "'");
  }
  const std::size_t target_idx = static_cast<std::size_t>(std::distance(table.header.begin(), it));

  std::vector<std::string> names;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (c != target_idx) names.push_back(table.header[c]);
  }

  std::vector<double> targets;
  std::vector<std::string> label_names;
  if (task == Task::kClassification) {
    std::unordered_map<std::string, std::size_t> index;
    for (const auto& row : table.rows) {
      const std::string& label = row[target_idx];
      auto [pos, inserted] = index.emplace(label, label_names.size());
      if (inserted) label_names.push_back(label);
      targets.push_back(static_cast<double>(pos->second));
    }
  }

  Dataset out(names.size(), task, label_names.size());
  out.feature_names = names;
  out.label_names = label_names;
  out.reserve(table.rows.size());
  std::vector<double> x(names.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    std::size_t f = 0;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c == target_idx) continue;
      if (!parse_double(row[c], x[f])) {
        throw IngestionError(path.string() + ": non-numeric value '" + row[c] + "' at row " +
                             std::to_string(table.line_numbers[r]) + ", column '" + table.header[c] + "'");
      }
      ++f;
    }
    double y = 0.0;
    if (task == Task::kClassification) {
      y = targets[r];
    } else if (!parse_double(row[target_idx], y)) {
      throw IngestionError(path.string() + ": non-numeric target '" + row[target_idx] + "' at row " +
                           std::to_string(table.line_numbers[r]) + ", column '" + target_column + "'");
    }
    out.push_back(x, y);
  }
  return out;
}

Dataset load_feature_csv(const std::filesystem::path& path, const std::vector<std::string>& skip) {
  CsvTable table = read_table(path);
  std::vector<std::size_t> keep;
  std::vector<std::string> names;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (std::find(skip.begin(), skip.end(), table.header[c]) == skip.end()) {
      keep.push_back(c);
      names.push_back(table.header[c]);
    }
  }
  Dataset out(keep.size(), Task::kRegression);
  out.feature_names = names;
  std::vector<double> x(keep.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    for (std::size_t f = 0; f < keep.size(); ++f) {
      const std::string& cell = table.rows[r][keep[f]];
      if (!parse_double(cell, x[f])) {
        throw IngestionError(path.string() + ": non-numeric value '" + cell + "' at row " +
                             std::to_string(table.line_numbers[r]) + ", column '" +
                             table.header[keep[f]] + "'");
      }
    }
    out.push_back(x, 0.0);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Splitting

SplitResult split_data(const Dataset& samples, double calibration_fraction, std::uint64_t seed) {
  if (!(calibration_fraction > 0.0 && calibration_fraction < 1.0)) {
    throw ConfigError("calibration fraction must lie in (0, 1)");
  }
  const std::size_t n = samples.size();
  if (n < 2) throw ConfigError("need at least 2 samples to split");
  const auto n_cal = static_cast<std::size_t>(std::llround(static_cast<double>(n) * calibration_fraction));
  if (n_cal == 0 || n_cal == n) throw ConfigError("calibration fraction leaves one side of the split empty");

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Philox4x32 rng = make_stream(seed, Stream::kSplit);
  for (std::size_t i = n - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(rng() % (i + 1));
    std::swap(perm[i], perm[j]);
  }
  SplitResult out;
  out.calibration_rows.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_cal));
  out.train_rows.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_cal), perm.end());
  std::sort(out.calibration_rows.begin(), out.calibration_rows.end());
  std::sort(out.train_rows.begin(), out.train_rows.end());
  out.train = samples.subset(out.train_rows);
  out.calibration = samples.subset(out.calibration_rows);
  return out;
}

}  // namespace cdsplit
