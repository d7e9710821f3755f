#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "compclass/asymptotics.hpp"
#include "compclass/gmm.hpp"
#include "compclass/montecarlo.hpp"

namespace compclass {

/// Noise variances 10^(start - k / points_per_decade), k = 0 .. (start - stop) * points_per_decade.
struct SigmaGridSpec {
  int start_decade = 0;
  int stop_decade = -6;
  int points_per_decade = 10;

  std::vector<double> values() const;
};

struct ExperimentConfig {
  std::string name = "experiment";
  RankSpec rank_spec;
  SynthesisOptions synthesis;
  std::vector<int> m_values;
  int phi_draws = 1;
  SigmaGridSpec grid;
  long long trials = 1'000'000;
  std::uint64_t seed = 1;
  UnionBoundVariant union_bound = UnionBoundVariant::AsPrinted;
  std::optional<FitWindow> fit_window;
  std::optional<double> reference_diversity;
  std::string output_path = "out";
  int workers = 0;
};

/// Parses the line-oriented `[section]` / `key = value` format documented in
/// the README. Unknown keys, unknown sections and invariant violations throw
/// ConfigError carrying the offending line number.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Everything computed for one number of measurements.
struct MResult {
  int m = 0;
  std::vector<Matrix> phis;
  ErrorCurve curve;
  RegimePrediction prediction;
  std::map<ClassPair, RegimePrediction> pair_predictions;
  MeasuredGeometry geometry;
  FitWindow window;
  std::optional<DiversityFit> fitted_diversity;
  std::optional<double> fitted_gain;
  std::optional<double> exponential_correlation;
  std::map<ClassPair, DiversityFit> pair_fits;  // multi-class only
  std::vector<std::string> discrepancies;
  std::vector<std::string> violations;
};

struct ExperimentResult {
  GmmModel model;
  std::vector<MResult> per_m;
  std::vector<std::string> failures;  // violated run invariants
  int exit_status() const { return failures.empty() ? 0 : 1; }
};

/// Closed-form analysis, bound sweep and (when trials > 0) Monte Carlo for
/// every M. Does not touch the filesystem.
ExperimentResult evaluate_experiment(const ExperimentConfig& cfg, bool simulate = true);

/// evaluate_experiment followed by writing curve_M<m>.csv, report.txt,
/// plot.svg and replay.txt into `cfg.output_path`.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// ---- output formats ----

/// Decimal text for exp(log_value), including values below the double range.
std::string format_from_log(double log_value);

std::string curve_csv(const ErrorCurve& curve, std::uint64_t seed, int phi_draws, Eigen::Index n_ambient);
std::string curve_csv(const ErrorCurve& curve, const ExperimentConfig& cfg, Eigen::Index n_ambient);
std::string report_text(const ExperimentConfig& cfg, const ExperimentResult& result);
std::string plot_svg(const ExperimentConfig& cfg, const ExperimentResult& result);
std::string replay_text(const ExperimentConfig& cfg, const ExperimentResult& result);

struct ReplayCheck {
  std::vector<std::string> matched;
  std::vector<std::string> mismatched;
  bool ok() const { return mismatched.empty() && !matched.empty(); }
};

/// Recomputes every CSV from a replay file and compares it byte-for-byte with
/// the CSV files next to it.
ReplayCheck verify_replay(const std::filesystem::path& replay_path, int workers = 0);

}  // namespace compclass
