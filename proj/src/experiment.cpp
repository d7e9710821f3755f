#include "compclass/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "compclass/error.hpp"
#include "compclass/textio.hpp"

namespace compclass {

namespace {

constexpr double kDiversityTolerance = 0.05;

std::string pair_name(ClassPair p) {
  return "(" + std::to_string(p.first + 1) + "," + std::to_string(p.second + 1) + ")";
}

std::string fmt(double v, int precision = 6) {
  std::ostringstream out;
  out << std::setprecision(precision) << v;
  return out.str();
}

// log of the mean over matrices of exp(f(projected))
template <class F>
double log_mean_over(const std::vector<ProjectedModel>& projected, F f) {
  std::vector<double> logs;
  for (const auto& p : projected) logs.push_back(f(p));
  const double peak = *std::max_element(logs.begin(), logs.end());
  if (!std::isfinite(peak)) return peak;
  double acc = 0.0;
  for (double l : logs) acc += std::exp(l - peak);
  return peak + std::log(acc / static_cast<double>(logs.size()));
}

void check_invariants(const GmmModel& model, const SourceGeometry& src, const std::vector<ProjectedModel>& projected,
                      MResult& r) {
  // Monte Carlo never exceeds a guaranteed upper bound by more than 3 CI half-widths.
  for (const auto& row : r.curve.rows) {
    if (!row.mc) continue;
    const double valid = std::exp(log_mean_over(projected, [&](const ProjectedModel& p) {
      return log_valid_bound(p, row.sigma2);
    }));
    if (row.mc->p_hat > valid + 3.0 * row.mc->ci_half_width) {
      r.violations.push_back("Monte Carlo estimate " + fmt(row.mc->p_hat) + " exceeds bound " + fmt(valid) +
                             " + 3 CI at sigma^2 = " + fmt(row.sigma2));
    }
  }
  // Projected ranks follow min(M, source rank).
  const auto& g = r.geometry;
  for (std::size_t i = 0; i < g.ranks.size(); ++i) {
    if (g.ranks[i] != std::min(r.m, src.ranks[i])) {
      r.violations.push_back("rank of projected class " + std::to_string(i + 1) + " is " +
                             std::to_string(g.ranks[i]) + ", expected min(M, " + std::to_string(src.ranks[i]) + ")");
    }
  }
  for (const auto& [pair, rank] : g.union_ranks) {
    if (rank != std::min(r.m, src.union_ranks.at(pair))) {
      r.violations.push_back("union rank of pair " + pair_name(pair) + " is " + std::to_string(rank) +
                             ", expected min(M, " + std::to_string(src.union_ranks.at(pair)) + ")");
    }
  }
  // The measured-geometry and source-geometry predictions agree for zero-mean pairs.
  const auto priors = model.priors();
  for (const auto& [pair, p] : r.pair_predictions) {
    if ((model[pair.first].mean() - model[pair.second].mean()).squaredNorm() != 0.0) continue;
    const auto measured = predict_two_class_measured(g, priors, pair);
    const bool same = measured.regime == p.regime &&
                      (!p.diversity || std::abs(*measured.diversity - *p.diversity) < 1e-12);
    if (!same) {
      r.violations.push_back("pair " + pair_name(pair) + ": measured-geometry prediction (" +
                             std::string(to_string(measured.regime)) + ") disagrees with source-geometry prediction (" +
                             std::string(to_string(p.regime)) + ")");
    }
  }
}

void analyse(const ExperimentConfig& cfg, const GmmModel& model, const std::vector<ProjectedModel>& projected,
             MResult& r) {
  r.window = cfg.fit_window.value_or(default_fit_window(r.curve));
  const auto& pred = r.prediction;
  try {
    r.fitted_diversity = fit_diversity(r.curve, r.window);
  } catch (const ValidationError&) {
    // fewer than four grid points in the window; reported as missing
  }
  if (pred.regime == Regime::PolynomialDecay) {
    r.fitted_gain = fit_measurement_gain(r.curve, *pred.diversity, r.window);
  }
  if (pred.regime == Regime::ExponentialDecay) {
    r.exponential_correlation = exponential_decay_correlation(r.curve, r.window);
  }

  if (model.num_classes() > 2) {
    for (const auto& [pair, p] : r.pair_predictions) {
      std::vector<double> x, y;
      for (const auto& row : r.curve.rows) {
        if (!r.window.contains(row.sigma2)) continue;
        x.push_back(std::log(row.sigma2));
        y.push_back(log_mean_over(projected, [&](const ProjectedModel& pm) {
          return pm.log_pair_bound(pair.first, pair.second, row.sigma2);
        }));
      }
      if (x.size() >= 4) r.pair_fits[pair] = fit_log_slope(x, y);
    }
  }

  if (pred.regime == Regime::PolynomialDecay && r.fitted_diversity) {
    const double d = *pred.diversity;
    const double fitted = r.fitted_diversity->slope;
    if (std::abs(fitted - d) > kDiversityTolerance) {
      r.discrepancies.push_back("fitted d = " + fmt(fitted, 5) + " differs from closed-form d = " + fmt(d) +
                                " by more than " + fmt(kDiversityTolerance));
    }
    if (cfg.reference_diversity && std::abs(*cfg.reference_diversity - d) > kDiversityTolerance) {
      const double ref = *cfg.reference_diversity;
      const bool supports_formula = std::abs(fitted - d) <= std::abs(fitted - ref);
      r.discrepancies.push_back("reference d = " + fmt(ref) + " vs closed-form d = " + fmt(d) +
                                (pred.dominating_pair ? " for pair " + pair_name(*pred.dominating_pair) : "") +
                                "; fitted d = " + fmt(fitted, 5) + " supports " +
                                (supports_formula ? "the closed form (" + fmt(d) + ")"
                                                  : "the reference (" + fmt(ref) + ")"));
    }
  }
}

}  // namespace

ExperimentResult evaluate_experiment(const ExperimentConfig& cfg, bool simulate) {
  ExperimentResult result{synthesize_ensemble(cfg.rank_spec, cfg.seed, cfg.synthesis), {}, {}};
  const auto& model = result.model;
  const auto grid = cfg.grid.values();
  const SourceGeometry src = source_geometry(model);

  for (int m : cfg.m_values) {
    MResult r;
    r.m = m;
    r.phis = draw_sweep_matrices(m, model.ambient_dim(), cfg.seed, cfg.phi_draws);
    SweepOptions options;
    options.variant = cfg.union_bound;
    options.trials = simulate ? cfg.trials : 0;
    options.workers = cfg.workers;
    r.curve = sweep_error_curve(model, r.phis, grid, cfg.seed, options);

    std::vector<ProjectedModel> projected;
    for (const auto& phi : r.phis) projected.emplace_back(model, phi);
    r.geometry = measured_geometry(model, r.phis.front());
    r.pair_predictions = predict_pairs(model, r.phis.front());
    r.prediction = predict_multiclass(model, r.phis.front());
    analyse(cfg, model, projected, r);
    check_invariants(model, src, projected, r);
    for (const auto& v : r.violations) result.failures.push_back("M=" + std::to_string(m) + ": " + v);
    result.per_m.push_back(std::move(r));
  }
  return result;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

std::string csv_name(int m) { return "curve_M" + std::to_string(m) + ".csv"; }

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  const std::filesystem::path dir(cfg.output_path);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw std::runtime_error("cannot create output directory '" + dir.string() + "'");
  }
  ExperimentResult result = evaluate_experiment(cfg, true);
  for (const auto& r : result.per_m) {
    write_file(dir / csv_name(r.m), curve_csv(r.curve, cfg, result.model.ambient_dim()));
  }
  write_file(dir / "report.txt", report_text(cfg, result));
  write_file(dir / "plot.svg", plot_svg(cfg, result));
  write_file(dir / "replay.txt", replay_text(cfg, result));
  return result;
}

ReplayCheck verify_replay(const std::filesystem::path& replay_path, int workers) {
  std::ifstream in(replay_path);
  if (!in) throw std::runtime_error("cannot open replay file '" + replay_path.string() + "'");
  const auto kv = read_key_values(in);
  if (require_key(kv, "format") != "compclass-replay") throw ValidationError("not a compclass replay file");

  const GmmModel model = read_model(kv, "model");
  const std::uint64_t seed = std::stoull(require_key(kv, "seed"));
  const int phi_draws = std::stoi(require_key(kv, "phi_draws"));
  SweepOptions options;
  options.trials = std::stoll(require_key(kv, "trials"));
  options.variant = parse_union_bound_variant(require_key(kv, "union_bound"));
  options.workers = workers;
  const std::vector<double> grid = parse_values(require_key(kv, "sigma2"));
  const Eigen::Index n = model.ambient_dim();

  ReplayCheck check;
  for (double mv : parse_values(require_key(kv, "m_values"))) {
    const int m = static_cast<int>(mv);
    std::vector<Matrix> phis;
    for (int k = 1; k <= phi_draws; ++k) {
      const auto values = parse_values(require_key(kv, "phi.M" + std::to_string(m) + ".draw" + std::to_string(k)));
      if (static_cast<Eigen::Index>(values.size()) != m * n) throw ValidationError("replay: matrix size mismatch");
      phis.push_back(Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
          values.data(), m, n));
    }
    const ErrorCurve curve = sweep_error_curve(model, phis, grid, seed, options);
    const std::string expected = curve_csv(curve, seed, phi_draws, n);

    const auto csv_path = replay_path.parent_path() / csv_name(m);
    std::ifstream csv(csv_path, std::ios::binary);
    std::ostringstream actual;
    if (csv) actual << csv.rdbuf();
    (csv && actual.str() == expected ? check.matched : check.mismatched).push_back(csv_path.string());
  }
  return check;
}

}  // namespace compclass
