// compclass: run, predict and verify compressive-classification experiments.

#include <CLI11.hpp>

#include <cmath>
#include <iostream>
#include <vector>

#include "compclass/error.hpp"
#include "compclass/experiment.hpp"

namespace {

using namespace compclass;

int cmd_run(ExperimentConfig cfg) {
  const ExperimentResult result = run_experiment(cfg);
  std::cout << report_text(cfg, result);
  std::cout << "wrote " << result.per_m.size() << " CSV file(s), report.txt, plot.svg and replay.txt to "
            << cfg.output_path << '\n';
  return result.exit_status();
}

int cmd_predict(const ExperimentConfig& cfg) {
  const GmmModel model = synthesize_ensemble(cfg.rank_spec, cfg.seed, cfg.synthesis);
  std::cout << "closed-form predictions for " << cfg.name << " (seed " << cfg.seed << ")\n";
  for (int m : cfg.m_values) {
    const auto phis = draw_sweep_matrices(m, model.ambient_dim(), cfg.seed, cfg.phi_draws);
    const auto prediction = predict_multiclass(model, phis.front());
    std::cout << "M = " << m << ": " << to_string(prediction.regime);
    if (prediction.diversity) std::cout << ", d = " << *prediction.diversity;
    if (prediction.measurement_gain) std::cout << ", g_m = " << *prediction.measurement_gain;
    if (prediction.offset_unknown) std::cout << " (times unknown a > 1)";
    if (prediction.dominating_pair) {
      std::cout << ", dominating pair (" << prediction.dominating_pair->first + 1 << ","
                << prediction.dominating_pair->second + 1 << ")";
    }
    std::cout << '\n';
  }
  return 0;
}

int cmd_verify(const std::string& replay, int workers) {
  const ReplayCheck check = verify_replay(replay, workers);
  for (const auto& f : check.matched) std::cout << "MATCH    " << f << '\n';
  for (const auto& f : check.mismatched) std::cout << "MISMATCH " << f << '\n';
  std::cout << (check.ok() ? "replay verified\n" : "replay verification FAILED\n");
  return check.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compressive classification of Gaussian mixtures: bounds, asymptotics and Monte Carlo"};
  app.require_subcommand(1);

  std::string config_path;
  long long trials = -1;
  long long seed = -1;
  int workers = 0;
  std::string union_bound;
  std::string out_dir;

  auto* run = app.add_subcommand("run", "Run a sweep and write CSV, report, SVG plot and replay file");
  run->add_option("--config", config_path, "Experiment configuration file")->required()->check(CLI::ExistingFile);
  run->add_option("--trials", trials, "Monte Carlo trials per noise level")->check(CLI::NonNegativeNumber);
  run->add_option("--seed", seed, "Experiment seed")->check(CLI::NonNegativeNumber);
  run->add_option("--workers", workers, "Worker threads (default: COMPCLASS_WORKERS or all cores)")
      ->check(CLI::PositiveNumber);
  run->add_option("--union-bound", union_bound, "Multi-class bound variant")
      ->check(CLI::IsMember({"printed", "standard"}));
  run->add_option("--out", out_dir, "Output directory");
  std::vector<double> fit_decades;
  run->add_option("--fit-window", fit_decades, "Fit window as two decades, e.g. --fit-window -6 -4")
      ->expected(2);

  auto* predict = app.add_subcommand("predict", "Print closed-form regime predictions only");
  predict->add_option("--config", config_path, "Experiment configuration file")->required()->check(CLI::ExistingFile);

  std::string replay_path;
  auto* verify = app.add_subcommand("verify", "Recompute CSVs from a replay file and compare byte-for-byte");
  verify->add_option("--replay", replay_path, "replay.txt written by 'run'")->required()->check(CLI::ExistingFile);
  verify->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (verify->parsed()) return cmd_verify(replay_path, workers);
    ExperimentConfig cfg = load_config(config_path);
    if (trials >= 0) cfg.trials = trials;
    if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
    if (workers > 0) cfg.workers = workers;
    if (!union_bound.empty()) cfg.union_bound = parse_union_bound_variant(union_bound);
    if (!out_dir.empty()) cfg.output_path = out_dir;
    if (!fit_decades.empty()) {
      if (fit_decades[0] >= fit_decades[1]) throw ValidationError("--fit-window: lower decade must come first");
      cfg.fit_window = FitWindow{std::pow(10.0, fit_decades[0]), std::pow(10.0, fit_decades[1])};
    }
    if (predict->parsed()) return cmd_predict(cfg);
    return cmd_run(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
