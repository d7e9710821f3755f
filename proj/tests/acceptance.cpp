// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "compclass/asymptotics.hpp"
#include "compclass/bounds.hpp"
#include "compclass/experiment.hpp"
#include "compclass/map_classifier.hpp"
#include "compclass/montecarlo.hpp"
#include "oracles.hpp"

using namespace compclass;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

ExperimentConfig bundled(const char* name) { return load_config(fs::path(COMPCLASS_CONFIG_DIR) / name); }

GmmModel model_for(const ExperimentConfig& cfg) { return synthesize_ensemble(cfg.rank_spec, cfg.seed, cfg.synthesis); }

Matrix phi_for(const ExperimentConfig& cfg, int m) { return draw_sweep_matrices(m, cfg.rank_spec.ambient_dim, cfg.seed).front(); }

double log_bound(const ProjectedModel& p, double s2, UnionBoundVariant v) { return p.log_multiclass_bound(s2, v); }

std::string fmt(double x, int precision = 4) {
  std::ostringstream s;
  s.precision(precision);
  s << x;
  return s.str();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Floor test shared by criteria 1 and 4: relative change of the bound from 1e-6 to 1e-8.
double floor_change(const ProjectedModel& p, UnionBoundVariant v) {
  return std::abs(std::expm1(log_bound(p, 1e-8, v) - log_bound(p, 1e-6, v)));
}

Outcome floor_detection() {
  const auto cfg = bundled("fig1.cfg");
  const auto model = model_for(cfg);
  Outcome out;
  for (int m = 1; m <= 6; ++m) {
    const ProjectedModel p(model, phi_for(cfg, m));
    if (m <= 2) {
      const double change = floor_change(p, cfg.union_bound);
      const bool ok = change < 0.01;
      out.pass &= ok;
      out.detail += " M=" + std::to_string(m) + ":rel-change=" + fmt(change, 2) + (ok ? "" : "(>=1%)");
    } else {
      const double ratio = std::exp(log_bound(p, 1e-6, cfg.union_bound) - log_bound(p, 1e-8, cfg.union_bound));
      const bool ok = ratio >= 10.0;
      out.pass &= ok;
      out.detail += " M=" + std::to_string(m) + ":ratio=" + fmt(ratio, 3) + (ok ? "" : "(<10)");
    }
  }
  return out;
}

ErrorCurve bound_only_curve(const GmmModel& model, const ExperimentConfig& cfg, int m) {
  return sweep_error_curve(model, m, cfg.grid.values(), 0, cfg.seed, cfg.union_bound);
}

Outcome diversity_slopes() {
  const auto cfg = bundled("fig1.cfg");
  const auto model = model_for(cfg);
  const std::vector<double> expected{0.25, 0.75, 0.75, 0.75};
  Outcome out;
  for (int m = 3; m <= 6; ++m) {
    const auto curve = bound_only_curve(model, cfg, m);
    const double d_hat = fit_diversity(curve, default_fit_window(curve)).slope;
    const double d = expected[m - 3];
    const bool ok = std::abs(d_hat - d) <= 0.05;
    out.pass &= ok;
    out.detail += " M=" + std::to_string(m) + ":d^=" + fmt(d_hat) + "(d=" + fmt(d) + ")";
  }
  return out;
}

Outcome gain_ordering() {
  const auto cfg = bundled("fig1.cfg");
  const auto model = model_for(cfg);
  const FitWindow window{1e-6, 1e-5};
  Outcome out;
  std::map<int, double> fitted;
  for (int m : {4, 6}) {
    const auto prediction = predict_multiclass(model, phi_for(cfg, m));
    const auto curve = bound_only_curve(model, cfg, m);
    fitted[m] = fit_measurement_gain(curve, *prediction.diversity, window);
    const double closed = *prediction.measurement_gain;
    const double rel = std::abs(closed - fitted[m]) / fitted[m];
    const bool ok = rel <= 0.10;
    out.pass &= ok;
    out.detail += " M=" + std::to_string(m) + ":g^=" + fmt(fitted[m]) + ",g=" + fmt(closed) + ",rel=" + fmt(rel, 2);
  }
  const bool ordered = fitted[6] > fitted[4];
  out.pass &= ordered;
  out.detail += ordered ? " g^(6)>g^(4)" : " g^(6)<=g^(4)";
  return out;
}

Outcome nonzero_mean_dichotomy() {
  const auto cfg = bundled("fig2.cfg");
  const auto model = model_for(cfg);
  Outcome out;
  for (int m = 1; m <= 6; ++m) {
    const Matrix phi = phi_for(cfg, m);
    const ProjectedModel p(model, phi);
    if (m <= 2) {
      const double change = floor_change(p, cfg.union_bound);
      const bool ok = change < 0.01;
      out.pass &= ok;
      out.detail += " M=" + std::to_string(m) + ":floor,rel-change=" + fmt(change, 2);
    } else {
      ErrorCurve curve;
      for (double s2 : SigmaGridSpec{-2, -4, 10}.values())
        curve.rows.push_back({s2, log_bound(p, s2, cfg.union_bound), std::nullopt});
      const double r = exponential_decay_correlation(curve, {1e-4, 1e-2});
      const bool ok = r <= -0.999 && predict_multiclass(model, phi).regime == Regime::ExponentialDecay;
      out.pass &= ok;
      out.detail += " M=" + std::to_string(m) + ":corr=" + fmt(r, 7);
    }
  }
  return out;
}

Outcome multiclass_dominance() {
  auto cfg = bundled("fig3.cfg");
  cfg.trials = 0;
  const auto result = evaluate_experiment(cfg, false);
  Outcome out;
  for (const auto& r : result.per_m) {
    if (r.prediction.regime != Regime::PolynomialDecay) continue;
    double min_pair = 1e300;
    for (const auto& [pair, fit] : r.pair_fits) min_pair = std::min(min_pair, fit.slope);
    const double union_slope = r.fitted_diversity->slope;
    const bool slope_ok = std::abs(union_slope - min_pair) <= 0.05;
    const bool pair_ok = r.prediction.dominating_pair == ClassPair{1, 2};
    out.pass &= slope_ok && pair_ok;
    out.detail += " M=" + std::to_string(r.m) + ":union=" + fmt(union_slope) + ",minpair=" + fmt(min_pair) +
                  (pair_ok ? ",pair(2,3)" : ",pair?");
  }
  const std::string report = report_text(cfg, result);
  const bool flagged = report.find("DISCREPANCY") != std::string::npos;
  out.pass &= flagged;
  out.detail += flagged ? " discrepancy-line-present" : " discrepancy-line-MISSING";
  out.detail += " (window " + fmt(result.per_m.back().window.sigma2_min, 2) + ".." +
                fmt(result.per_m.back().window.sigma2_max, 2) + ")";
  return out;
}

// Random rank spec from an explicit subset assignment, so it is feasible by construction.
RankSpec random_spec(std::mt19937_64& rng, int classes, int n) {
  std::vector<std::uint64_t> sets(classes);
  for (auto& s : sets) {
    do s = rng() & ((1ULL << n) - 1);
    while (s == 0);
  }
  RankSpec spec;
  spec.ambient_dim = n;
  spec.mean_mode = rng() % 2 ? MeanMode::DistinctNonzero : MeanMode::Zero;
  for (auto s : sets) spec.class_ranks.push_back(std::popcount(s));
  for (int i = 0; i < classes; ++i)
    for (int j = i + 1; j < classes; ++j) spec.union_ranks[{i, j}] = std::popcount(sets[i] | sets[j]);
  return spec;
}

Outcome bound_validity() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> log_s2(-3.0, 0.0);
  int points = 0, violations = 0;
  Outcome out;
  for (int k = 0; k < 30; ++k) {
    const int classes = k % 2 ? 4 : 2;
    const int n = 3 + static_cast<int>(rng() % 4);
    const auto spec = random_spec(rng, classes, n);
    const auto model = synthesize_ensemble(spec, 1000 + k);
    const int m = 1 + static_cast<int>(rng() % n);
    const Matrix phi = draw_measurement_matrix(m, n, 5000 + k);
    const ProjectedModel p(model, phi);
    for (int s = 0; s < 4; ++s) {
      const double s2 = std::pow(10.0, log_s2(rng));
      const auto mc = estimate_error(model, MeasurementSetup(phi, s2), 20000, 9000 + 10 * k + s);
      const double bound = std::exp(log_valid_bound(p, s2));
      ++points;
      if (mc.p_hat > bound + 3.0 * mc.ci_half_width) {
        ++violations;
        out.detail += " violation(cfg" + std::to_string(k) + ",s2=" + fmt(s2, 3) + ",p=" + fmt(mc.p_hat) +
                      ",b=" + fmt(bound) + ")";
      }
    }
  }
  out.pass = violations == 0;
  out.detail = " " + std::to_string(points) + " points over 30 configs, " + std::to_string(violations) +
               " violations; bound = two-class (L=2) / standard union (L=4)" + out.detail;
  return out;
}

Outcome oracle_equivalence() {
  std::mt19937_64 rng(77);
  double worst_k = 0.0, worst_ll = 0.0, worst_pdet = 0.0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 1 + rng() % 6, m = 1 + rng() % 6;
    std::vector<GaussianClass> cls;
    for (int i = 0; i < 2; ++i) {
      const auto mu = oracle::gaussian_vector(n, rng);
      cls.emplace_back(Eigen::Map<const Vector>(mu.data(), n),
                       PsdMatrix(oracle::to_eigen(oracle::random_psd(n, rng() % (n + 1), rng))), 0.5);
    }
    const GmmModel model(cls);
    const double s2 = std::pow(10.0, -2.0 * std::uniform_real_distribution<double>(0, 1)(rng));
    const MeasurementSetup setup(draw_measurement_matrix(m, n, t), s2);
    const auto phi = oracle::from_eigen(setup.phi());
    std::vector<std::vector<double>> means;
    std::vector<oracle::Dense> covs;
    for (int i = 0; i < 2; ++i) {
      auto c = oracle::multiply(oracle::multiply(phi, oracle::from_eigen(model[i].covariance().entries())),
                                oracle::transpose(phi));
      for (std::size_t k = 0; k < m; ++k) c[k][k] += s2;
      covs.push_back(c);
      means.push_back(oracle::mat_vec(phi, oracle::from_eigen(model[i].mean())));
    }
    worst_k = std::max(worst_k, oracle::rel_diff(pair_exponent(model, setup, 0, 1).k_value,
                                                 oracle::bhattacharyya(means[0], covs[0], means[1], covs[1])));

    const auto ctx = build_context(model, setup);
    const auto y = oracle::gaussian_vector(m, rng);
    for (std::size_t i = 0; i < 2; ++i) {
      worst_ll = std::max(worst_ll, oracle::rel_diff(log_likelihood(ctx, Eigen::Map<const Vector>(y.data(), m), i),
                                                     oracle::log_density(y, means[i], covs[i])));
    }

    const auto a = oracle::random_psd(n, rng() % (n + 1), rng);
    worst_pdet = std::max(worst_pdet, oracle::rel_diff(pseudo_det(PsdMatrix(oracle::to_eigen(a))),
                                                       oracle::eigen_product_above(a)));
  }
  Outcome out;
  out.pass = worst_k <= 1e-8 && worst_ll <= 1e-8 && worst_pdet <= 1e-8;
  out.detail = " 100 instances; max rel err: pair_exponent=" + fmt(worst_k, 2) + " log_likelihood=" +
               fmt(worst_ll, 2) + " pseudo_det=" + fmt(worst_pdet, 2) + " (tol 1e-8)";
  return out;
}

Outcome rank_law() {
  std::mt19937_64 rng(8);
  int failures = 0;
  for (int t = 0; t < 100; ++t) {
    const int m = 1 + t % 6;
    const int r = static_cast<int>(rng() % 7);
    const PsdMatrix sigma(oracle::to_eigen(oracle::random_psd(6, r, rng)));
    const Matrix phi = draw_measurement_matrix(m, 6, 300 + t);
    if (numerical_rank(project(phi, sigma)) != std::min(m, r)) ++failures;
  }
  return {failures == 0, " 100 draws, N=6, M=1..6, " + std::to_string(failures) + " failures"};
}

Outcome determinism() {
  auto cfg = bundled("fig1.cfg");
  const fs::path base = fs::temp_directory_path() / "compclass_acceptance";
  fs::remove_all(base);
  cfg.output_path = (base / "w1").string();
  cfg.workers = 1;
  run_experiment(cfg);
  cfg.output_path = (base / "w4").string();
  cfg.workers = 4;
  run_experiment(cfg);
  int identical = 0;
  Outcome out;
  for (int m : cfg.m_values) {
    const std::string name = "curve_M" + std::to_string(m) + ".csv";
    const std::string a = slurp(base / "w1" / name), b = slurp(base / "w4" / name);
    if (!a.empty() && a == b) {
      ++identical;
    } else {
      out.pass = false;
      out.detail += " " + name + " differs";
    }
  }
  out.detail = " workers 1 vs 4, " + std::to_string(identical) + "/" + std::to_string(cfg.m_values.size()) +
               " CSVs byte-identical (" + std::to_string(cfg.trials) + " trials/point)" + out.detail;
  fs::remove_all(base);
  return out;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"floor detection (fig1, bound at 1e-6 vs 1e-8)", floor_detection},
      {"diversity slopes (fig1, |d^-d|<=0.05)", diversity_slopes},
      {"measurement gain (fig1, g^(6)>g^(4), closed form within 10% at s2<=1e-5)", gain_ordering},
      {"nonzero-mean dichotomy (fig2, floor M<=2, corr<=-0.999 M>=3)", nonzero_mean_dichotomy},
      {"multi-class dominance (fig3, |union-minpair|<=0.05, pair (2,3))", multiclass_dominance},
      {"bound validity (p^ <= bound + 3 CI)", bound_validity},
      {"oracle equivalence (rel 1e-8)", oracle_equivalence},
      {"rank law (rank(Phi S Phi^T) = min(M, rank S))", rank_law},
      {"determinism (fig1.cfg CSVs vs worker count)", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string(" exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (i < 2 && secs >= 60.0) {
      o.pass = false;
      o.detail += " (over the 1 min budget)";
    }
    failed += !o.pass;
    std::printf("[%s] %zu %s:%s [%.1fs]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed ? 1 : 0;
}
