#include "compclass/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <thread>

#include "compclass/error.hpp"
#include "compclass/map_classifier.hpp"

namespace compclass {

namespace {

// Everything a worker needs to simulate y = Phi mu_i + (Phi B_i) z + sigma n.
struct TrialKernel {
  std::vector<double> cumulative_priors;
  std::vector<Matrix> projected_factor;
  std::vector<Vector> projected_mean;
  double noise_sd = 0.0;
  ClassifierContext ctx;

  TrialKernel(const GmmModel& model, const MeasurementSetup& setup)
      : cumulative_priors(cumulative(model.priors())),
        noise_sd(std::sqrt(setup.noise_variance())),
        ctx(build_context(model, setup)) {
    for (const auto& c : model.classes()) {
      projected_factor.push_back(setup.phi() * c.factor());
      projected_mean.push_back(setup.phi() * c.mean());
    }
  }

  long long run_chunk(std::uint64_t chunk_seed, long long trials) const {
    Rng rng(chunk_seed);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const Eigen::Index m = ctx.m();
    const std::size_t classes = ctx.num_classes();
    Vector y(m), z, resid(m);
    long long errors = 0;
    for (long long t = 0; t < trials; ++t) {
      const int truth = pick_class(cumulative_priors, uniform(rng));
      const Matrix& a = projected_factor[truth];
      z.resize(a.cols());
      for (Eigen::Index k = 0; k < z.size(); ++k) z(k) = gauss(rng);
      y.noalias() = projected_mean[truth];
      if (z.size() > 0) y.noalias() += a * z;
      for (Eigen::Index k = 0; k < m; ++k) y(k) += noise_sd * gauss(rng);

      int best = 0;
      double best_score = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < classes; ++i) {
        const auto& terms = ctx.terms(i);
        resid.noalias() = y - terms.mean;
        terms.chol_lower.triangularView<Eigen::Lower>().solveInPlace(resid);
        // Constant -(M/2) log 2 pi is shared by all classes and dropped.
        const double score = terms.log_prior - 0.5 * terms.log_det - 0.5 * resid.squaredNorm();
        if (score > best_score) {
          best_score = score;
          best = static_cast<int>(i);
        }
      }
      errors += best != truth;
    }
    return errors;
  }
};

}  // namespace

int default_worker_count() {
  if (const char* env = std::getenv("COMPCLASS_WORKERS")) {
    const int w = std::atoi(env);
    if (w >= 1) return w;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

double confidence_half_width(long long errors, long long trials) {
  if (trials <= 0) return 0.0;
  constexpr double z = 1.959963984540054;
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(errors) / n;
  if (errors >= 20) return z * std::sqrt(p * (1.0 - p) / n);
  const double denom = 1.0 + z * z / n;
  const double center = (p + z * z / (2.0 * n)) / denom;
  const double half = z / denom * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n));
  return center + half - p;
}

McResult estimate_error(const GmmModel& model, const MeasurementSetup& setup, long long trials, std::uint64_t seed,
                        int workers) {
  if (trials < 1) throw ValidationError("estimate_error: trials must be >= 1");
  const TrialKernel kernel(model, setup);
  const long long chunks = (trials + kMonteCarloChunk - 1) / kMonteCarloChunk;
  std::vector<long long> chunk_errors(static_cast<std::size_t>(chunks), 0);

  auto work = [&](std::atomic<long long>& next) {
    for (long long c = next++; c < chunks; c = next++) {
      const long long n = std::min(kMonteCarloChunk, trials - c * kMonteCarloChunk);
      chunk_errors[static_cast<std::size_t>(c)] =
          kernel.run_chunk(derive_seed(seed, {static_cast<std::uint64_t>(c)}), n);
    }
  };

  std::atomic<long long> next{0};
  const int pool = static_cast<int>(std::min<long long>(workers > 0 ? workers : default_worker_count(), chunks));
  if (pool <= 1) {
    work(next);
  } else {
    std::vector<std::jthread> threads;
    for (int w = 0; w < pool; ++w) threads.emplace_back([&] { work(next); });
  }

  McResult r;
  r.trials = trials;
  for (long long e : chunk_errors) r.errors += e;
  r.p_hat = static_cast<double>(r.errors) / static_cast<double>(trials);
  r.ci_half_width = confidence_half_width(r.errors, trials);
  r.seed = seed;
  return r;
}

std::vector<Matrix> draw_sweep_matrices(Eigen::Index m, Eigen::Index n, std::uint64_t seed, int draws) {
  if (draws < 1) throw ValidationError("phi draws must be >= 1");
  std::vector<Matrix> out;
  for (int k = 0; k < draws; ++k) {
    out.push_back(draw_measurement_matrix(m, n, derive_seed(seed, {stream::kPhi, static_cast<std::uint64_t>(k)})));
  }
  return out;
}

ErrorCurve sweep_error_curve(const GmmModel& model, const std::vector<Matrix>& phis,
                             const std::vector<double>& sigma_grid, std::uint64_t seed, const SweepOptions& options) {
  if (phis.empty()) throw ValidationError("sweep_error_curve: no measurement matrix");
  for (std::size_t k = 0; k < sigma_grid.size(); ++k) {
    if (!(sigma_grid[k] > 0.0)) throw ValidationError("sweep_error_curve: noise variances must be > 0");
    if (k > 0 && !(sigma_grid[k] < sigma_grid[k - 1])) {
      throw ValidationError("sweep_error_curve: noise grid must be strictly decreasing");
    }
  }
  const Eigen::Index m = phis.front().rows();
  std::vector<ProjectedModel> projected;
  for (const auto& phi : phis) {
    if (phi.rows() != m) throw ValidationError("sweep_error_curve: matrices differ in row count");
    projected.emplace_back(model, phi);
  }

  ErrorCurve curve;
  curve.m = m;
  curve.variant = options.variant;
  const auto draws = static_cast<long long>(phis.size());
  for (std::size_t g = 0; g < sigma_grid.size(); ++g) {
    CurveRow row;
    row.sigma2 = sigma_grid[g];

    // log of the arithmetic mean over matrices
    std::vector<double> logs;
    for (const auto& p : projected) {
      logs.push_back(p.log_multiclass_bound(row.sigma2, options.variant));
    }
    const double peak = *std::max_element(logs.begin(), logs.end());
    double acc = 0.0;
    for (double l : logs) acc += std::isfinite(peak) ? std::exp(l - peak) : 0.0;
    row.log_bound = std::isfinite(peak) ? peak + std::log(acc / double(draws)) : peak;

    if (options.trials > 0) {
      McResult total;
      total.seed = derive_seed(seed, {stream::kMonteCarlo, static_cast<std::uint64_t>(m), g});
      for (long long k = 0; k < draws; ++k) {
        const long long share = options.trials / draws + (k < options.trials % draws ? 1 : 0);
        if (share == 0) continue;
        const auto r = estimate_error(model, MeasurementSetup(phis[k], row.sigma2), share,
                                      derive_seed(total.seed, {static_cast<std::uint64_t>(k)}), options.workers);
        total.trials += r.trials;
        total.errors += r.errors;
      }
      total.p_hat = static_cast<double>(total.errors) / static_cast<double>(total.trials);
      total.ci_half_width = confidence_half_width(total.errors, total.trials);
      row.mc = total;
    }
    curve.rows.push_back(row);
  }
  return curve;
}

ErrorCurve sweep_error_curve(const GmmModel& model, Eigen::Index m, const std::vector<double>& sigma_grid,
                             long long trials, std::uint64_t seed, UnionBoundVariant variant, int workers) {
  SweepOptions options;
  options.variant = variant;
  options.trials = trials;
  options.workers = workers;
  return sweep_error_curve(model, draw_sweep_matrices(m, model.ambient_dim(), seed), sigma_grid, seed, options);
}

}  // namespace compclass
