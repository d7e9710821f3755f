#pragma once

#include <cstdint>
#include <vector>

#include "compclass/bounds.hpp"
#include "compclass/curve.hpp"
#include "compclass/gmm.hpp"
#include "compclass/measurement.hpp"

namespace compclass {

/// Trials per independently seeded chunk. Results depend on the seed and the
/// chunk size, never on how chunks are scheduled across workers.
inline constexpr long long kMonteCarloChunk = 4096;

/// Worker count from COMPCLASS_WORKERS, else the hardware concurrency.
int default_worker_count();

/// 95% half-width: normal approximation, or the upper Wilson distance when
/// fewer than 20 errors were observed.
double confidence_half_width(long long errors, long long trials);

/// Monte Carlo estimate of the MAP misclassification probability for y = Phi x + n.
McResult estimate_error(const GmmModel& model, const MeasurementSetup& setup, long long trials, std::uint64_t seed,
                        int workers = 0);

struct SweepOptions {
  UnionBoundVariant variant = UnionBoundVariant::AsPrinted;
  long long trials = 1'000'000;
  int workers = 0;  // 0: default_worker_count()
};

/// Measurement matrices for one (model, M, seed): `draws` of them, draw k
/// seeded from (seed, k) only, so smaller M is always a row prefix of larger M.
std::vector<Matrix> draw_sweep_matrices(Eigen::Index m, Eigen::Index n, std::uint64_t seed, int draws = 1);

/// Bound and Monte Carlo estimate at every noise level. With several matrices
/// the bound is averaged and Monte Carlo trials are split evenly across them.
ErrorCurve sweep_error_curve(const GmmModel& model, const std::vector<Matrix>& phis,
                             const std::vector<double>& sigma_grid, std::uint64_t seed, const SweepOptions& options);

/// Convenience overload drawing a single matrix with draw_sweep_matrices.
ErrorCurve sweep_error_curve(const GmmModel& model, Eigen::Index m, const std::vector<double>& sigma_grid,
                             long long trials, std::uint64_t seed,
                             UnionBoundVariant variant = UnionBoundVariant::AsPrinted, int workers = 0);

}  // namespace compclass
