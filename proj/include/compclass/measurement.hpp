#pragma once

#include <cstdint>

#include "compclass/gmm.hpp"
#include "compclass/linalg.hpp"
#include "compclass/random.hpp"

namespace compclass {

/// Linear measurement channel y = Phi x + n, n ~ N(0, noise_variance I_M).
class MeasurementSetup {
 public:
  MeasurementSetup(Matrix phi, double noise_variance);

  const Matrix& phi() const { return phi_; }
  double noise_variance() const { return noise_variance_; }
  Eigen::Index m() const { return phi_.rows(); }
  Eigen::Index n_ambient() const { return phi_.cols(); }
  /// M <= N. Larger M is accepted but is not a compressive configuration.
  bool is_compressive() const { return m() <= n_ambient(); }

  MeasurementSetup with_noise_variance(double noise_variance) const;

 private:
  Matrix phi_;
  double noise_variance_;
};

/// M x N matrix with i.i.d. N(0, 1/N) entries, filled row by row from a
/// generator seeded with `seed`; the first k rows of an (m, n, seed) draw
/// equal the (k, n, seed) draw.
Matrix draw_measurement_matrix(Eigen::Index m, Eigen::Index n, std::uint64_t seed);

Vector measure(const MeasurementSetup& setup, const Vector& x, Rng& rng);
Vector measure_noiseless(const MeasurementSetup& setup, const Vector& x);

struct ClassMoments {
  Vector mean;
  PsdMatrix covariance;
};

/// (Phi mu, Phi Sigma Phi^T + sigma^2 I): the law of y given the class.
ClassMoments induced_class_moments(const MeasurementSetup& setup, const GaussianClass& cls);
/// Same with an explicit noise variance, which may be zero.
ClassMoments induced_class_moments(const Matrix& phi, const GaussianClass& cls, double noise_variance);

/// Phi A Phi^T, symmetrized.
PsdMatrix project(const Matrix& phi, const PsdMatrix& a);

}  // namespace compclass
