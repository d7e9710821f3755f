#include "compclass/measurement.hpp"

#include <cmath>

#include "compclass/error.hpp"

namespace compclass {

MeasurementSetup::MeasurementSetup(Matrix phi, double noise_variance)
    : phi_(std::move(phi)), noise_variance_(noise_variance) {
  if (phi_.rows() < 1 || phi_.cols() < 1) throw ValidationError("measurement matrix must be non-empty");
  if (!(noise_variance_ > 0.0) || !std::isfinite(noise_variance_)) {
    throw ValidationError("noise variance must be finite and > 0");
  }
}

MeasurementSetup MeasurementSetup::with_noise_variance(double noise_variance) const {
  return MeasurementSetup(phi_, noise_variance);
}

Matrix draw_measurement_matrix(Eigen::Index m, Eigen::Index n, std::uint64_t seed) {
  if (m < 1 || n < 1) throw ValidationError("draw_measurement_matrix: m and n must be >= 1");
  Rng rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0 / std::sqrt(static_cast<double>(n)));
  Matrix phi(m, n);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < n; ++j) phi(i, j) = gauss(rng);
  return phi;
}

Vector measure_noiseless(const MeasurementSetup& setup, const Vector& x) {
  if (x.size() != setup.n_ambient()) {
    throw ValidationError("measure: signal has dimension " + std::to_string(x.size()) + ", expected " +
                          std::to_string(setup.n_ambient()));
  }
  return setup.phi() * x;
}

Vector measure(const MeasurementSetup& setup, const Vector& x, Rng& rng) {
  Vector y = measure_noiseless(setup, x);
  std::normal_distribution<double> gauss(0.0, std::sqrt(setup.noise_variance()));
  for (Eigen::Index k = 0; k < y.size(); ++k) y(k) += gauss(rng);
  return y;
}

PsdMatrix project(const Matrix& phi, const PsdMatrix& a) {
  if (phi.cols() != a.dim()) throw ValidationError("project: dimension mismatch");
  const Matrix p = phi * a.entries() * phi.transpose();
  return PsdMatrix(0.5 * (p + p.transpose()));
}

ClassMoments induced_class_moments(const Matrix& phi, const GaussianClass& cls, double noise_variance) {
  if (phi.cols() != cls.dim()) throw ValidationError("induced_class_moments: dimension mismatch");
  if (noise_variance < 0.0) throw ValidationError("induced_class_moments: negative noise variance");
  Matrix cov = project(phi, cls.covariance()).entries();
  cov.diagonal().array() += noise_variance;
  return {phi * cls.mean(), PsdMatrix(cov)};
}

ClassMoments induced_class_moments(const MeasurementSetup& setup, const GaussianClass& cls) {
  return induced_class_moments(setup.phi(), cls, setup.noise_variance());
}

}  // namespace compclass
