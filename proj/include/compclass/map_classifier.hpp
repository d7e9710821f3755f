#pragma once

#include <cstdint>
#include <vector>

#include "compclass/gmm.hpp"
#include "compclass/measurement.hpp"

namespace compclass {

/// Per-class Gaussian likelihood data for y given C_i, precomputed once per
/// (model, measurement setup): Cholesky factor of Phi Sigma_i Phi^T + sigma^2 I,
/// its log-determinant, the projected mean and the log prior.
class ClassifierContext {
 public:
  struct ClassTerms {
    Matrix chol_lower;
    double log_det = 0.0;
    Vector mean;
    double log_prior = 0.0;
  };

  std::size_t num_classes() const { return terms_.size(); }
  Eigen::Index m() const { return m_; }
  const ClassTerms& terms(std::size_t i) const { return terms_[i]; }
  std::uint64_t fingerprint() const { return fingerprint_; }

 private:
  friend ClassifierContext build_context(const GmmModel&, const MeasurementSetup&);
  std::vector<ClassTerms> terms_;
  Eigen::Index m_ = 0;
  std::uint64_t fingerprint_ = 0;
};

/// FNV-1a hash over the bit patterns of every model and setup parameter.
std::uint64_t fingerprint(const GmmModel& model, const MeasurementSetup& setup);

ClassifierContext build_context(const GmmModel& model, const MeasurementSetup& setup);

/// log p(y | C_i).
double log_likelihood(const ClassifierContext& ctx, const Vector& y, std::size_t class_index);

/// argmax_i log p(y | C_i) + log P_i; ties go to the smallest index.
int map_classify(const ClassifierContext& ctx, const Vector& y);

/// Normalized posteriors P(C_i | y), for diagnostics.
std::vector<double> posteriors(const ClassifierContext& ctx, const Vector& y);

}  // namespace compclass
