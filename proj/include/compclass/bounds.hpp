#pragma once

#include <string_view>
#include <vector>

#include "compclass/gmm.hpp"
#include "compclass/measurement.hpp"

namespace compclass {

/// Bhattacharyya exponent between two classes after projection, in nats.
struct PairExponent {
  double k_value = 0.0;
  double mean_term = 0.0;    // (1/8) d^T C_avg^{-1} d, d = Phi (mu_i - mu_j)
  double logdet_term = 0.0;  // (1/2) log det C_avg / sqrt(det C_i det C_j)
};

/// Multi-class union bound variants.
///  - AsPrinted:      sum_i sum_{j != i} sqrt(P_i P_j) e^{-K(i,j)} P_i
///  - StandardUnion:  sum_{i < j} 2 sqrt(P_i P_j) e^{-K(i,j)}
/// Only StandardUnion is guaranteed to upper-bound the MAP error for L > 2.
enum class UnionBoundVariant { AsPrinted, StandardUnion };

std::string_view to_string(UnionBoundVariant v);
UnionBoundVariant parse_union_bound_variant(std::string_view text);

/// Model seen through a fixed measurement matrix: projected means and
/// Phi Sigma_i Phi^T, reused across a noise-variance sweep.
class ProjectedModel {
 public:
  ProjectedModel(const GmmModel& model, const Matrix& phi);

  std::size_t num_classes() const { return means_.size(); }
  Eigen::Index m() const { return m_; }
  const std::vector<double>& priors() const { return priors_; }
  const Matrix& projected_covariance(std::size_t i) const { return covs_[i]; }
  const Vector& projected_mean(std::size_t i) const { return means_[i]; }

  /// The class covariances of y are C_i = Phi Sigma_i Phi^T + sigma^2 I and the
  /// exponent is evaluated against their average (C_i + C_j) / 2.
  PairExponent pair_exponent(std::size_t i, std::size_t j, double noise_variance) const;

  /// log( sqrt(P_i P_j) e^{-K(i,j)} ).
  double log_pair_bound(std::size_t i, std::size_t j, double noise_variance) const;
  /// Two-class bound in log form; requires L = 2.
  double log_two_class_bound(double noise_variance) const;
  double log_multiclass_bound(double noise_variance, UnionBoundVariant variant) const;

 private:
  std::vector<Vector> means_;
  std::vector<Matrix> covs_;
  std::vector<double> priors_;
  Eigen::Index m_ = 0;
};

PairExponent pair_exponent(const GmmModel& model, const MeasurementSetup& setup, std::size_t i, std::size_t j);

/// sqrt(P_1 P_2) e^{-K(1,2)}; not clamped to 1.
double two_class_bound(const GmmModel& model, const MeasurementSetup& setup);

double multiclass_bound(const GmmModel& model, const MeasurementSetup& setup,
                        UnionBoundVariant variant = UnionBoundVariant::AsPrinted);

/// Bound for which MAP error <= bound is guaranteed: the two-class bound for
/// L = 2, the standard union bound otherwise.
double log_valid_bound(const ProjectedModel& projected, double noise_variance);

}  // namespace compclass
