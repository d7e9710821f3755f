#include "compclass/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "compclass/error.hpp"

namespace compclass {

namespace {

double log_sum_exp(const std::vector<double>& terms) {
  double peak = -std::numeric_limits<double>::infinity();
  for (double t : terms) peak = std::max(peak, t);
  if (!std::isfinite(peak)) return peak;
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - peak);
  return peak + std::log(acc);
}

}  // namespace

std::string_view to_string(UnionBoundVariant v) {
  return v == UnionBoundVariant::AsPrinted ? "printed" : "standard";
}

UnionBoundVariant parse_union_bound_variant(std::string_view text) {
  if (text == "printed") return UnionBoundVariant::AsPrinted;
  if (text == "standard") return UnionBoundVariant::StandardUnion;
  throw ValidationError("union bound variant must be 'printed' or 'standard', got '" + std::string(text) + "'");
}

ProjectedModel::ProjectedModel(const GmmModel& model, const Matrix& phi) : m_(phi.rows()) {
  if (phi.cols() != model.ambient_dim()) throw ValidationError("ProjectedModel: dimension mismatch");
  for (const auto& c : model.classes()) {
    means_.push_back(phi * c.mean());
    covs_.push_back(project(phi, c.covariance()).entries());
    priors_.push_back(c.prior());
  }
}

PairExponent ProjectedModel::pair_exponent(std::size_t i, std::size_t j, double noise_variance) const {
  if (!(noise_variance > 0.0)) throw ValidationError("pair_exponent: noise variance must be > 0");
  if (i == j || i >= num_classes() || j >= num_classes()) {
    throw ValidationError("pair_exponent: need two distinct valid class indices");
  }
  Matrix ci = covs_[i];
  Matrix cj = covs_[j];
  ci.diagonal().array() += noise_variance;
  cj.diagonal().array() += noise_variance;
  const Matrix avg = 0.5 * (ci + cj);

  Eigen::LLT<Matrix> llt(avg);
  if (llt.info() != Eigen::Success) throw NumericalError("pair_exponent: averaged covariance not SPD");
  const Vector diff = means_[i] - means_[j];
  const Vector w = llt.matrixL().solve(diff);

  PairExponent e;
  e.mean_term = 0.125 * w.squaredNorm();
  const double log_det_avg = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  e.logdet_term = 0.5 * (log_det_avg - 0.5 * (log_det_spd(ci) + log_det_spd(cj)));
  e.k_value = e.mean_term + e.logdet_term;
  return e;
}

double ProjectedModel::log_pair_bound(std::size_t i, std::size_t j, double noise_variance) const {
  return 0.5 * std::log(priors_[i] * priors_[j]) - pair_exponent(i, j, noise_variance).k_value;
}

double ProjectedModel::log_two_class_bound(double noise_variance) const {
  if (num_classes() != 2) {
    throw ValidationError("two_class_bound: model has " + std::to_string(num_classes()) + " classes, expected 2");
  }
  return log_pair_bound(0, 1, noise_variance);
}

double ProjectedModel::log_multiclass_bound(double noise_variance, UnionBoundVariant variant) const {
  std::vector<double> terms;
  const std::size_t classes = num_classes();
  for (std::size_t i = 0; i < classes; ++i) {
    for (std::size_t j = i + 1; j < classes; ++j) {
      const double pair = log_pair_bound(i, j, noise_variance);
      if (variant == UnionBoundVariant::AsPrinted) {
        // (i, j) and (j, i) share K and sqrt(P_i P_j); only the trailing P_i differs.
        terms.push_back(pair + std::log(priors_[i]));
        terms.push_back(pair + std::log(priors_[j]));
      } else {
        terms.push_back(pair + std::log(2.0));
      }
    }
  }
  return log_sum_exp(terms);
}

PairExponent pair_exponent(const GmmModel& model, const MeasurementSetup& setup, std::size_t i, std::size_t j) {
  return ProjectedModel(model, setup.phi()).pair_exponent(i, j, setup.noise_variance());
}

double two_class_bound(const GmmModel& model, const MeasurementSetup& setup) {
  return std::exp(ProjectedModel(model, setup.phi()).log_two_class_bound(setup.noise_variance()));
}

double multiclass_bound(const GmmModel& model, const MeasurementSetup& setup, UnionBoundVariant variant) {
  return std::exp(ProjectedModel(model, setup.phi()).log_multiclass_bound(setup.noise_variance(), variant));
}

double log_valid_bound(const ProjectedModel& projected, double noise_variance) {
  return projected.num_classes() == 2
             ? projected.log_two_class_bound(noise_variance)
             : projected.log_multiclass_bound(noise_variance, UnionBoundVariant::StandardUnion);
}

}  // namespace compclass
