#include "compclass/map_classifier.hpp"

#include <bit>
#include <cmath>
#include <numbers>

#include "compclass/error.hpp"

namespace compclass {

namespace {

struct Fnv1a {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  void add(std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xffULL;
      h *= 0x100000001b3ULL;
    }
  }
  void add(double v) { add(std::bit_cast<std::uint64_t>(v)); }
  void add(const Matrix& a) {
    add(static_cast<std::uint64_t>(a.rows()));
    add(static_cast<std::uint64_t>(a.cols()));
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      for (Eigen::Index i = 0; i < a.rows(); ++i) add(a(i, j));
  }
};

}  // namespace

std::uint64_t fingerprint(const GmmModel& model, const MeasurementSetup& setup) {
  Fnv1a f;
  f.add(setup.phi());
  f.add(setup.noise_variance());
  for (const auto& c : model.classes()) {
    f.add(c.prior());
    f.add(Matrix(c.mean()));
    f.add(c.covariance().entries());
  }
  return f.h;
}

ClassifierContext build_context(const GmmModel& model, const MeasurementSetup& setup) {
  if (setup.n_ambient() != model.ambient_dim()) {
    throw ValidationError("build_context: measurement matrix has " + std::to_string(setup.n_ambient()) +
                          " columns, model dimension is " + std::to_string(model.ambient_dim()));
  }
  ClassifierContext ctx;
  ctx.m_ = setup.m();
  for (const auto& c : model.classes()) {
    const ClassMoments moments = induced_class_moments(setup, c);
    Eigen::LLT<Matrix> llt(moments.covariance.entries());
    if (llt.info() != Eigen::Success) {
      throw NumericalError("build_context: class covariance is not positive definite");
    }
    ClassifierContext::ClassTerms t;
    t.chol_lower = llt.matrixL();
    t.log_det = 2.0 * t.chol_lower.diagonal().array().log().sum();
    t.mean = moments.mean;
    t.log_prior = std::log(c.prior());
    ctx.terms_.push_back(std::move(t));
  }
  ctx.fingerprint_ = fingerprint(model, setup);
  return ctx;
}

double log_likelihood(const ClassifierContext& ctx, const Vector& y, std::size_t class_index) {
  const auto& t = ctx.terms(class_index);
  Vector z = y - t.mean;
  t.chol_lower.triangularView<Eigen::Lower>().solveInPlace(z);
  const double m = static_cast<double>(ctx.m());
  return -0.5 * m * std::log(2.0 * std::numbers::pi) - 0.5 * t.log_det - 0.5 * z.squaredNorm();
}

int map_classify(const ClassifierContext& ctx, const Vector& y) {
  int best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < ctx.num_classes(); ++i) {
    const double score = log_likelihood(ctx, y, i) + ctx.terms(i).log_prior;
    if (score > best_score) {
      best_score = score;
      best = static_cast<int>(i);
    }
  }
  return best;
}

std::vector<double> posteriors(const ClassifierContext& ctx, const Vector& y) {
  std::vector<double> p(ctx.num_classes());
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = log_likelihood(ctx, y, i) + ctx.terms(i).log_prior;
    peak = std::max(peak, p[i]);
  }
  double total = 0.0;
  for (auto& v : p) total += (v = std::exp(v - peak));
  for (auto& v : p) v /= total;
  return p;
}

}  // namespace compclass
