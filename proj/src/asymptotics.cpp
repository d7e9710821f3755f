#include "compclass/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "compclass/error.hpp"
#include "compclass/measurement.hpp"

namespace compclass {

std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::ErrorFloor:
      return "error-floor";
    case Regime::PolynomialDecay:
      return "polynomial";
    case Regime::ExponentialDecay:
      return "exponential";
  }
  return "?";
}

MeasuredGeometry measured_geometry(const GmmModel& model, const Matrix& phi) {
  MeasuredGeometry g;
  std::vector<PsdMatrix> projected;
  for (const auto& c : model.classes()) {
    projected.push_back(project(phi, c.covariance()));
    g.ranks.push_back(static_cast<int>(numerical_rank(projected.back())));
    g.volumes.push_back(pseudo_det(projected.back()));
  }
  for (std::size_t i = 0; i < projected.size(); ++i) {
    for (std::size_t j = i + 1; j < projected.size(); ++j) {
      const PsdMatrix sum(projected[i].entries() + projected[j].entries());
      const ClassPair key{int(i), int(j)};
      g.union_ranks[key] = static_cast<int>(numerical_rank(sum));
      g.union_volumes[key] = pseudo_det(sum);
    }
  }
  return g;
}

SourceGeometry source_geometry(const GmmModel& model) {
  SourceGeometry s;
  const auto& cls = model.classes();
  for (const auto& c : cls) s.ranks.push_back(static_cast<int>(numerical_rank(c.covariance())));
  for (std::size_t i = 0; i < cls.size(); ++i) {
    for (std::size_t j = i + 1; j < cls.size(); ++j) {
      const PsdMatrix sum(cls[i].covariance().entries() + cls[j].covariance().entries());
      s.union_ranks[{int(i), int(j)}] = static_cast<int>(numerical_rank(sum));
    }
  }
  return s;
}

SourceGeometry source_geometry(const RankSpec& spec) {
  validate(spec);
  return {spec.class_ranks, spec.union_ranks};
}

double diversity_from_ranks(int ri, int rj, int rij) { return (2.0 * rij - ri - rj) / 4.0; }

double measurement_gain_from_volumes(double pi, double pj, double vi, double vj, double vij, double d) {
  if (!(d > 0.0)) throw ValidationError("measurement gain is only defined for diversity d > 0");
  if (!(vi > 0.0 && vj > 0.0 && vij > 0.0)) throw ValidationError("volumes must be positive");
  const double log_offset = 0.5 * std::log(pi * pj) - 0.5 * (std::log(vij) - 0.5 * (std::log(vi) + std::log(vj)));
  return std::exp(-log_offset / d);
}

double pair_measurement_gain(const MeasuredGeometry& geom, const std::vector<double>& priors, ClassPair pair,
                             double d) {
  const auto [i, j] = pair;
  const double v_avg = geom.union_volumes.at(pair) * std::pow(0.5, geom.union_ranks.at(pair));
  return measurement_gain_from_volumes(priors.at(i), priors.at(j), geom.volumes.at(i), geom.volumes.at(j), v_avg, d);
}

namespace {

RegimePrediction polynomial(double d, const MeasuredGeometry& geom, const std::vector<double>& priors,
                            ClassPair pair) {
  RegimePrediction p;
  p.regime = Regime::PolynomialDecay;
  p.diversity = d;
  p.measurement_gain = pair_measurement_gain(geom, priors, pair, d);
  p.dominating_pair = pair;
  return p;
}

RegimePrediction floor_at(ClassPair pair) {
  RegimePrediction p;
  p.regime = Regime::ErrorFloor;
  p.dominating_pair = pair;
  return p;
}

}  // namespace

RegimePrediction predict_two_class_measured(const MeasuredGeometry& geom, const std::vector<double>& priors,
                                            ClassPair pair) {
  const int r1 = geom.ranks.at(pair.first);
  const int r2 = geom.ranks.at(pair.second);
  const int r12 = geom.union_ranks.at(pair);
  if (r1 + r2 == 2 * r12) return floor_at(pair);
  if (r1 + r2 > 2 * r12) {
    std::ostringstream msg;
    msg << "inconsistent measured geometry: (r1 + r2)/2 = " << 0.5 * (r1 + r2) << " exceeds r12 = " << r12;
    throw ValidationError(msg.str());
  }
  return polynomial(diversity_from_ranks(r1, r2, r12), geom, priors, pair);
}

RegimePrediction predict_two_class_source(const SourceGeometry& src, int m, const std::vector<double>& priors,
                                          const MeasuredGeometry& geom_for_gain, ClassPair pair) {
  int r1 = src.ranks.at(pair.first);
  int r2 = src.ranks.at(pair.second);
  const int r12 = src.union_ranks.at(pair);
  if (r1 > r2) std::swap(r1, r2);
  if (r12 < r2 || r12 > r1 + r2 || m < 1) {
    throw ValidationError("inconsistent source geometry for pair (" + std::to_string(pair.first + 1) + "," +
                          std::to_string(pair.second + 1) + ")");
  }
  if (m <= r1) return floor_at(pair);
  double d = 0.0;
  if (m <= r2) {
    d = (m - r1) / 4.0;
  } else if (m < r12) {
    d = (2.0 * m - r1 - r2) / 4.0;
  } else if (r1 + r2 == 2 * r12) {
    return floor_at(pair);
  } else {
    d = diversity_from_ranks(r1, r2, r12);
  }
  return polynomial(d, geom_for_gain, priors, pair);
}

RegimePrediction predict_nonzero_mean(const GmmModel& model, const Matrix& phi, const SourceGeometry& src,
                                      const MeasuredGeometry& geom, ClassPair pair) {
  const auto& ci = model[pair.first];
  const auto& cj = model[pair.second];
  const Vector diff = ci.mean() - cj.mean();
  if (diff.squaredNorm() == 0.0) {
    throw ValidationError("predict_nonzero_mean: the class means coincide; use the zero-mean predictor");
  }
  const PsdMatrix union_cov = project(phi, PsdMatrix(ci.covariance().entries() + cj.covariance().entries()));
  if (!image_contains(union_cov, phi * diff)) {
    RegimePrediction p;
    p.regime = Regime::ExponentialDecay;
    p.dominating_pair = pair;
    return p;
  }
  RegimePrediction p =
      predict_two_class_source(src, static_cast<int>(phi.rows()), model.priors(), geom, pair);
  p.offset_unknown = p.regime == Regime::PolynomialDecay;
  return p;
}

std::map<ClassPair, RegimePrediction> predict_pairs(const GmmModel& model, const Matrix& phi) {
  const MeasuredGeometry geom = measured_geometry(model, phi);
  const SourceGeometry src = source_geometry(model);
  const auto priors = model.priors();
  const int m = static_cast<int>(phi.rows());
  std::map<ClassPair, RegimePrediction> out;
  for (std::size_t i = 0; i < model.num_classes(); ++i) {
    for (std::size_t j = i + 1; j < model.num_classes(); ++j) {
      const ClassPair pair{int(i), int(j)};
      const bool same_mean = (model[i].mean() - model[j].mean()).squaredNorm() == 0.0;
      out[pair] = same_mean ? predict_two_class_source(src, m, priors, geom, pair)
                            : predict_nonzero_mean(model, phi, src, geom, pair);
    }
  }
  return out;
}

RegimePrediction predict_multiclass(const GmmModel& model, const Matrix& phi) {
  const auto pairs = predict_pairs(model, phi);
  const RegimePrediction* worst = nullptr;
  for (const auto& [pair, p] : pairs) {
    if (p.regime == Regime::ErrorFloor) return p;
    if (p.regime == Regime::PolynomialDecay && (!worst || *p.diversity < *worst->diversity)) worst = &p;
  }
  if (worst) return *worst;
  RegimePrediction p;
  p.regime = Regime::ExponentialDecay;
  return p;
}

// ---- fits ----

bool FitWindow::contains(double sigma2) const {
  constexpr double slack = 1e-9;
  return sigma2 >= sigma2_min * (1.0 - slack) && sigma2 <= sigma2_max * (1.0 + slack);
}

FitWindow default_fit_window(const ErrorCurve& curve) {
  if (curve.rows.empty()) throw ValidationError("default_fit_window: empty curve");
  double lo = curve.rows.front().sigma2;
  for (const auto& r : curve.rows) lo = std::min(lo, r.sigma2);
  return {lo, 100.0 * lo};
}

DiversityFit fit_log_slope(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n != y.size()) throw ValidationError("fit: mismatched input lengths");
  if (n < 4) throw ValidationError("fit: need at least 4 points inside the window, got " + std::to_string(n));
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (!std::isfinite(y[k])) throw ValidationError("fit: nonpositive or non-finite bound value");
    mx += x[k];
    my += y[k];
  }
  mx /= double(n);
  my /= double(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
  }
  if (!(sxx > 0.0)) throw ValidationError("fit: window contains a single noise level");
  DiversityFit fit;
  fit.slope = sxy / sxx;
  fit.points = static_cast<int>(n);
  double rss = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double e = y[k] - my - fit.slope * (x[k] - mx);
    rss += e * e;
  }
  fit.std_error = std::sqrt(rss / double(n - 2) / sxx);
  return fit;
}

DiversityFit fit_diversity(const ErrorCurve& curve, const FitWindow& window) {
  std::vector<double> x, y;
  for (const auto& r : curve.rows) {
    if (!window.contains(r.sigma2)) continue;
    x.push_back(std::log(r.sigma2));
    y.push_back(r.log_bound);
  }
  return fit_log_slope(x, y);
}

DiversityFit fit_diversity(std::span<const double> sigma2, std::span<const double> bound, const FitWindow& window) {
  if (sigma2.size() != bound.size()) throw ValidationError("fit_diversity: mismatched input lengths");
  std::vector<double> x, y;
  for (std::size_t k = 0; k < sigma2.size(); ++k) {
    if (!window.contains(sigma2[k])) continue;
    if (!(bound[k] > 0.0)) throw ValidationError("fit_diversity: nonpositive bound value");
    x.push_back(std::log(sigma2[k]));
    y.push_back(std::log(bound[k]));
  }
  return fit_log_slope(x, y);
}

namespace {

double gain_from_logs(const std::vector<double>& log_sigma2, const std::vector<double>& log_bound, double d) {
  if (!(d > 0.0)) throw ValidationError("fit_measurement_gain: diversity must be > 0");
  if (log_sigma2.empty()) throw ValidationError("fit_measurement_gain: no points inside the window");
  double acc = 0.0;
  for (std::size_t k = 0; k < log_sigma2.size(); ++k) {
    if (!std::isfinite(log_bound[k])) throw ValidationError("fit_measurement_gain: nonpositive bound value");
    acc += log_sigma2[k] - log_bound[k] / d;
  }
  return std::exp(acc / double(log_sigma2.size()));
}

}  // namespace

double fit_measurement_gain(const ErrorCurve& curve, double d, const FitWindow& window) {
  std::vector<double> x, y;
  for (const auto& r : curve.rows) {
    if (!window.contains(r.sigma2)) continue;
    x.push_back(std::log(r.sigma2));
    y.push_back(r.log_bound);
  }
  return gain_from_logs(x, y, d);
}

double fit_measurement_gain(std::span<const double> sigma2, std::span<const double> bound, double d,
                            const FitWindow& window) {
  if (sigma2.size() != bound.size()) throw ValidationError("fit_measurement_gain: mismatched input lengths");
  std::vector<double> x, y;
  for (std::size_t k = 0; k < sigma2.size(); ++k) {
    if (!window.contains(sigma2[k])) continue;
    if (!(bound[k] > 0.0)) throw ValidationError("fit_measurement_gain: nonpositive bound value");
    x.push_back(std::log(sigma2[k]));
    y.push_back(std::log(bound[k]));
  }
  return gain_from_logs(x, y, d);
}

double exponential_decay_correlation(const ErrorCurve& curve, const FitWindow& window) {
  std::vector<double> x, y;
  for (const auto& r : curve.rows) {
    if (!window.contains(r.sigma2)) continue;
    x.push_back(1.0 / r.sigma2);
    y.push_back(r.log_bound);
  }
  const std::size_t n = x.size();
  if (n < 3) throw ValidationError("exponential_decay_correlation: need at least 3 points");
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= double(n);
  my /= double(n);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    syy += (y[k] - my) * (y[k] - my);
    sxy += (x[k] - mx) * (y[k] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace compclass
