#pragma once

#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "compclass/curve.hpp"
#include "compclass/gmm.hpp"

namespace compclass {

/// Ranks and pseudo-determinants of the projected covariances:
/// r_i, v_i of Phi Sigma_i Phi^T and r_ij, v_ij of Phi (Sigma_i + Sigma_j) Phi^T.
struct MeasuredGeometry {
  std::vector<int> ranks;
  std::vector<double> volumes;
  std::map<ClassPair, int> union_ranks;
  std::map<ClassPair, double> union_volumes;
};

/// rank(Sigma_i) and rank(Sigma_i + Sigma_j).
struct SourceGeometry {
  std::vector<int> ranks;
  std::map<ClassPair, int> union_ranks;
};

enum class Regime { ErrorFloor, PolynomialDecay, ExponentialDecay };
std::string_view to_string(Regime r);

struct RegimePrediction {
  Regime regime = Regime::ErrorFloor;
  std::optional<double> diversity;         // PolynomialDecay only
  std::optional<double> measurement_gain;  // PolynomialDecay only
  std::optional<ClassPair> dominating_pair;
  /// Nonzero means whose difference stays inside the covariance image: the
  /// bound decays like (a g_m / sigma^2)^{-d} with an unknown constant a > 1.
  bool offset_unknown = false;
};

MeasuredGeometry measured_geometry(const GmmModel& model, const Matrix& phi);
SourceGeometry source_geometry(const GmmModel& model);
SourceGeometry source_geometry(const RankSpec& spec);

/// d = -(1/2)((r_i + r_j)/2 - r_ij).
double diversity_from_ranks(int ri, int rj, int rij);

/// g_m = [sqrt(P_i P_j) (v_ij / sqrt(v_i v_j))^{-1/2}]^{-1/d}, with every
/// argument taken literally.
double measurement_gain_from_volumes(double pi, double pj, double vi, double vj, double vij, double d);

/// Measurement gain of the pair (i, j) for diversity d. The union volume
/// entering the formula is that of the pairwise-average covariance
/// Phi (Sigma_i + Sigma_j) Phi^T / 2, i.e. v_ij / 2^{r_ij}, which is the matrix
/// whose determinant appears in the Bhattacharyya exponent.
double pair_measurement_gain(const MeasuredGeometry& geom, const std::vector<double>& priors, ClassPair pair, double d);

RegimePrediction predict_two_class_measured(const MeasuredGeometry& geom, const std::vector<double>& priors,
                                            ClassPair pair = {0, 1});

RegimePrediction predict_two_class_source(const SourceGeometry& src, int m, const std::vector<double>& priors,
                                          const MeasuredGeometry& geom_for_gain, ClassPair pair = {0, 1});

RegimePrediction predict_nonzero_mean(const GmmModel& model, const Matrix& phi, const SourceGeometry& src,
                                      const MeasuredGeometry& geom, ClassPair pair = {0, 1});

/// Pairwise predictions combined: any floor gives a floor; otherwise the
/// smallest pairwise diversity wins and carries its pair's measurement gain.
RegimePrediction predict_multiclass(const GmmModel& model, const Matrix& phi);

/// Per-pair predictions in (i, j) order, as used by predict_multiclass.
std::map<ClassPair, RegimePrediction> predict_pairs(const GmmModel& model, const Matrix& phi);

// ---- empirical extraction from curves ----

struct FitWindow {
  double sigma2_min = 0.0;
  double sigma2_max = 0.0;

  bool contains(double sigma2) const;
};

/// The two lowest-noise decades of the sweep.
FitWindow default_fit_window(const ErrorCurve& curve);

struct DiversityFit {
  double slope = 0.0;
  double std_error = 0.0;
  int points = 0;
};

/// Least-squares slope of log(bound) against log(sigma^2) over the window.
DiversityFit fit_diversity(const ErrorCurve& curve, const FitWindow& window);
DiversityFit fit_diversity(std::span<const double> sigma2, std::span<const double> bound, const FitWindow& window);
/// Same fit on logarithms that are already available.
DiversityFit fit_log_slope(std::span<const double> log_sigma2, std::span<const double> log_value);

/// Geometric mean over the window of sigma^2 * bound^{-1/d}.
double fit_measurement_gain(const ErrorCurve& curve, double d, const FitWindow& window);
double fit_measurement_gain(std::span<const double> sigma2, std::span<const double> bound, double d,
                            const FitWindow& window);

/// Pearson correlation between log(bound) and 1/sigma^2 over the window.
double exponential_decay_correlation(const ErrorCurve& curve, const FitWindow& window);

}  // namespace compclass
