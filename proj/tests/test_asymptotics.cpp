#include <gtest/gtest.h>

#include <cmath>

#include "compclass/asymptotics.hpp"
#include "compclass/bounds.hpp"
#include "compclass/error.hpp"
#include "compclass/measurement.hpp"
#include "compclass/experiment.hpp"
#include "compclass/montecarlo.hpp"

using namespace compclass;

namespace {

RankSpec two_class(int r1, int r2, int r12, int n = 6, MeanMode mode = MeanMode::Zero) {
  RankSpec s;
  s.class_ranks = {r1, r2};
  s.union_ranks[{0, 1}] = r12;
  s.ambient_dim = n;
  s.mean_mode = mode;
  return s;
}

RankSpec four_class_spec() {
  RankSpec s;
  s.class_ranks = {2, 3, 3, 2};
  s.union_ranks = {{{0, 1}, 4}, {{0, 2}, 5}, {{0, 3}, 4}, {{1, 2}, 4}, {{1, 3}, 5}, {{2, 3}, 4}};
  s.ambient_dim = 6;
  return s;
}

std::vector<double> decades(int start, int stop, int ppd) { return SigmaGridSpec{start, stop, ppd}.values(); }

ErrorCurve bound_curve(const GmmModel& model, int m, const std::vector<double>& grid, std::uint64_t seed = 1) {
  return sweep_error_curve(model, m, grid, 0, seed);
}

const std::vector<double> kEqual{0.5, 0.5};

}  // namespace

TEST(MeasuredGeometry, OrthogonalDiagonals) {
  Matrix s1 = Matrix::Zero(2, 2), s2 = Matrix::Zero(2, 2);
  s1(0, 0) = 1;
  s2(1, 1) = 1;
  const GmmModel model({GaussianClass(Vector::Zero(2), PsdMatrix(s1), 0.5),
                        GaussianClass(Vector::Zero(2), PsdMatrix(s2), 0.5)});
  const auto g = measured_geometry(model, Matrix::Identity(2, 2));
  EXPECT_EQ(g.ranks, (std::vector<int>{1, 1}));
  EXPECT_EQ(g.union_ranks.at({0, 1}), 2);
  EXPECT_DOUBLE_EQ(g.volumes[0], 1.0);
  EXPECT_DOUBLE_EQ(g.volumes[1], 1.0);
  EXPECT_DOUBLE_EQ(g.union_volumes.at({0, 1}), 1.0);
}

TEST(MeasuredGeometry, RankLawOnOverlappingPair) {
  const auto model = synthesize_class_pair(two_class(2, 3, 4), 1);
  const auto g3 = measured_geometry(model, draw_measurement_matrix(3, 6, 1));
  EXPECT_EQ(g3.ranks, (std::vector<int>{2, 3}));
  EXPECT_EQ(g3.union_ranks.at({0, 1}), 3);
  const auto g5 = measured_geometry(model, draw_measurement_matrix(5, 6, 1));
  EXPECT_EQ(g5.ranks, (std::vector<int>{2, 3}));
  EXPECT_EQ(g5.union_ranks.at({0, 1}), 4);
}

TEST(PredictMeasured, Examples) {
  MeasuredGeometry g;
  g.ranks = {2, 2};
  g.volumes = {1, 1};
  g.union_ranks[{0, 1}] = 2;
  g.union_volumes[{0, 1}] = 1;
  EXPECT_EQ(predict_two_class_measured(g, kEqual).regime, Regime::ErrorFloor);

  g.ranks = {2, 3};
  g.union_ranks[{0, 1}] = 4;
  const auto p = predict_two_class_measured(g, kEqual);
  EXPECT_EQ(p.regime, Regime::PolynomialDecay);
  EXPECT_DOUBLE_EQ(*p.diversity, 0.75);

  g.ranks = {3, 3};
  g.union_ranks[{0, 1}] = 2;
  EXPECT_THROW(predict_two_class_measured(g, kEqual), ValidationError);
}

TEST(MeasurementGain, UnitVolumesLiteralFormula) {
  EXPECT_NEAR(measurement_gain_from_volumes(0.5, 0.5, 1, 1, 1, 0.5), 4.0, 1e-12);
  EXPECT_THROW(measurement_gain_from_volumes(0.5, 0.5, 1, 1, 1, 0.0), ValidationError);
  EXPECT_THROW(measurement_gain_from_volumes(0.5, 0.5, 0, 1, 1, 0.5), ValidationError);
}

TEST(PredictSource, TwoThreeFourCaseAnalysis) {
  const auto spec = two_class(2, 3, 4);
  const auto model = synthesize_class_pair(spec, 1);
  const auto src = source_geometry(spec);
  const std::vector<double> expected{-1, -1, 0.25, 0.75, 0.75, 0.75};
  for (int m = 1; m <= 6; ++m) {
    const auto geom = measured_geometry(model, draw_measurement_matrix(m, 6, 1));
    const auto p = predict_two_class_source(src, m, kEqual, geom);
    if (expected[m - 1] < 0) {
      EXPECT_EQ(p.regime, Regime::ErrorFloor) << "M=" << m;
    } else {
      ASSERT_EQ(p.regime, Regime::PolynomialDecay) << "M=" << m;
      EXPECT_DOUBLE_EQ(*p.diversity, expected[m - 1]) << "M=" << m;
      EXPECT_GT(*p.measurement_gain, 0.0);
    }
  }
}

TEST(PredictSource, SwapsRanksInternally) {
  const auto model = synthesize_class_pair(two_class(3, 2, 4), 2);
  const auto geom = measured_geometry(model, draw_measurement_matrix(3, 6, 1));
  const auto p = predict_two_class_source(source_geometry(model), 3, kEqual, geom);
  EXPECT_DOUBLE_EQ(*p.diversity, 0.25);
}

TEST(PredictSource, FullOverlapFloorsEverywhere) {
  const auto spec = two_class(2, 2, 2);
  const auto model = synthesize_class_pair(spec, 3);
  for (int m = 1; m <= 6; ++m) {
    const auto geom = measured_geometry(model, draw_measurement_matrix(m, 6, 1));
    EXPECT_EQ(predict_two_class_source(source_geometry(spec), m, kEqual, geom).regime, Regime::ErrorFloor);
  }
}

TEST(PredictSource, AgreesWithMeasuredPathOnRandomDraws) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 60; ++t) {
    const int r1 = 1 + rng() % 4, r2 = 1 + rng() % 4;
    const int lo = std::max(r1, r2), hi = std::min(6, r1 + r2);
    const int r12 = lo + static_cast<int>(rng() % (hi - lo + 1));
    const auto spec = two_class(r1, r2, r12);
    const auto model = synthesize_class_pair(spec, t);
    const int m = 1 + t % 6;
    const auto geom = measured_geometry(model, draw_measurement_matrix(m, 6, 100 + t));
    const auto a = predict_two_class_measured(geom, kEqual);
    const auto b = predict_two_class_source(source_geometry(spec), m, kEqual, geom);
    ASSERT_EQ(a.regime, b.regime) << r1 << "," << r2 << "," << r12 << " M=" << m;
    if (a.diversity) EXPECT_DOUBLE_EQ(*a.diversity, *b.diversity);
  }
}

TEST(PredictSource, DiversityMonotoneInM) {
  for (int r1 = 1; r1 <= 3; ++r1)
    for (int r2 = r1; r2 <= 3; ++r2)
      for (int r12 = r2; r12 <= std::min(6, r1 + r2); ++r12) {
        const auto spec = two_class(r1, r2, r12);
        const auto model = synthesize_class_pair(spec, 1);
        double prev = 0.0;
        for (int m = 1; m <= 6; ++m) {
          const auto geom = measured_geometry(model, draw_measurement_matrix(m, 6, 1));
          const auto p = predict_two_class_source(source_geometry(spec), m, kEqual, geom);
          const double d = p.diversity.value_or(0.0);
          EXPECT_GE(d, prev);
          if (m > r12) EXPECT_EQ(d, prev);
          prev = d;
        }
      }
}

TEST(PredictNonzeroMean, FullOverlapWithDistinctMeans) {
  const auto spec = two_class(2, 2, 2, 6, MeanMode::DistinctNonzero);
  const auto model = synthesize_class_pair(spec, 4);
  const auto src = source_geometry(model);
  for (int m = 1; m <= 6; ++m) {
    const Matrix phi = draw_measurement_matrix(m, 6, 1);
    const auto p = predict_nonzero_mean(model, phi, src, measured_geometry(model, phi));
    EXPECT_EQ(p.regime, m <= 2 ? Regime::ErrorFloor : Regime::ExponentialDecay) << "M=" << m;
  }
}

TEST(PredictNonzeroMean, FullImageMeansPolynomialWithUnknownOffset) {
  auto spec = two_class(2, 3, 4, 6, MeanMode::DistinctNonzero);
  const auto model = synthesize_class_pair(spec, 5);
  const Matrix phi = draw_measurement_matrix(4, 6, 1);
  const auto p = predict_nonzero_mean(model, phi, source_geometry(model), measured_geometry(model, phi));
  EXPECT_EQ(p.regime, Regime::PolynomialDecay);
  EXPECT_TRUE(p.offset_unknown);
  EXPECT_DOUBLE_EQ(*p.diversity, 0.75);

  const auto zero = synthesize_class_pair(two_class(2, 3, 4), 5);
  EXPECT_THROW(predict_nonzero_mean(zero, phi, source_geometry(zero), measured_geometry(zero, phi)), ValidationError);
}

TEST(PredictMulticlass, FourClassPairDiversities) {
  const auto model = synthesize_ensemble(four_class_spec(), 1);
  const std::map<ClassPair, double> expected{{{0, 1}, 0.75}, {{0, 2}, 1.25}, {{0, 3}, 1.0},
                                             {{1, 2}, 0.5},  {{1, 3}, 1.25}, {{2, 3}, 0.75}};
  for (int m = 4; m <= 6; ++m) {
    const Matrix phi = draw_measurement_matrix(m, 6, 1);
    const auto pairs = predict_pairs(model, phi);
    if (m == 6) {
      for (const auto& [pair, d] : expected) EXPECT_DOUBLE_EQ(*pairs.at(pair).diversity, d);
    }
    const auto p = predict_multiclass(model, phi);
    ASSERT_EQ(p.regime, Regime::PolynomialDecay);
    EXPECT_EQ(*p.dominating_pair, (ClassPair{1, 2}));
    EXPECT_DOUBLE_EQ(*p.diversity, 0.5);
  }
}

TEST(PredictMulticlass, IdenticalClassesFloor) {
  const auto base = synthesize_ensemble(four_class_spec(), 1);
  const GmmModel model({base[0], base[1], base[1], base[3]});
  EXPECT_EQ(predict_multiclass(model, draw_measurement_matrix(6, 6, 1)).regime, Regime::ErrorFloor);
}

TEST(PredictMulticlass, TwoClassReduction) {
  const auto model = synthesize_class_pair(two_class(2, 3, 4), 1);
  const Matrix phi = draw_measurement_matrix(3, 6, 1);
  const auto a = predict_multiclass(model, phi);
  const auto b = predict_two_class_source(source_geometry(model), 3, kEqual, measured_geometry(model, phi));
  EXPECT_EQ(a.regime, b.regime);
  EXPECT_EQ(*a.diversity, *b.diversity);
  EXPECT_EQ(*a.measurement_gain, *b.measurement_gain);
}

TEST(Fit, ExactPowerLawAndFloor) {
  const auto s2 = decades(0, -6, 10);
  std::vector<double> power, flat;
  for (double s : s2) {
    power.push_back(std::pow(2.0 / s, -0.75));
    flat.push_back(0.3);
  }
  const FitWindow all{1e-6, 1.0};
  const auto fit = fit_diversity(s2, power, all);
  EXPECT_NEAR(fit.slope, 0.75, 1e-12);
  EXPECT_NEAR(fit.std_error, 0.0, 1e-10);
  EXPECT_NEAR(fit_diversity(s2, flat, all).slope, 0.0, 1e-14);
  EXPECT_NEAR(fit_measurement_gain(s2, power, 0.75, all), 2.0, 1e-10);
}

TEST(Fit, Preconditions) {
  const std::vector<double> s2{1e-1, 1e-2, 1e-3};
  const std::vector<double> b{1, 1, 1};
  EXPECT_THROW(fit_diversity(s2, b, {1e-3, 1e-1}), ValidationError);
  const std::vector<double> s4{1e-1, 1e-2, 1e-3, 1e-4};
  const std::vector<double> b4{1, 0, 1, 1};
  EXPECT_THROW(fit_diversity(s4, b4, {1e-4, 1e-1}), ValidationError);
  EXPECT_THROW(fit_measurement_gain(s4, std::vector<double>{1, 1, 1, 1}, 0.0, {1e-4, 1e-1}), ValidationError);
}

TEST(Fit, ComputedCurveSlopeAtM4) {
  const auto model = synthesize_class_pair(two_class(2, 3, 4), 1);
  const auto curve = bound_curve(model, 4, decades(0, -6, 10));
  EXPECT_NEAR(fit_diversity(curve, {1e-6, 1e-4}).slope, 0.75, 0.05);
}

TEST(Fit, ClosedFormGainMatchesFittedGain) {
  const auto model = synthesize_class_pair(two_class(2, 3, 4), 1);
  for (int m : {4, 5, 6}) {
    const Matrix phi = draw_measurement_matrix(m, 6, 1);
    const auto pred = predict_multiclass(model, phi);
    ErrorCurve curve;
    const ProjectedModel p(model, phi);
    for (double s2 : decades(-5, -7, 10)) curve.rows.push_back({s2, p.log_two_class_bound(s2), std::nullopt});
    const double fitted = fit_measurement_gain(curve, *pred.diversity, {1e-7, 1e-5});
    EXPECT_NEAR(fitted / *pred.measurement_gain, 1.0, 0.10) << "M=" << m;
  }
}

TEST(Fit, DoublingEigenvaluesDoublesGain) {
  // Volumes scale as 2^r, so the closed form changes by 2^{(r12 - (r1 + r2)/2) / (2d)} = 2.
  const auto model = synthesize_class_pair(two_class(2, 3, 4), 1);
  const auto doubled = model.with_scaled_covariances(2.0);
  const auto grid = decades(-5, -7, 10);
  const FitWindow w{1e-7, 1e-5};
  const double g1 = fit_measurement_gain(bound_curve(model, 4, grid), 0.75, w);
  const double g2 = fit_measurement_gain(bound_curve(doubled, 4, grid), 0.75, w);
  EXPECT_NEAR(g2 / g1, 2.0, 0.02);
}

TEST(Fit, ExponentialCorrelation) {
  const auto model = synthesize_class_pair(two_class(2, 2, 2, 6, MeanMode::DistinctNonzero), 4);
  const auto curve = bound_curve(model, 4, decades(-2, -4, 10));
  EXPECT_LE(exponential_decay_correlation(curve, {1e-4, 1e-2}), -0.999);
}
