#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "compclass/linalg.hpp"
#include "compclass/random.hpp"

namespace compclass {

/// One mixture component: x ~ N(mean, covariance) with probability `prior`.
class GaussianClass {
 public:
  GaussianClass(Vector mean, PsdMatrix covariance, double prior);

  const Vector& mean() const { return mean_; }
  const PsdMatrix& covariance() const { return covariance_; }
  double prior() const { return prior_; }
  Eigen::Index dim() const { return mean_.size(); }

  /// N x rank(covariance) matrix B with B B^T = covariance.
  const Matrix& factor() const { return factor_; }

 private:
  Vector mean_;
  PsdMatrix covariance_;
  double prior_;
  Matrix factor_;
};

/// Free-form provenance carried along with a model (and serialized with it).
struct ModelMetadata {
  std::uint64_t seed = 0;
  std::string mean_policy = "given";
  int mean_redraws = 0;
  int basis_attempts = 0;
};

class GmmModel {
 public:
  explicit GmmModel(std::vector<GaussianClass> classes, ModelMetadata metadata = {});

  std::size_t num_classes() const { return classes_.size(); }
  Eigen::Index ambient_dim() const { return ambient_dim_; }
  const std::vector<GaussianClass>& classes() const { return classes_; }
  const GaussianClass& operator[](std::size_t i) const { return classes_[i]; }
  const ModelMetadata& metadata() const { return metadata_; }
  std::vector<double> priors() const;

  /// Copy with every covariance multiplied by `factor` (> 0).
  GmmModel with_scaled_covariances(double factor) const;

 private:
  std::vector<GaussianClass> classes_;
  Eigen::Index ambient_dim_ = 0;
  ModelMetadata metadata_;
};

enum class MeanMode { Zero, DistinctNonzero };

using ClassPair = std::pair<int, int>;  // 0-based, first < second

/// Prescribed source geometry: rank(Sigma_i) and rank(Sigma_i + Sigma_j).
struct RankSpec {
  std::vector<int> class_ranks;
  std::map<ClassPair, int> union_ranks;
  int ambient_dim = 0;
  MeanMode mean_mode = MeanMode::Zero;

  int union_rank(int i, int j) const;
};

/// Throws ValidationError unless 1 <= r_i <= N, every pair is present and
/// max(r_i, r_j) <= r_ij <= min(N, r_i + r_j).
void validate(const RankSpec& spec);

struct SynthesisOptions {
  double eigen_min = 0.5;
  double eigen_max = 1.5;
  std::vector<double> priors;  // empty: uniform
  int max_basis_attempts = 8;
  int max_mean_redraws = 64;
};

/// Assignment of each class to a set of coordinate directions (bit k = basis
/// vector k) whose pairwise intersections have exactly r_i + r_j - r_ij
/// elements. Throws ValidationError naming the first unsatisfiable pair.
std::vector<std::uint64_t> allocate_shared_subspaces(const RankSpec& spec);

GmmModel synthesize_class_pair(const RankSpec& spec, std::uint64_t seed,
                               const SynthesisOptions& options = {});
GmmModel synthesize_ensemble(const RankSpec& spec, std::uint64_t seed,
                             const SynthesisOptions& options = {});

struct SourceSample {
  int class_index = 0;
  Vector x;
};

SourceSample sample_source(const GmmModel& model, Rng& rng);

/// Index of the class selected by a uniform draw `u` in [0, 1).
int pick_class(const std::vector<double>& cumulative_priors, double u);
std::vector<double> cumulative(const std::vector<double>& priors);

// Text serialization (key = value lines; doubles written in shortest
// round-trip form so a reloaded model is bit-identical).
void write_model(std::ostream& out, const GmmModel& model, const std::string& prefix = "model");
GmmModel read_model(const std::map<std::string, std::string>& kv, const std::string& prefix = "model");

}  // namespace compclass
