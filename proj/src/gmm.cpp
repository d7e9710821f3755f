#include "compclass/gmm.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <optional>
#include <sstream>

#include "compclass/error.hpp"

namespace compclass {

GaussianClass::GaussianClass(Vector mean, PsdMatrix covariance, double prior)
    : mean_(std::move(mean)), covariance_(std::move(covariance)), prior_(prior) {
  if (!(prior_ > 0.0 && prior_ <= 1.0)) {
    throw ValidationError("GaussianClass: prior must lie in (0, 1], got " + std::to_string(prior_));
  }
  if (covariance_.dim() != mean_.size()) {
    throw ValidationError("GaussianClass: mean has dimension " + std::to_string(mean_.size()) +
                          " but covariance is " + std::to_string(covariance_.dim()) + "x" +
                          std::to_string(covariance_.dim()));
  }
  factor_ = psd_factor(covariance_);
}

GmmModel::GmmModel(std::vector<GaussianClass> classes, ModelMetadata metadata)
    : classes_(std::move(classes)), metadata_(std::move(metadata)) {
  if (classes_.size() < 2) throw ValidationError("GmmModel: need at least two classes");
  ambient_dim_ = classes_.front().dim();
  double total = 0.0;
  for (const auto& c : classes_) {
    if (c.dim() != ambient_dim_) throw ValidationError("GmmModel: classes have different dimensions");
    total += c.prior();
  }
  if (std::abs(total - 1.0) > 1e-12) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "GmmModel: priors sum to " << total << ", expected 1";
    throw ValidationError(msg.str());
  }
}

std::vector<double> GmmModel::priors() const {
  std::vector<double> p;
  p.reserve(classes_.size());
  for (const auto& c : classes_) p.push_back(c.prior());
  return p;
}

GmmModel GmmModel::with_scaled_covariances(double factor) const {
  if (!(factor > 0.0)) throw ValidationError("with_scaled_covariances: factor must be positive");
  std::vector<GaussianClass> scaled;
  scaled.reserve(classes_.size());
  for (const auto& c : classes_) {
    scaled.emplace_back(c.mean(), PsdMatrix(factor * c.covariance().entries()), c.prior());
  }
  return GmmModel(std::move(scaled), metadata_);
}

int RankSpec::union_rank(int i, int j) const {
  if (i > j) std::swap(i, j);
  auto it = union_ranks.find({i, j});
  if (it == union_ranks.end()) {
    throw ValidationError("RankSpec: no union rank given for pair (" + std::to_string(i + 1) +
                          "," + std::to_string(j + 1) + ")");
  }
  return it->second;
}

void validate(const RankSpec& spec) {
  const int n = spec.ambient_dim;
  const int classes = static_cast<int>(spec.class_ranks.size());
  if (n < 1) throw ValidationError("RankSpec: ambient dimension must be >= 1");
  if (n > 63) throw ValidationError("RankSpec: ambient dimension above 63 is not supported");
  if (classes < 2) throw ValidationError("RankSpec: need at least two classes");
  for (int i = 0; i < classes; ++i) {
    const int r = spec.class_ranks[i];
    if (r < 1 || r > n) {
      throw ValidationError("RankSpec: rank of class " + std::to_string(i + 1) + " is " +
                            std::to_string(r) + ", must satisfy 1 <= r <= N = " + std::to_string(n));
    }
  }
  for (const auto& [pair, r] : spec.union_ranks) {
    if (pair.first < 0 || pair.second >= classes || pair.first >= pair.second) {
      throw ValidationError("RankSpec: invalid class pair (" + std::to_string(pair.first + 1) + "," +
                            std::to_string(pair.second + 1) + ")");
    }
  }
  for (int i = 0; i < classes; ++i) {
    for (int j = i + 1; j < classes; ++j) {
      const int rij = spec.union_rank(i, j);
      const int ri = spec.class_ranks[i];
      const int rj = spec.class_ranks[j];
      if (rij < std::max(ri, rj) || rij > std::min(n, ri + rj)) {
        std::ostringstream msg;
        msg << "RankSpec: infeasible union rank r(" << i + 1 << "," << j + 1 << ") = " << rij
            << "; need max(" << ri << "," << rj << ") <= r <= min(N=" << n << ", " << ri + rj
            << ")";
        throw ValidationError(msg.str());
      }
    }
  }
}

namespace {

struct SubspaceSearch {
  const RankSpec& spec;
  int n;
  std::vector<std::uint64_t> chosen;
  long budget = 2'000'000;
  int deepest = 0;
  ClassPair deepest_failure{0, 1};

  int overlap(int i, int j) const {
    return spec.class_ranks[i] + spec.class_ranks[j] - spec.union_rank(i, j);
  }

  // Next subset of the same popcount (Gosper's hack).
  static std::uint64_t next_combination(std::uint64_t v) {
    const std::uint64_t t = v | (v - 1);
    return (t + 1) | (((~t & -~t) - 1) >> (std::countr_zero(v) + 1));
  }

  bool place(int k) {
    const int classes = static_cast<int>(spec.class_ranks.size());
    if (k == classes) return true;
    const int r = spec.class_ranks[k];
    const std::uint64_t limit = (1ULL << n) - 1;
    if (k == 0) {
      chosen[0] = (1ULL << r) - 1;
      return place(1);
    }
    for (std::uint64_t s = (1ULL << r) - 1; s != 0 && (s & ~limit) == 0; s = next_combination(s)) {
      if (--budget < 0) return false;
      bool ok = true;
      for (int i = 0; i < k; ++i) {
        if (std::popcount(s & chosen[i]) != overlap(i, k)) {
          if (k > deepest) {
            deepest = k;
            deepest_failure = {i, k};
          }
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      chosen[k] = s;
      if (place(k + 1)) return true;
    }
    return false;
  }
};

Matrix haar_orthogonal(Eigen::Index n, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix g(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) g(i, j) = gauss(rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index k = 0; k < n; ++k) {
    if (r(k, k) < 0) q.col(k) *= -1.0;
  }
  return q;
}

std::vector<double> resolve_priors(const SynthesisOptions& options, std::size_t classes) {
  if (options.priors.empty()) return std::vector<double>(classes, 1.0 / static_cast<double>(classes));
  if (options.priors.size() != classes) {
    throw ValidationError("priors: expected " + std::to_string(classes) + " values, got " +
                          std::to_string(options.priors.size()));
  }
  return options.priors;
}

}  // namespace

std::vector<std::uint64_t> allocate_shared_subspaces(const RankSpec& spec) {
  validate(spec);
  SubspaceSearch search{spec, spec.ambient_dim, std::vector<std::uint64_t>(spec.class_ranks.size())};
  if (!search.place(0)) {
    const auto [i, j] = search.deepest_failure;
    std::ostringstream msg;
    msg << "no shared-subspace allocation satisfies the rank spec; first violated pair (" << i + 1
        << "," << j + 1 << ") with r_" << i + 1 << j + 1 << " = " << spec.union_rank(i, j);
    if (search.budget < 0) msg << " (search budget exhausted)";
    throw ValidationError(msg.str());
  }
  return search.chosen;
}

GmmModel synthesize_ensemble(const RankSpec& spec, std::uint64_t seed, const SynthesisOptions& options) {
  if (!(options.eigen_min > 0.0 && options.eigen_max >= options.eigen_min)) {
    throw ValidationError("eigenvalue range must satisfy 0 < eigen_min <= eigen_max");
  }
  const auto subsets = allocate_shared_subspaces(spec);
  const int n = spec.ambient_dim;
  const std::size_t classes = spec.class_ranks.size();
  const auto priors = resolve_priors(options, classes);

  Rng rng(derive_seed(seed, {stream::kModel}));
  std::uniform_real_distribution<double> eig(options.eigen_min, options.eigen_max);
  std::normal_distribution<double> gauss(0.0, 1.0);

  for (int attempt = 1; attempt <= options.max_basis_attempts; ++attempt) {
    const Matrix basis = haar_orthogonal(n, rng);
    std::vector<PsdMatrix> covariances;
    for (std::size_t k = 0; k < classes; ++k) {
      Matrix sigma = Matrix::Zero(n, n);
      for (int b = 0; b < n; ++b) {
        if (subsets[k] >> b & 1ULL) sigma += eig(rng) * basis.col(b) * basis.col(b).transpose();
      }
      covariances.emplace_back(sigma);
    }

    std::optional<ClassPair> violated;
    for (std::size_t i = 0; i < classes && !violated; ++i) {
      if (numerical_rank(covariances[i]) != spec.class_ranks[i]) violated = ClassPair{int(i), int(i)};
      for (std::size_t j = i + 1; j < classes && !violated; ++j) {
        const PsdMatrix sum(covariances[i].entries() + covariances[j].entries());
        if (numerical_rank(sum) != spec.union_rank(int(i), int(j))) violated = ClassPair{int(i), int(j)};
      }
    }
    if (violated) {
      if (attempt == options.max_basis_attempts) {
        throw ValidationError("rank verification failed after " + std::to_string(attempt) +
                              " bases; first violated pair (" + std::to_string(violated->first + 1) +
                              "," + std::to_string(violated->second + 1) + ")");
      }
      continue;
    }

    ModelMetadata meta;
    meta.seed = seed;
    meta.basis_attempts = attempt;
    std::vector<Vector> means(classes, Vector::Zero(n));
    if (spec.mean_mode == MeanMode::DistinctNonzero) {
      meta.mean_policy = "iid-normal, redraw while a mean difference lies in im(Sigma_i+Sigma_j)";
      for (;;) {
        for (auto& mu : means)
          for (int t = 0; t < n; ++t) mu(t) = gauss(rng);
        bool inside = false;
        for (std::size_t i = 0; i < classes && !inside; ++i) {
          for (std::size_t j = i + 1; j < classes && !inside; ++j) {
            if (spec.union_rank(int(i), int(j)) == n) continue;  // full image: untestable
            const PsdMatrix sum(covariances[i].entries() + covariances[j].entries());
            inside = image_contains(sum, means[i] - means[j]);
          }
        }
        if (!inside) break;
        if (++meta.mean_redraws > options.max_mean_redraws) {
          throw ValidationError("could not draw means outside the class subspaces");
        }
      }
    } else {
      meta.mean_policy = "zero";
    }

    std::vector<GaussianClass> out;
    out.reserve(classes);
    for (std::size_t k = 0; k < classes; ++k) out.emplace_back(means[k], covariances[k], priors[k]);
    return GmmModel(std::move(out), std::move(meta));
  }
  throw ValidationError("max_basis_attempts must be >= 1");
}

GmmModel synthesize_class_pair(const RankSpec& spec, std::uint64_t seed, const SynthesisOptions& options) {
  if (spec.class_ranks.size() != 2) {
    throw ValidationError("synthesize_class_pair: expected 2 classes, got " +
                          std::to_string(spec.class_ranks.size()));
  }
  return synthesize_ensemble(spec, seed, options);
}

std::vector<double> cumulative(const std::vector<double>& priors) {
  std::vector<double> c(priors.size());
  std::partial_sum(priors.begin(), priors.end(), c.begin());
  return c;
}

int pick_class(const std::vector<double>& cumulative_priors, double u) {
  const int last = static_cast<int>(cumulative_priors.size()) - 1;
  for (int k = 0; k < last; ++k) {
    if (u < cumulative_priors[k]) return k;
  }
  return last;
}

SourceSample sample_source(const GmmModel& model, Rng& rng) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  SourceSample s;
  s.class_index = pick_class(cumulative(model.priors()), uniform(rng));
  const auto& c = model[s.class_index];
  Vector z(c.factor().cols());
  for (Eigen::Index k = 0; k < z.size(); ++k) z(k) = gauss(rng);
  s.x = c.mean() + c.factor() * z;
  return s;
}

}  // namespace compclass
