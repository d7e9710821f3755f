#include <ostream>
#include <string>

#include "compclass/error.hpp"
#include "compclass/gmm.hpp"
#include "compclass/textio.hpp"

namespace compclass {

void write_model(std::ostream& out, const GmmModel& model, const std::string& prefix) {
  const auto& meta = model.metadata();
  out << prefix << ".classes = " << model.num_classes() << '\n';
  out << prefix << ".ambient_dim = " << model.ambient_dim() << '\n';
  out << prefix << ".meta.seed = " << meta.seed << '\n';
  out << prefix << ".meta.mean_policy = " << meta.mean_policy << '\n';
  out << prefix << ".meta.mean_redraws = " << meta.mean_redraws << '\n';
  out << prefix << ".meta.basis_attempts = " << meta.basis_attempts << '\n';
  for (std::size_t k = 0; k < model.num_classes(); ++k) {
    const auto& c = model[k];
    const std::string key = prefix + ".class." + std::to_string(k + 1);
    out << key << ".prior = " << format_double(c.prior()) << '\n';
    out << key << ".mean = " << format_values(c.mean().transpose()) << '\n';
    out << key << ".covariance = " << format_values(c.covariance().entries()) << '\n';
  }
}

GmmModel read_model(const std::map<std::string, std::string>& kv, const std::string& prefix) {
  const int classes = std::stoi(require_key(kv, prefix + ".classes"));
  const Eigen::Index n = std::stol(require_key(kv, prefix + ".ambient_dim"));
  if (classes < 2 || n < 1) throw ValidationError("model: invalid class count or dimension");

  ModelMetadata meta;
  if (auto it = kv.find(prefix + ".meta.seed"); it != kv.end()) meta.seed = std::stoull(it->second);
  if (auto it = kv.find(prefix + ".meta.mean_policy"); it != kv.end()) meta.mean_policy = it->second;
  if (auto it = kv.find(prefix + ".meta.mean_redraws"); it != kv.end()) meta.mean_redraws = std::stoi(it->second);
  if (auto it = kv.find(prefix + ".meta.basis_attempts"); it != kv.end()) meta.basis_attempts = std::stoi(it->second);

  std::vector<GaussianClass> out;
  for (int k = 1; k <= classes; ++k) {
    const std::string key = prefix + ".class." + std::to_string(k);
    const double prior = parse_double(require_key(kv, key + ".prior"));
    const auto mean = parse_values(require_key(kv, key + ".mean"));
    const auto cov = parse_values(require_key(kv, key + ".covariance"));
    if (static_cast<Eigen::Index>(mean.size()) != n || static_cast<Eigen::Index>(cov.size()) != n * n) {
      throw ValidationError(key + ": mean/covariance size does not match ambient_dim");
    }
    const Matrix sigma = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        cov.data(), n, n);
    out.emplace_back(Eigen::Map<const Vector>(mean.data(), n), PsdMatrix(sigma), prior);
  }
  return GmmModel(std::move(out), std::move(meta));
}

}  // namespace compclass
