#include "compclass/linalg.hpp"

#include <cmath>
#include <sstream>

#include "compclass/error.hpp"

namespace compclass {

namespace {

constexpr double kSymmetryTol = 1e-10;
constexpr double kNegativeEigTol = 1e-10;

Eigen::Index above_threshold_begin(const Vector& ascending, RankTolerance tol) {
  const Eigen::Index n = ascending.size();
  if (n == 0) return 0;
  const double lmax = ascending(n - 1);
  if (!(lmax > 0.0)) return n;
  const double cut = tol.relative_threshold * lmax;
  Eigen::Index k = n;
  while (k > 0 && ascending(k - 1) > cut) --k;
  return k;
}

}  // namespace

RankTolerance::RankTolerance(double threshold) : relative_threshold(threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw ValidationError("rank tolerance must lie in (0, 1)");
  }
}

PsdMatrix::PsdMatrix(const Matrix& entries) {
  if (entries.rows() != entries.cols()) {
    throw ValidationError("PsdMatrix: matrix is not square");
  }
  if (!entries.allFinite()) {
    throw ValidationError("PsdMatrix: non-finite entry");
  }
  const double scale = entries.size() ? entries.cwiseAbs().maxCoeff() : 0.0;
  const double asym = entries.size() ? (entries - entries.transpose()).cwiseAbs().maxCoeff() : 0.0;
  if (asym > kSymmetryTol * scale) {
    std::ostringstream msg;
    msg << "PsdMatrix: not symmetric (max|A-A^T| = " << asym << ", max|A| = " << scale << ")";
    throw ValidationError(msg.str());
  }
  entries_ = 0.5 * (entries + entries.transpose());

  if (entries_.size() == 0) return;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(entries_);
  if (eig.info() != Eigen::Success) {
    throw NumericalError("PsdMatrix: eigendecomposition did not converge");
  }
  eigenvalues_ = eig.eigenvalues();
  eigenvectors_ = eig.eigenvectors();
  const double magnitude = eigenvalues_.cwiseAbs().maxCoeff();
  if (eigenvalues_(0) < -kNegativeEigTol * magnitude) {
    std::ostringstream msg;
    msg << "PsdMatrix: not positive semidefinite (lambda_min = " << eigenvalues_(0)
        << ", |lambda|_max = " << magnitude << ")";
    throw ValidationError(msg.str());
  }
  eigenvalues_ = eigenvalues_.cwiseMax(0.0);
}

PsdMatrix PsdMatrix::zero(Eigen::Index dim) { return PsdMatrix(Matrix::Zero(dim, dim)); }

PsdMatrix PsdMatrix::identity(Eigen::Index dim) { return PsdMatrix(Matrix::Identity(dim, dim)); }

Eigen::Index numerical_rank(const PsdMatrix& a, RankTolerance tol) {
  return a.dim() - above_threshold_begin(a.eigenvalues(), tol);
}

double log_pseudo_det(const PsdMatrix& a, RankTolerance tol) {
  const Vector& lambda = a.eigenvalues();
  double acc = 0.0;
  for (Eigen::Index k = above_threshold_begin(lambda, tol); k < lambda.size(); ++k) {
    acc += std::log(lambda(k));
  }
  return acc;
}

double pseudo_det(const PsdMatrix& a, RankTolerance tol) {
  const Vector& lambda = a.eigenvalues();
  double prod = 1.0;
  for (Eigen::Index k = above_threshold_begin(lambda, tol); k < lambda.size(); ++k) {
    prod *= lambda(k);
  }
  return prod;
}

bool image_contains(const PsdMatrix& a, const Vector& v, RankTolerance tol) {
  if (v.size() != a.dim()) {
    throw ValidationError("image_contains: vector dimension " + std::to_string(v.size()) +
                          " does not match matrix dimension " + std::to_string(a.dim()));
  }
  const double norm = v.norm();
  if (norm == 0.0) return true;
  const Eigen::Index begin = above_threshold_begin(a.eigenvalues(), tol);
  const auto basis = a.eigenvectors().rightCols(a.dim() - begin);
  const Vector residual = v - basis * (basis.transpose() * v);
  return residual.norm() <= std::sqrt(tol.relative_threshold) * norm;
}

double log_det_spd(const Matrix& a) {
  if (a.rows() != a.cols()) throw ValidationError("log_det_spd: matrix is not square");
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) {
    throw NumericalError(
        "log_det_spd: Cholesky factorization failed; the matrix is not strictly positive "
        "definite (was the noise term sigma^2 I added?)");
  }
  const auto diag = llt.matrixLLT().diagonal();
  double acc = 0.0;
  for (Eigen::Index k = 0; k < diag.size(); ++k) acc += std::log(diag(k));
  return 2.0 * acc;
}

double log_det_spd(const PsdMatrix& a) { return log_det_spd(a.entries()); }

Matrix psd_factor(const PsdMatrix& a, RankTolerance tol) {
  const Eigen::Index begin = above_threshold_begin(a.eigenvalues(), tol);
  const Eigen::Index r = a.dim() - begin;
  Matrix factor = a.eigenvectors().rightCols(r);
  for (Eigen::Index k = 0; k < r; ++k) factor.col(k) *= std::sqrt(a.eigenvalues()(begin + k));
  return factor;
}

}  // namespace compclass
