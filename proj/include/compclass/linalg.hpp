#pragma once

#include <Eigen/Dense>

namespace compclass {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Relative eigenvalue cutoff: an eigenvalue counts toward the rank iff it
/// exceeds `relative_threshold * lambda_max`.
struct RankTolerance {
  double relative_threshold = 1e-9;

  RankTolerance() = default;
  explicit RankTolerance(double threshold);
};

/// Symmetric positive semidefinite matrix with a cached spectrum.
///
/// Construction validates symmetry (max|A - A^T| <= 1e-10 max|A|) and
/// positive semidefiniteness (all eigenvalues >= -1e-10 |lambda|_max), then
/// symmetrizes the entries and clamps slightly negative eigenvalues to zero.
/// Rank, pseudo-determinant and image queries all read the cached spectrum so
/// they agree with each other.
class PsdMatrix {
 public:
  PsdMatrix() = default;
  explicit PsdMatrix(const Matrix& entries);

  static PsdMatrix zero(Eigen::Index dim);
  static PsdMatrix identity(Eigen::Index dim);

  Eigen::Index dim() const { return entries_.rows(); }
  const Matrix& entries() const { return entries_; }

  /// Ascending, clamped to be nonnegative.
  const Vector& eigenvalues() const { return eigenvalues_; }
  const Matrix& eigenvectors() const { return eigenvectors_; }
  double max_eigenvalue() const {
    return eigenvalues_.size() ? eigenvalues_(eigenvalues_.size() - 1) : 0.0;
  }

 private:
  Matrix entries_;
  Vector eigenvalues_;
  Matrix eigenvectors_;
};

Eigen::Index numerical_rank(const PsdMatrix& a, RankTolerance tol = {});

/// Product of the eigenvalues above the rank threshold; 1 for the zero matrix.
double pseudo_det(const PsdMatrix& a, RankTolerance tol = {});

/// Natural log of `pseudo_det`, without the overflow of the plain product.
double log_pseudo_det(const PsdMatrix& a, RankTolerance tol = {});

/// True iff `v` lies in the column space of `a`: the residual after projecting
/// onto the above-threshold eigenvectors is at most sqrt(threshold) * |v|.
bool image_contains(const PsdMatrix& a, const Vector& v, RankTolerance tol = {});

/// log det(A) for strictly positive definite A via Cholesky. Throws
/// NumericalError if the factorization fails.
double log_det_spd(const Matrix& a);
double log_det_spd(const PsdMatrix& a);

/// Basis (columns) of the above-threshold eigenvectors scaled by sqrt(lambda),
/// so that factor * factor^T reproduces `a` up to the discarded spectrum.
Matrix psd_factor(const PsdMatrix& a, RankTolerance tol = {});

}  // namespace compclass
