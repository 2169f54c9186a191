#pragma once

#include <Eigen/Dense>

namespace kas {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

struct EigenDecomposition {
  Vector values;   // descending
  Matrix vectors;  // column i pairs with values[i]
};

struct SvdResult {
  Matrix u;      // rows(A) x k
  Vector sigma;  // k = min(rows, cols), descending
  Matrix v;      // cols(A) x k
};

/// Eigendecomposition of a symmetric matrix with eigenvalues sorted in
/// descending order. The input is symmetrized as (A + A^T)/2 first; an
/// asymmetry above 1e-10 relative to ||A|| is rejected.
///
/// Eigenvector signs are fixed so that the largest-magnitude entry of each
/// column is positive (the first such entry on ties).
EigenDecomposition sym_eig_desc(const Matrix& a);

/// Thin singular value decomposition, A = U diag(sigma) V^T.
SvdResult svd(const Matrix& a);

/// Moore-Penrose pseudoinverse V Sigma^+ U^T. Singular values below
/// rank_tol * sigma_max are treated as zero.
Matrix pinv(const Matrix& a, double rank_tol = 1e-12);

/// Solves (A + jitter I) X = B through a Cholesky factorization. On failure
/// the jitter is escalated by factors of ten up to 1e-4 * trace(A) / n.
Matrix chol_solve(const Matrix& a, const Matrix& b, double jitter = 0.0);

/// Cholesky factor of A + jitter I with the same escalation policy as
/// chol_solve, kept around for repeated solves and log-determinants.
class Cholesky {
 public:
  Cholesky(const Matrix& a, double jitter = 0.0);

  Matrix solve(const Matrix& b) const;
  /// L^{-1} b for the lower factor L.
  Matrix solve_lower(const Matrix& b) const;
  double log_det() const;
  double jitter() const noexcept { return jitter_; }
  Index size() const noexcept { return llt_.rows(); }

 private:
  Eigen::LLT<Matrix> llt_;
  double jitter_ = 0.0;
};

/// Throws DomainError when any entry is NaN or infinite.
void require_finite(const Matrix& a, const char* what);

}  // namespace kas
