#include "kaslib/numerics.hpp"

#include <cmath>
#include <string>

#include "kaslib/error.hpp"

namespace kas {

void require_finite(const Matrix& a, const char* what) {
  if (!a.allFinite()) {
    throw DomainError(std::string(what) + ": matrix has non-finite entries");
  }
}

namespace {

void fix_sign(Matrix& vectors) {
  for (Index j = 0; j < vectors.cols(); ++j) {
    Index arg = 0;
    vectors.col(j).cwiseAbs().maxCoeff(&arg);
    if (vectors(arg, j) < 0.0) vectors.col(j) *= -1.0;
  }
}

}  // namespace

EigenDecomposition sym_eig_desc(const Matrix& a) {
  if (a.rows() != a.cols()) {
    throw DimensionError("sym_eig_desc: matrix is " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + ", expected square");
  }
  require_finite(a, "sym_eig_desc");
  const Index n = a.rows();
  if (n == 0) return {Vector(0), Matrix(0, 0)};

  const double scale = a.norm();
  if ((a - a.transpose()).norm() > 1e-10 * scale * 2.0) {
    throw DomainError("sym_eig_desc: matrix is not symmetric");
  }
  const Matrix sym = 0.5 * (a + a.transpose());

  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw DomainError("sym_eig_desc: eigensolver did not converge");
  }
  EigenDecomposition out;
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  fix_sign(out.vectors);
  return out;
}

SvdResult svd(const Matrix& a) {
  require_finite(a, "svd");
  SvdResult out;
  if (a.size() == 0) {
    const Index k = std::min(a.rows(), a.cols());
    out.u = Matrix::Zero(a.rows(), k);
    out.sigma = Vector::Zero(k);
    out.v = Matrix::Zero(a.cols(), k);
    return out;
  }
  Eigen::JacobiSVD<Matrix> solver(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  out.u = solver.matrixU();
  out.sigma = solver.singularValues();
  out.v = solver.matrixV();
  return out;
}

Matrix pinv(const Matrix& a, double rank_tol) {
  if (!(rank_tol > 0.0)) throw ArgumentError("pinv: rank_tol must be positive");
  const SvdResult dec = svd(a);
  Matrix out = Matrix::Zero(a.cols(), a.rows());
  if (dec.sigma.size() == 0) return out;
  const double cutoff = rank_tol * dec.sigma[0];
  for (Index i = 0; i < dec.sigma.size(); ++i) {
    if (dec.sigma[i] <= cutoff || dec.sigma[i] == 0.0) break;
    out.noalias() += (dec.v.col(i) / dec.sigma[i]) * dec.u.col(i).transpose();
  }
  return out;
}

Cholesky::Cholesky(const Matrix& a, double jitter) {
  if (a.rows() != a.cols()) throw DimensionError("cholesky: matrix must be square");
  if (jitter < 0.0) throw ArgumentError("cholesky: jitter must be non-negative");
  require_finite(a, "cholesky");
  const Index n = a.rows();
  const double mean_diag = n > 0 ? a.trace() / static_cast<double>(n) : 0.0;
  const double max_jitter = 1e-4 * std::abs(mean_diag);

  double current = jitter;
  while (true) {
    Matrix shifted = a;
    shifted.diagonal().array() += current;
    llt_.compute(shifted);
    if (llt_.info() == Eigen::Success) {
      jitter_ = current;
      return;
    }
    const double next = current > 0.0 ? current * 10.0 : 1e-12 * std::abs(mean_diag);
    if (!(next > 0.0) || next > max_jitter * (1.0 + 1e-9)) {
      throw FactorizationError(
          "cholesky: matrix not positive definite (last jitter " + std::to_string(current) + ")",
          current);
    }
    current = next;
  }
}

Matrix Cholesky::solve(const Matrix& b) const {
  if (b.rows() != size()) throw DimensionError("cholesky solve: right-hand side row mismatch");
  return llt_.solve(b);
}

Matrix Cholesky::solve_lower(const Matrix& b) const {
  if (b.rows() != size()) throw DimensionError("cholesky solve: right-hand side row mismatch");
  return llt_.matrixL().solve(b);
}

double Cholesky::log_det() const {
  return 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
}

Matrix chol_solve(const Matrix& a, const Matrix& b, double jitter) {
  if (a.rows() != b.rows()) throw DimensionError("chol_solve: A and B row counts differ");
  return Cholesky(a, jitter).solve(b);
}

}  // namespace kas
