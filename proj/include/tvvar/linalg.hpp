#ifndef TVVAR_LINALG_HPP
#define TVVAR_LINALG_HPP

#include <Eigen/Dense>
#include <cmath>

#include "tvvar/errors.hpp"

namespace tvvar {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline MatrixXd symmetrize(const MatrixXd& a) { return 0.5 * (a + a.transpose()); }

/// log|A| for symmetric positive-definite A.
inline double logdet_spd(const MatrixXd& a, int t = -1) {
  Eigen::LLT<MatrixXd> llt(symmetrize(a));
  if (llt.info() != Eigen::Success)
    throw NumericalError("logdet: matrix not positive definite", t);
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

/// Upper-triangular U with A = U'U (Cholesky, A symmetric positive definite).
inline MatrixXd chol_upper(const MatrixXd& a, int t = -1) {
  Eigen::LLT<MatrixXd> llt(symmetrize(a));
  if (llt.info() != Eigen::Success)
    throw NumericalError("Cholesky failed", t);
  return llt.matrixL().toDenseMatrix().transpose();
}

/// Inverse of a symmetric positive-definite matrix via Cholesky solves.
inline MatrixXd spd_inverse(const MatrixXd& a, int t = -1) {
  Eigen::LLT<MatrixXd> llt(symmetrize(a));
  if (llt.info() != Eigen::Success)
    throw NumericalError("inverse: matrix not positive definite", t);
  return llt.solve(MatrixXd::Identity(a.rows(), a.cols()));
}

/// Symmetric square root A^{1/2} via eigendecomposition.
inline MatrixXd sym_sqrt(const MatrixXd& a, int t = -1) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetrize(a));
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw NumericalError("symmetric square root: non-positive eigenvalue", t);
  return es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() *
         es.eigenvectors().transpose();
}

/// Symmetric inverse square root A^{-1/2} via eigendecomposition.
inline MatrixXd sym_inv_sqrt(const MatrixXd& a, int t = -1) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetrize(a));
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw NumericalError("symmetric inverse square root: non-positive eigenvalue", t);
  return es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
         es.eigenvectors().transpose();
}

/// Lower-triangular-like factor L with LL' = A for symmetric positive
/// SEMIdefinite A. Falls back to an eigen factor when plain Cholesky fails
/// (singular row spreads are legitimate in the matrix-normal sampler).
inline MatrixXd psd_factor(const MatrixXd& a, int t = -1) {
  const MatrixXd s = symmetrize(a);
  Eigen::LLT<MatrixXd> llt(s);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(s);
  const double lmax = std::max(es.eigenvalues().maxCoeff(), 0.0);
  if (es.eigenvalues().minCoeff() < -1e-8 * std::max(lmax, 1.0))
    throw NumericalError("psd_factor: matrix has a significantly negative eigenvalue", t);
  VectorXd d = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * d.asDiagonal();
}

/// Is A positive definite after symmetrization?
inline bool is_spd(const MatrixXd& a) {
  return Eigen::LLT<MatrixXd>(symmetrize(a)).info() == Eigen::Success;
}

}  // namespace tvvar

#endif
