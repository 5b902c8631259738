#pragma once

#include <stdexcept>

#include <Eigen/Dense>

#include "coarsen/sparsemat.hpp"

namespace coarsen {

// Smallest generalized eigenpairs L phi = lambda M phi, M diagonal.
// Columns of `vectors` are M-orthonormal; values ascend.
struct EigenBasis {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;

  Index count() const { return values.size(); }
};

// Dense decomposition of M^-1/2 L M^-1/2, back-substituted to phi = M^-1/2 psi.
// Each column is sign-fixed so that its largest-magnitude entry is positive.
EigenBasis smallest_eigenpairs(const SymSparse& L, const Eigen::VectorXd& mass, Index count);
EigenBasis smallest_eigenpairs(const Eigen::MatrixXd& L, const Eigen::VectorXd& mass, Index count);

template <typename Scalar>
struct SymEig {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> values;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> vectors;
};

// Full symmetric decomposition, ascending eigenvalues.
template <typename Derived>
SymEig<typename Derived::Scalar> sym_eig_dense(const Eigen::MatrixBase<Derived>& A) {
  using Scalar = typename Derived::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (!A.allFinite()) throw std::invalid_argument("sym_eig_dense: non-finite entries");
  Eigen::SelfAdjointEigenSolver<Mat> es(Mat(A), Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success) throw std::runtime_error("sym_eig_dense: decomposition failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

// Frobenius-nearest PSD matrix: symmetrize, clamp negative eigenvalues to 0.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> psd_project(
    const Eigen::MatrixBase<Derived>& A) {
  using Scalar = typename Derived::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Mat sym = (A + A.transpose()) / Scalar(2);
  Eigen::SelfAdjointEigenSolver<Mat> es(sym, Eigen::ComputeEigenvectors);
  const auto& lambda = es.eigenvalues();
  if (lambda.size() == 0 || lambda[0] >= Scalar(0)) return sym;
  const Eigen::Index n = lambda.size();
  Eigen::Index first_pos = 0;
  while (first_pos < n && lambda[first_pos] <= Scalar(0)) ++first_pos;
  if (first_pos == n) return Mat::Zero(n, n);
  const auto V = es.eigenvectors().rightCols(n - first_pos);
  return V * lambda.tail(n - first_pos).asDiagonal() * V.transpose();
}

}  // namespace coarsen
