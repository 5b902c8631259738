#include "coarsen/eig.hpp"

#include <string>

namespace coarsen {

EigenBasis smallest_eigenpairs(const Eigen::MatrixXd& L, const Eigen::VectorXd& mass, Index count) {
  const Index n = L.rows();
  if (L.cols() != n || mass.size() != n) throw std::invalid_argument("smallest_eigenpairs: dimension mismatch");
  if (count < 0 || count > n) {
    throw std::invalid_argument("smallest_eigenpairs: requested " + std::to_string(count) +
                                " eigenpairs of a " + std::to_string(n) + "-dimensional operator");
  }
  if (!(mass.array() > 0.0).all()) throw std::invalid_argument("smallest_eigenpairs: non-positive mass");

  const Eigen::VectorXd inv_sqrt = mass.cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd A = inv_sqrt.asDiagonal() * L * inv_sqrt.asDiagonal();
  auto eig = sym_eig_dense(A);

  EigenBasis basis;
  basis.values = eig.values.head(count);
  basis.vectors = inv_sqrt.asDiagonal() * eig.vectors.leftCols(count);
  for (Index c = 0; c < count; ++c) {
    Index arg = 0;
    basis.vectors.col(c).cwiseAbs().maxCoeff(&arg);
    if (basis.vectors(arg, c) < 0.0) basis.vectors.col(c) *= -1.0;
  }
  return basis;
}

EigenBasis smallest_eigenpairs(const SymSparse& L, const Eigen::VectorXd& mass, Index count) {
  return smallest_eigenpairs(L.to_dense(), mass, count);
}

}  // namespace coarsen
