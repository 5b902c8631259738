#include "coarsen/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace coarsen {

FunctionalMap functional_map(const EigenBasis& coarse, const Eigen::VectorXd& coarse_mass,
                             const Eigen::SparseMatrix<double, Eigen::RowMajor>& R, const EigenBasis& fine) {
  if (coarse.vectors.rows() != coarse_mass.size() || R.rows() != coarse_mass.size() ||
      R.cols() != fine.vectors.rows() || coarse.vectors.cols() != coarse.values.size() ||
      fine.vectors.cols() != fine.values.size()) {
    throw std::invalid_argument("functional_map: dimension mismatch");
  }
  const Index k = std::min(coarse.count(), fine.count());
  FunctionalMap fm;
  fm.truncated = coarse.count() != fine.count();
  fm.C = coarse.vectors.leftCols(k).transpose() * coarse_mass.asDiagonal() * (R * fine.vectors.leftCols(k));
  fm.source_values = fine.values.head(k);
  fm.target_values = coarse.values.head(k);
  return fm;
}

double laplacian_commutativity(const FunctionalMap& fm) {
  const double cn = fm.C.squaredNorm();
  if (cn == 0.0) throw std::invalid_argument("laplacian_commutativity: functional map is zero");
  const Eigen::MatrixXd D = fm.C * fm.source_values.asDiagonal() - fm.target_values.asDiagonal() * fm.C;
  return std::sqrt(D.squaredNorm() / cn);
}

double orthonormality(const FunctionalMap& fm) {
  return (fm.C.transpose() * fm.C - Eigen::MatrixXd::Identity(fm.k(), fm.k())).norm();
}

Eigen::VectorXd eigenvalue_errors(const Eigen::VectorXd& lambda, const Eigen::VectorXd& lambda_tilde, double floor) {
  const Index k = std::min(lambda.size(), lambda_tilde.size());
  Eigen::VectorXd err(k);
  for (Index i = 0; i < k; ++i) err[i] = std::abs(lambda_tilde[i] - lambda[i]) / std::max(lambda[i], floor);
  return err;
}

Eigen::VectorXd biharmonic_distance(const EigenBasis& basis, Index source) {
  const Index n = basis.vectors.rows();
  if (source < 0 || source >= n) throw std::out_of_range("biharmonic_distance: source out of range");
  const double cut = basis.count() ? 1e-8 * basis.values.cwiseAbs().maxCoeff() : 0.0;
  Eigen::VectorXd d2 = Eigen::VectorXd::Zero(n);
  for (Index k = 0; k < basis.count(); ++k) {
    const double lambda = basis.values[k];
    if (lambda <= cut) continue;
    const Eigen::VectorXd diff = basis.vectors.col(k).array() - basis.vectors(source, k);
    d2 += diff.cwiseAbs2() / (lambda * lambda);
  }
  return d2.cwiseSqrt();
}

}  // namespace coarsen
