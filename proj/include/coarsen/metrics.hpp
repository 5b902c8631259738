#pragma once

#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "coarsen/eig.hpp"
#include "coarsen/sparsemat.hpp"

namespace coarsen {

// C = Phi~' M~ R Phi over the first min(k, k~) eigenpairs of each side.
struct FunctionalMap {
  Eigen::MatrixXd C;
  Eigen::VectorXd source_values;  // Lambda, fine operator
  Eigen::VectorXd target_values;  // Lambda~, coarse operator
  bool truncated = false;         // the two bases had different sizes

  Index k() const { return C.rows(); }
};

FunctionalMap functional_map(const EigenBasis& coarse, const Eigen::VectorXd& coarse_mass,
                             const Eigen::SparseMatrix<double, Eigen::RowMajor>& R, const EigenBasis& fine);

// sqrt(||C Lambda - Lambda~ C||_F^2 / ||C||_F^2). Throws when C = 0.
double laplacian_commutativity(const FunctionalMap& fm);

// ||C'C - I||_F.
double orthonormality(const FunctionalMap& fm);

// |lambda~_i - lambda_i| / max(lambda_i, floor) over the common prefix.
Eigen::VectorXd eigenvalue_errors(const Eigen::VectorXd& lambda, const Eigen::VectorXd& lambda_tilde,
                                  double floor = 1e-8);

// d(i)^2 = sum over non-null pairs of (phi_k(i) - phi_k(src))^2 / lambda_k^2;
// pairs with lambda <= 1e-8 lambda_max are skipped.
Eigen::VectorXd biharmonic_distance(const EigenBasis& basis, Index source);

}  // namespace coarsen
