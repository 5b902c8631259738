#pragma once

#include <string>
#include <vector>

#include "coarsen/admm.hpp"
#include "coarsen/eig.hpp"
#include "coarsen/meshops.hpp"
#include "coarsen/metrics.hpp"

namespace coarsen {

// Normalized mesh with its cotangent Laplacian and lumped mass.
struct FineOperator {
  TriMesh mesh;
  SymSparse L;
  Eigen::VectorXd mass;
  double scale = 1.0;
};

FineOperator prepare_fine(const TriMesh& mesh);

struct CoarseningConfig {
  Index coarse_count = 0;
  int rings = 1;
  Index eigs = 100;
  bool weighted = false;
  Index seed = 0;
  AdmmParams admm;
};

// Energy and constraints of one coarsening instance.
CoarseningProblem build_problem(const FineOperator& fine, const CoarseningSetup& setup, const EigenBasis& basis,
                                bool weighted, const AdmmParams& params);

struct CoarseningRun {
  CoarseningSetup setup;
  RowSelection R;
  EigenBasis fine_basis;
  CoarseningProblem problem;
  double galerkin_objective = 0.0;
  SolveResult result;
  EigenBasis coarse_basis;
  FunctionalMap fmap;
  double norm_L = 0.0;
  double norm_D = 0.0;
  Eigen::VectorXd eigenvalue_errors;
  std::vector<std::string> warnings;
};

// Sampling, problem assembly, ADMM solve and evaluation on a prepared setup.
CoarseningRun run_coarsening(const FineOperator& fine, const CoarseningSetup& setup, const CoarseningConfig& config);

// As above with the sample set drawn from the mesh.
CoarseningRun run_coarsening(const FineOperator& fine, const CoarseningConfig& config);

struct Evaluation {
  EigenBasis fine_basis;
  EigenBasis coarse_basis;
  FunctionalMap fmap;
  double norm_L = 0.0;
  double norm_D = 0.0;
  Eigen::VectorXd eigenvalue_errors;
};

Evaluation evaluate(const SymSparse& L, const Eigen::VectorXd& mass, const SymSparse& X,
                    const Eigen::VectorXd& coarse_mass, const RowSelection& R, Index k);

}  // namespace coarsen
