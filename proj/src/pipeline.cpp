#include "coarsen/pipeline.hpp"

#include <algorithm>
#include <stdexcept>

namespace coarsen {

FineOperator prepare_fine(const TriMesh& mesh) {
  FineOperator f;
  auto [normalized, scale] = normalize_mesh(mesh);
  f.mesh = std::move(normalized);
  f.scale = scale;
  f.L = cotan_laplacian(f.mesh);
  f.mass = lumped_mass(f.mesh);
  return f;
}

CoarseningProblem build_problem(const FineOperator& fine, const CoarseningSetup& setup, const EigenBasis& basis,
                                bool weighted, const AdmmParams& params) {
  const RowSelection R = restriction(setup.samples, fine.L.size());
  const TrilIndexMap map_E(setup.pattern);
  EnergyTerms energy = assemble_energy(fine.L, fine.mass, setup.coarse_mass, R, basis, weighted, map_E);
  return make_problem(std::move(energy), setup.pattern, setup.null_vector, setup.null_image, params);
}

Evaluation evaluate(const SymSparse& L, const Eigen::VectorXd& mass, const SymSparse& X,
                    const Eigen::VectorXd& coarse_mass, const RowSelection& R, Index k) {
  if (R.rows() != X.size() || R.cols() != L.size() || coarse_mass.size() != X.size() || mass.size() != L.size()) {
    throw std::invalid_argument("evaluate: dimension mismatch");
  }
  if (k < 1) throw std::invalid_argument("evaluate: k must be positive");
  Evaluation ev;
  ev.fine_basis = smallest_eigenpairs(L, mass, std::min(k, L.size()));
  ev.coarse_basis = smallest_eigenpairs(X, coarse_mass, std::min(k, X.size()));
  ev.fmap = functional_map(ev.coarse_basis, coarse_mass, R, ev.fine_basis);
  ev.norm_L = laplacian_commutativity(ev.fmap);
  ev.norm_D = orthonormality(ev.fmap);
  ev.eigenvalue_errors = eigenvalue_errors(ev.fmap.source_values, ev.fmap.target_values);
  return ev;
}

CoarseningRun run_coarsening(const FineOperator& fine, const CoarseningSetup& setup, const CoarseningConfig& config) {
  const Index n = fine.L.size();
  const Index m = setup.coarse_count();
  if (m < 1 || m > n) throw std::invalid_argument("run_coarsening: coarse count out of range");
  if (config.eigs < 1) throw std::invalid_argument("run_coarsening: eigs must be positive");

  CoarseningRun run;
  if (config.eigs > m) {
    run.warnings.push_back("k = " + std::to_string(config.eigs) + " exceeds the coarse size m = " +
                           std::to_string(m) + "; the coarse spectrum is truncated to m");
  }
  if (config.weighted && 2 * config.eigs < m) {
    run.warnings.push_back("weighted energy with k = " + std::to_string(config.eigs) + " < 0.5 m = " +
                           format_double(0.5 * static_cast<double>(m)) + "; k > 0.5 m is recommended");
  }

  run.setup = setup;
  run.R = restriction(setup.samples, n);
  run.fine_basis = smallest_eigenpairs(fine.L, fine.mass, std::min(config.eigs, n));
  run.problem = build_problem(fine, setup, run.fine_basis, config.weighted, config.admm);

  const Eigen::VectorXd x0 = galerkin_guess(fine.L, run.R, run.problem.map_E);
  run.galerkin_objective = objective(
      run.problem, galerkin_baseline(fine.L, run.R, run.problem.map_E, setup.null_vector, setup.null_image));
  run.result = solve(run.problem, config.admm, x0);

  Evaluation ev = evaluate(fine.L, fine.mass, run.result.X, setup.coarse_mass, run.R, config.eigs);
  run.coarse_basis = std::move(ev.coarse_basis);
  run.fmap = std::move(ev.fmap);
  run.norm_L = ev.norm_L;
  run.norm_D = ev.norm_D;
  run.eigenvalue_errors = std::move(ev.eigenvalue_errors);
  return run;
}

CoarseningRun run_coarsening(const FineOperator& fine, const CoarseningConfig& config) {
  if (config.coarse_count >= fine.L.size()) {
    throw std::invalid_argument("coarse count m = " + std::to_string(config.coarse_count) +
                                " must be smaller than the fine vertex count " + std::to_string(fine.L.size()));
  }
  const CoarseningSetup setup =
      make_coarsening_setup(fine.mesh, fine.mass, config.coarse_count, config.rings, config.seed);
  return run_coarsening(fine, setup, config);
}

}  // namespace coarsen
