#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "coarsen/chordal.hpp"
#include "coarsen/eig.hpp"
#include "coarsen/sparsemat.hpp"

namespace coarsen {

using RowSelection = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Dense factors of the commutative energy f(X) = 1/2 ||W - V X U||_F^2 with
// U = R Phi', W = M~^1/2 R M^-1 L Phi', V = M~^-1/2 (stored as a diagonal).
// Phi' = Phi, or Phi Lambda^-1 over the non-null eigenpairs when weighted.
struct EnergyFactors {
  Eigen::MatrixXd U;
  Eigen::MatrixXd W;
  Eigen::VectorXd V;
  Index dropped_null_pairs = 0;
};

EnergyFactors energy_factors(const SymSparse& L, const Eigen::VectorXd& fine_mass,
                             const Eigen::VectorXd& coarse_mass, const RowSelection& R,
                             const EigenBasis& basis, bool weighted);

// Quadratic form of f over x_E: f = 1/2 x'Hx - g'x + f0.
struct EnergyTerms {
  Eigen::SparseMatrix<double> H;
  Eigen::VectorXd g;
  double f0 = 0.0;
  Index columns = 0;             // test functions used
  Index dropped_null_pairs = 0;
};

// Builds H = E'E and g = E'w index-wise from U U' and V'V without forming
// the Kronecker product.
EnergyTerms assemble_energy(const EnergyFactors& factors, const TrilIndexMap& map_E);
EnergyTerms assemble_energy(const SymSparse& L, const Eigen::VectorXd& fine_mass,
                            const Eigen::VectorXd& coarse_mass, const RowSelection& R,
                            const EigenBasis& basis, bool weighted, const TrilIndexMap& map_E);

// Coordinates of the per-clique lower-triangular vectors y, z and u.
// kPlain stores Z_ij as is; kSqrt2 stores sqrt(2) Z_ij off the diagonal so
// that the Euclidean norm of a segment equals the Frobenius norm of its block.
enum class TrilScaling { kPlain, kSqrt2 };

// Linear constraints of the reduced program:
//   G x = e            (null space, one row per coarse vertex)
//   C x = D z          (one row per lower-triangular entry of the chordal pattern)
struct ConstraintMaps {
  Eigen::SparseMatrix<double> G;
  Eigen::VectorXd e;
  std::vector<Index> row_of_x;  // x_E entry -> tril(C) row
  std::vector<Index> x_of_row;  // tril(C) row -> x_E entry, -1 for fill entries
  std::vector<Index> row_of_z;  // per-clique tril entry -> tril(C) row
  Eigen::VectorXd z_coeff;      // D coefficient of each z entry
  Eigen::VectorXd cover;        // diagonal of D D'

  Index rows() const { return static_cast<Index>(x_of_row.size()); }
  Eigen::SparseMatrix<double> C_matrix() const;
  Eigen::SparseMatrix<double> D_matrix() const;
};

ConstraintMaps assemble_constraints(const Eigen::VectorXd& v, const Eigen::VectorXd& e,
                                    const TrilIndexMap& map_E, const CliqueSet& cliques,
                                    const TrilIndexMap& map_C, TrilScaling scaling);

struct AdmmParams {
  double rho0 = 10.0;
  double mu = 10.0;
  double tau_incr = 2.0;
  double tau_decr = 2.0;
  double eps_abs = 1e-6;
  double eps_rel = 1e-4;
  Index max_iter = 5000;
  Index clique_threshold = 200;
  Index workers = 0;            // 0: COARSEN_WORKERS, else hardware concurrency
  Index dense_kkt_limit = 20000;
  bool record_timing = true;    // false writes zero timings (byte-stable output)
  TrilScaling scaling = TrilScaling::kSqrt2;

  void validate() const;
};

struct CoarseningProblem {
  TrilIndexMap map_E;
  SymPattern extension;         // chordal extension of E before merging
  TrilIndexMap map_C;           // pattern covered by the merged blocks
  CliqueSet cliques;
  Index clique_count_before_merge = 0;
  EnergyTerms energy;
  ConstraintMaps constraints;
  Eigen::VectorXd v;
  TrilScaling scaling = TrilScaling::kSqrt2;

  Index x_size() const { return map_E.size(); }
  Index z_size() const { return cliques.total_tril(); }
  Index dim() const { return map_E.dim(); }
};

CoarseningProblem make_problem(EnergyTerms energy, const SymPattern& E, const Eigen::VectorXd& v,
                               const Eigen::VectorXd& e, const AdmmParams& params);

double objective(const CoarseningProblem& problem, const Eigen::Ref<const Eigen::VectorXd>& x);
double objective(const EnergyTerms& energy, const Eigen::Ref<const Eigen::VectorXd>& x);

// Factorization of
//   [ H   C'          G' ]
//   [ C   -DD'/rho    0  ]
//   [ G   0           0  ]
// by block elimination: DD' is diagonal, so the multiplier block folds into
// K = H + rho C'(DD')^-1 C, which is positive definite; the G rows are then
// handled through the Schur complement G K^-1 G'.
class KktFactorization {
 public:
  // Systems with more than dense_limit unknowns use a sparse LU of the
  // reduced saddle point matrix instead.
  KktFactorization(const CoarseningProblem& problem, double rho, Index dense_limit = 20000);

  double rho() const { return rho_; }
  bool regularized() const { return regularized_; }

  struct Solution {
    Eigen::VectorXd x, mu1, mu2;
  };
  Solution solve(const Eigen::VectorXd& rhs_x, const Eigen::VectorXd& rhs_c, const Eigen::VectorXd& rhs_g) const;

 private:
  Eigen::VectorXd reduced_rhs(const Eigen::VectorXd& rhs_x, const Eigen::VectorXd& rhs_c) const;

  const CoarseningProblem* problem_;
  double rho_;
  bool regularized_ = false;
  bool dense_;
  Eigen::LLT<Eigen::MatrixXd> k_llt_;
  Eigen::MatrixXd k_inv_gt_;
  Eigen::LLT<Eigen::MatrixXd> schur_llt_;
  std::unique_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> saddle_lu_;
};

struct XUpdate {
  Eigen::VectorXd x, y, mu1, mu2;
};

// Throws std::logic_error when the factorization was built for another rho.
XUpdate x_update(const CoarseningProblem& problem, const KktFactorization& fact,
                 const Eigen::VectorXd& z, const Eigen::VectorXd& u, double rho);

// Per-clique PSD projection of y + u, blocks distributed over `workers`
// threads writing disjoint segments.
Eigen::VectorXd z_update(const CoarseningProblem& problem, const Eigen::VectorXd& y,
                         const Eigen::VectorXd& u, Index workers = 1);

// Dense symmetric block of clique k from a segment in the given scaling, and back.
Eigen::MatrixXd expand_block(const CliqueSet& cliques, Index k, const Eigen::Ref<const Eigen::VectorXd>& seg,
                             TrilScaling scaling);
void compress_block(const Eigen::Ref<const Eigen::MatrixXd>& block, TrilScaling scaling,
                    Eigen::Ref<Eigen::VectorXd> seg);

struct IterationRecord {
  Index iter = 0;
  double r_norm = 0.0;
  double s_norm = 0.0;
  double rho = 0.0;
  double objective = 0.0;
  double ms_x = 0.0;
  double ms_z = 0.0;
  double eps_pri = 0.0;
  double eps_dual = 0.0;
};

struct AdmmState {
  Eigen::VectorXd x, y, z, u;
  double rho = 0.0;
  std::optional<KktFactorization> cache;
  Index iteration = 0;
  Index factorizations = 0;
  double ms_factorize = 0.0;
  double ms_x = 0.0;
  double ms_z = 0.0;
  std::vector<IterationRecord> history;
};

// Warm start: x = x0, z = clique_decomposition of expand(x0) (exact when
// it is PSD, negative pivots dropped otherwise), y = z, u = 0.
AdmmState initial_state(const CoarseningProblem& problem, const Eigen::VectorXd& x0, const AdmmParams& params);

// One x-update, z-update, dual update, residuals and penalty adaptation.
// Throws std::runtime_error on a non-finite iterate.
void iterate(AdmmState& state, const CoarseningProblem& problem, const AdmmParams& params);

// Penalty rule; returns the new rho.
double update_penalty(double rho, double r_norm, double s_norm, const AdmmParams& params);

enum class Termination { kConverged, kMaxIter };

struct Certificate {
  bool pattern_ok = false;
  double nullspace_residual = 0.0;  // ||X v - e||_inf
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double min_block_eigenvalue = 0.0;
  double clique_gap = 0.0;          // ||C x - D z||_inf
  bool passed = false;
};

struct SolveReport {
  Index iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double objective = 0.0;
  double ms_factorize = 0.0;
  double ms_x_update = 0.0;
  double ms_z_update = 0.0;
  Index factorizations = 0;
  std::vector<std::pair<Index, double>> rho_trajectory;  // (iteration, new rho)
  Termination termination = Termination::kMaxIter;
  Certificate certificate;
  std::vector<IterationRecord> history;
};

struct SolveResult {
  SymSparse X;
  Eigen::VectorXd x;
  SolveReport report;
};

SolveResult solve(const CoarseningProblem& problem, const AdmmParams& params, const Eigen::VectorXd& x0);

// X_ii -= ((X v)_i - e_i) / v_i.
Eigen::VectorXd null_space_repair(const TrilIndexMap& map_E, const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& v, const Eigen::VectorXd& e);

Certificate certify(const CoarseningProblem& problem, const Eigen::VectorXd& x, const Eigen::VectorXd& z,
                    const Eigen::VectorXd& e);

// P_E(R L R') compressed; the warm start.
Eigen::VectorXd galerkin_guess(const SymSparse& L, const RowSelection& R, const TrilIndexMap& map_E);

// Comparison operator: the Galerkin guess projected to the PSD cone,
// restricted back to E and null-space repaired.
Eigen::VectorXd galerkin_baseline(const SymSparse& L, const RowSelection& R, const TrilIndexMap& map_E,
                                  const Eigen::VectorXd& v, const Eigen::VectorXd& e);

std::string termination_name(Termination t);
void write_trace_csv(const std::filesystem::path& path, const std::vector<IterationRecord>& history);
void write_report_json(const std::filesystem::path& path, const SolveReport& report);

Index resolve_workers(Index requested);

}  // namespace coarsen
