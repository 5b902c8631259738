#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "coarsen/admm.hpp"

namespace coarsen {

EnergyFactors energy_factors(const SymSparse& L, const Eigen::VectorXd& fine_mass,
                             const Eigen::VectorXd& coarse_mass, const RowSelection& R,
                             const EigenBasis& basis, bool weighted) {
  const Index n = L.size();
  const Index m = coarse_mass.size();
  if (fine_mass.size() != n || R.cols() != n || R.rows() != m || basis.vectors.rows() != n) {
    throw std::invalid_argument("assemble_energy: dimension mismatch");
  }
  if (!(coarse_mass.array() > 0.0).all()) throw std::invalid_argument("assemble_energy: zero coarse mass");
  if (!(fine_mass.array() > 0.0).all()) throw std::invalid_argument("assemble_energy: non-positive fine mass");

  EnergyFactors f;
  Eigen::MatrixXd phi;
  if (weighted) {
    // spectral scale from the operator itself so a basis holding only the null pair is still cut
    double scale = basis.count() > 0 ? basis.values.maxCoeff() : 0.0;
    const Eigen::VectorXd d = L.diagonal_values();
    for (Index i = 0; i < n; ++i) scale = std::max(scale, std::abs(d[i]) / fine_mass[i]);
    const double eps_null = 1e-8 * scale;
    std::vector<Index> keep;
    for (Index c = 0; c < basis.count(); ++c) {
      if (basis.values[c] > eps_null) keep.push_back(c);
    }
    f.dropped_null_pairs = basis.count() - static_cast<Index>(keep.size());
    phi.resize(n, static_cast<Index>(keep.size()));
    for (std::size_t c = 0; c < keep.size(); ++c) {
      phi.col(static_cast<Index>(c)) = basis.vectors.col(keep[c]) / basis.values[keep[c]];
    }
  } else {
    phi = basis.vectors;
  }
  if (phi.cols() == 0) {
    throw std::invalid_argument("assemble_energy: no test functions left (weighted mode drops null eigenpairs; raise k)");
  }

  f.U = R * phi;
  const Eigen::MatrixXd Lphi = L.to_sparse() * phi;
  f.W = coarse_mass.cwiseSqrt().asDiagonal() * (R * (fine_mass.cwiseInverse().asDiagonal() * Lphi));
  f.V = coarse_mass.cwiseSqrt().cwiseInverse();
  return f;
}

EnergyTerms assemble_energy(const EnergyFactors& factors, const TrilIndexMap& map_E) {
  const Index m = map_E.dim();
  const Index nx = map_E.size();
  if (factors.U.rows() != m || factors.W.rows() != m || factors.V.size() != m ||
      factors.U.cols() != factors.W.cols()) {
    throw std::invalid_argument("assemble_energy: factor dimensions do not match the pattern");
  }
  const Eigen::MatrixXd S = factors.U * factors.U.transpose();
  const Eigen::VectorXd T = factors.V.cwiseAbs2();
  const Eigen::MatrixXd B = factors.V.asDiagonal() * factors.W * factors.U.transpose();

  // by_row[i] holds (a, j) for every (i, j) in sym(a).
  std::vector<std::vector<std::pair<Index, Index>>> by_row(static_cast<std::size_t>(m));
  EnergyTerms out;
  out.g = Eigen::VectorXd::Zero(nx);
  for (Index a = 0; a < nx; ++a) {
    const Index i = map_E.row(a), j = map_E.col(a);
    by_row[i].emplace_back(a, j);
    out.g[a] += B(i, j);
    if (i != j) {
      by_row[j].emplace_back(a, i);
      out.g[a] += B(j, i);
    }
  }

  std::vector<Eigen::Triplet<double>> trip;
  std::size_t count = 0;
  for (const auto& row : by_row) count += row.size() * row.size();
  trip.reserve(count);
  for (Index i = 0; i < m; ++i) {
    for (const auto& [a, j] : by_row[i]) {
      for (const auto& [b, q] : by_row[i]) trip.emplace_back(a, b, T[i] * S(j, q));
    }
  }
  out.H.resize(nx, nx);
  out.H.setFromTriplets(trip.begin(), trip.end());
  out.H.makeCompressed();
  out.f0 = 0.5 * factors.W.squaredNorm();
  out.columns = factors.U.cols();
  out.dropped_null_pairs = factors.dropped_null_pairs;
  return out;
}

EnergyTerms assemble_energy(const SymSparse& L, const Eigen::VectorXd& fine_mass,
                            const Eigen::VectorXd& coarse_mass, const RowSelection& R,
                            const EigenBasis& basis, bool weighted, const TrilIndexMap& map_E) {
  return assemble_energy(energy_factors(L, fine_mass, coarse_mass, R, basis, weighted), map_E);
}

Eigen::SparseMatrix<double> ConstraintMaps::C_matrix() const {
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t a = 0; a < row_of_x.size(); ++a) trip.emplace_back(row_of_x[a], static_cast<Index>(a), 1.0);
  Eigen::SparseMatrix<double> C(rows(), static_cast<Index>(row_of_x.size()));
  C.setFromTriplets(trip.begin(), trip.end());
  return C;
}

Eigen::SparseMatrix<double> ConstraintMaps::D_matrix() const {
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t e = 0; e < row_of_z.size(); ++e) {
    trip.emplace_back(row_of_z[e], static_cast<Index>(e), z_coeff[static_cast<Index>(e)]);
  }
  Eigen::SparseMatrix<double> D(rows(), static_cast<Index>(row_of_z.size()));
  D.setFromTriplets(trip.begin(), trip.end());
  return D;
}

ConstraintMaps assemble_constraints(const Eigen::VectorXd& v, const Eigen::VectorXd& e,
                                    const TrilIndexMap& map_E, const CliqueSet& cliques,
                                    const TrilIndexMap& map_C, TrilScaling scaling) {
  const Index m = map_E.dim();
  if (v.size() != m || e.size() != m || map_C.dim() != m || cliques.dim() != m) {
    throw std::invalid_argument("assemble_constraints: dimension mismatch");
  }
  if (!(cliques.covered_pattern() == map_C.pattern())) {
    throw std::invalid_argument("assemble_constraints: clique union differs from the chordal pattern");
  }
  if (!map_E.pattern().is_subset_of(map_C.pattern())) {
    throw std::invalid_argument("assemble_constraints: chordal pattern does not contain E");
  }

  ConstraintMaps out;
  out.e = e;

  std::vector<Eigen::Triplet<double>> gt;
  for (Index a = 0; a < map_E.size(); ++a) {
    const Index i = map_E.row(a), j = map_E.col(a);
    gt.emplace_back(i, a, v[j]);
    if (i != j) gt.emplace_back(j, a, v[i]);
  }
  out.G.resize(m, map_E.size());
  out.G.setFromTriplets(gt.begin(), gt.end());
  out.G.makeCompressed();

  out.x_of_row.assign(static_cast<std::size_t>(map_C.size()), -1);
  out.row_of_x.resize(static_cast<std::size_t>(map_E.size()));
  for (Index a = 0; a < map_E.size(); ++a) {
    const Index r = map_C.index(map_E.row(a), map_E.col(a));
    out.row_of_x[a] = r;
    out.x_of_row[r] = a;
  }

  const double off = scaling == TrilScaling::kSqrt2 ? 1.0 / std::sqrt(2.0) : 1.0;
  out.row_of_z.resize(static_cast<std::size_t>(cliques.total_tril()));
  out.z_coeff.resize(cliques.total_tril());
  out.cover = Eigen::VectorXd::Zero(map_C.size());
  for (Index k = 0; k < cliques.size(); ++k) {
    const auto c = cliques.clique(k);
    const Index s = cliques.block_size(k);
    const Index base = cliques.tril_offset(k);
    for (Index b = 0; b < s; ++b) {
      for (Index a = b; a < s; ++a) {
        const Index pos = base + dense_tril_index(s, a, b);
        const Index r = map_C.index(c[a], c[b]);
        const double coeff = a == b ? 1.0 : off;
        out.row_of_z[pos] = r;
        out.z_coeff[pos] = coeff;
        out.cover[r] += coeff * coeff;
      }
    }
  }
  return out;
}

void AdmmParams::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("AdmmParams: " + what); };
  if (!(rho0 > 0.0)) fail("rho0 must be positive");
  if (!(mu > 1.0)) fail("mu must exceed 1");
  if (!(tau_incr > 1.0) || !(tau_decr > 1.0)) fail("tau must exceed 1");
  if (!(eps_abs > 0.0) || !(eps_rel > 0.0)) fail("tolerances must be positive");
  if (max_iter < 1) fail("max_iter must be positive");
  if (clique_threshold < 1) fail("clique threshold must be positive");
  if (workers < 0) fail("workers must be non-negative");
  if (dense_kkt_limit < 0) fail("dense_kkt_limit must be non-negative");
}

CoarseningProblem make_problem(EnergyTerms energy, const SymPattern& E, const Eigen::VectorXd& v,
                               const Eigen::VectorXd& e, const AdmmParams& params) {
  params.validate();
  CoarseningProblem p;
  p.map_E = TrilIndexMap(E);
  if (energy.H.rows() != p.map_E.size() || energy.H.cols() != p.map_E.size() || energy.g.size() != p.map_E.size()) {
    throw std::invalid_argument("make_problem: energy terms do not match the pattern");
  }
  const ChordalExtension ext = chordal_extension(E);
  const CliqueSet maximal = maximal_cliques(ext.pattern, ext.ordering);
  p.extension = ext.pattern;
  p.clique_count_before_merge = maximal.size();
  p.cliques = merge_cliques(maximal, params.clique_threshold);
  p.map_C = TrilIndexMap(p.cliques.covered_pattern());
  p.scaling = params.scaling;
  p.v = v;
  p.constraints = assemble_constraints(v, e, p.map_E, p.cliques, p.map_C, params.scaling);
  p.energy = std::move(energy);
  return p;
}

double objective(const EnergyTerms& energy, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != energy.g.size()) throw std::invalid_argument("objective: size mismatch");
  const Eigen::VectorXd Hx = energy.H * x;
  return 0.5 * x.dot(Hx) - energy.g.dot(x) + energy.f0;
}

double objective(const CoarseningProblem& problem, const Eigen::Ref<const Eigen::VectorXd>& x) {
  return objective(problem.energy, x);
}

Eigen::VectorXd null_space_repair(const TrilIndexMap& map_E, const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& v, const Eigen::VectorXd& e) {
  const Index m = map_E.dim();
  Eigen::VectorXd Xv = Eigen::VectorXd::Zero(m);
  for (Index a = 0; a < map_E.size(); ++a) {
    const Index i = map_E.row(a), j = map_E.col(a);
    Xv[i] += x[a] * v[j];
    if (i != j) Xv[j] += x[a] * v[i];
  }
  Eigen::VectorXd out = x;
  for (Index i = 0; i < m; ++i) {
    if (v[i] != 0.0) out[map_E.index(i, i)] -= (Xv[i] - e[i]) / v[i];
  }
  return out;
}

Eigen::VectorXd galerkin_guess(const SymSparse& L, const RowSelection& R, const TrilIndexMap& map_E) {
  const Eigen::SparseMatrix<double> Ls = L.to_sparse();
  const Eigen::SparseMatrix<double> RLR = R * Ls * Eigen::SparseMatrix<double>(R.transpose());
  return compress(map_E, RLR);
}

Eigen::VectorXd galerkin_baseline(const SymSparse& L, const RowSelection& R, const TrilIndexMap& map_E,
                                  const Eigen::VectorXd& v, const Eigen::VectorXd& e) {
  const Eigen::MatrixXd projected = psd_project(expand(map_E, galerkin_guess(L, R, map_E)));
  return null_space_repair(map_E, compress(map_E, projected), v, e);
}

}  // namespace coarsen
