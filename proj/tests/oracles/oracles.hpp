#pragma once

// Brute-force references used by the unit and acceptance tests. Nothing here
// calls the library algorithm it is meant to check.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include "coarsen/sparsemat.hpp"

namespace oracle {

using coarsen::Index;
using coarsen::IndexPair;
using coarsen::SymPattern;
using BoolMat = std::vector<std::vector<char>>;

inline BoolMat dense_adjacency(const SymPattern& p) {
  const Index n = p.size();
  BoolMat a(n, std::vector<char>(n, 0));
  for (auto [i, j] : p.entries()) {
    if (i != j) a[i][j] = a[j][i] = 1;
  }
  return a;
}

inline SymPattern from_adjacency(const BoolMat& a) {
  std::vector<IndexPair> e;
  const Index n = static_cast<Index>(a.size());
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < i; ++j) {
      if (a[i][j]) e.emplace_back(i, j);
    }
  }
  return SymPattern(n, e);
}

// Graph-distance <= r, by Floyd-Warshall.
inline SymPattern distance_power(const SymPattern& p, int r) {
  const Index n = p.size();
  const Index inf = n + 1;
  std::vector<std::vector<Index>> d(n, std::vector<Index>(n, inf));
  auto a = dense_adjacency(p);
  for (Index i = 0; i < n; ++i) {
    d[i][i] = 0;
    for (Index j = 0; j < n; ++j) {
      if (a[i][j]) d[i][j] = 1;
    }
  }
  for (Index k = 0; k < n; ++k)
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
  BoolMat out(n, std::vector<char>(n, 0));
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) out[i][j] = i != j && d[i][j] <= r;
  return from_adjacency(out);
}

// Elimination game on a dense adjacency matrix: eliminating v joins all of
// its not-yet-eliminated neighbours.
inline SymPattern elimination_game(const SymPattern& p, const std::vector<Index>& order) {
  auto a = dense_adjacency(p);
  const Index n = p.size();
  std::vector<char> gone(n, 0);
  for (Index v : order) {
    std::vector<Index> nb;
    for (Index w = 0; w < n; ++w) {
      if (!gone[w] && a[v][w]) nb.push_back(w);
    }
    for (Index x : nb)
      for (Index y : nb)
        if (x != y) a[x][y] = 1;
    gone[v] = 1;
  }
  return from_adjacency(a);
}

// Chordal iff simplicial vertices can be removed one at a time (Dirac).
inline bool is_chordal_by_simplicial_removal(const SymPattern& p) {
  auto a = dense_adjacency(p);
  const Index n = p.size();
  std::vector<char> gone(n, 0);
  for (Index step = 0; step < n; ++step) {
    bool found = false;
    for (Index v = 0; v < n && !found; ++v) {
      if (gone[v]) continue;
      std::vector<Index> nb;
      for (Index w = 0; w < n; ++w)
        if (!gone[w] && a[v][w]) nb.push_back(w);
      bool clique = true;
      for (std::size_t x = 0; x < nb.size() && clique; ++x)
        for (std::size_t y = x + 1; y < nb.size() && clique; ++y) clique = a[nb[x]][nb[y]];
      if (clique) {
        gone[v] = 1;
        found = true;
      }
    }
    if (!found) return false;
  }
  return true;
}

// Minimum fill over every elimination order (every minimal triangulation is
// produced by some order). Factorial cost: n <= 8.
inline Index min_fill_exhaustive(const SymPattern& p) {
  std::vector<Index> order(p.size());
  std::iota(order.begin(), order.end(), Index{0});
  Index best = -1;
  do {
    Index fill = elimination_game(p, order).nnz() - p.nnz();
    if (best < 0 || fill < best) best = fill;
  } while (std::next_permutation(order.begin(), order.end()));
  return best;
}

inline SymPattern cycle(Index n) {
  std::vector<IndexPair> e;
  for (Index i = 0; i < n; ++i) e.emplace_back(i, (i + 1) % n);
  return SymPattern(n, e);
}

inline SymPattern random_pattern(Index n, double density, std::mt19937& rng) {
  std::bernoulli_distribution coin(density);
  std::vector<IndexPair> e;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < i; ++j)
      if (coin(rng)) e.emplace_back(i, j);
  return SymPattern(n, e);
}

// Random chordal pattern: fill of a random graph under a random order.
inline SymPattern random_chordal(Index n, double density, std::mt19937& rng) {
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  std::shuffle(order.begin(), order.end(), rng);
  return elimination_game(random_pattern(n, density, rng), order);
}

// All maximal cliques of a small graph by Bron-Kerbosch without pivoting.
inline void bron_kerbosch(const BoolMat& a, std::vector<Index>& r, std::vector<Index> p, std::vector<Index> x,
                          std::vector<std::vector<Index>>& out) {
  if (p.empty() && x.empty()) {
    auto c = r;
    std::sort(c.begin(), c.end());
    out.push_back(c);
    return;
  }
  while (!p.empty()) {
    Index v = p.back();
    std::vector<Index> np, nx;
    for (Index w : p)
      if (a[v][w]) np.push_back(w);
    for (Index w : x)
      if (a[v][w]) nx.push_back(w);
    r.push_back(v);
    bron_kerbosch(a, r, np, nx, out);
    r.pop_back();
    p.pop_back();
    x.push_back(v);
  }
}

inline std::vector<std::vector<Index>> maximal_cliques_bk(const SymPattern& p) {
  auto a = dense_adjacency(p);
  std::vector<Index> all(p.size()), r;
  std::iota(all.begin(), all.end(), Index{0});
  std::vector<std::vector<Index>> out;
  bron_kerbosch(a, r, all, {}, out);
  std::sort(out.begin(), out.end());
  return out;
}

// P-bar_E as an explicit m^2 x |x_E| 0/1 matrix, vec position j*m + i.
inline Eigen::MatrixXd scatter_matrix(const SymPattern& p) {
  const Index m = p.size();
  const auto ent = p.entries();
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(m * m, static_cast<Index>(ent.size()));
  for (std::size_t a = 0; a < ent.size(); ++a) {
    auto [i, j] = ent[a];
    P(j * m + i, static_cast<Index>(a)) = 1.0;
    P(i * m + j, static_cast<Index>(a)) = 1.0;
  }
  return P;
}

// H = E'E, g = E'w with E = (U' kron V) P-bar_E materialized densely.
struct DenseEnergy {
  Eigen::MatrixXd H;
  Eigen::VectorXd g;
  double f0 = 0.0;
};

inline DenseEnergy kronecker_energy(const Eigen::MatrixXd& U, const Eigen::VectorXd& V, const Eigen::MatrixXd& W,
                                    const SymPattern& p) {
  const Eigen::MatrixXd Vd = V.asDiagonal();
  const Eigen::MatrixXd K = Eigen::kroneckerProduct(U.transpose(), Vd);
  const Eigen::MatrixXd E = K * scatter_matrix(p);
  const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(W.data(), W.size());
  return {E.transpose() * E, E.transpose() * w, 0.5 * w.squaredNorm()};
}

// Solves the full KKT block system with a dense pivoted LU.
struct DenseKkt {
  Eigen::VectorXd x, mu1, mu2;
};

inline DenseKkt dense_kkt(const Eigen::MatrixXd& H, const Eigen::MatrixXd& C, const Eigen::MatrixXd& D,
                          const Eigen::MatrixXd& G, double rho, const Eigen::VectorXd& r1, const Eigen::VectorXd& r2,
                          const Eigen::VectorXd& r3) {
  const Index n = H.rows(), c = C.rows(), m = G.rows();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n + c + m, n + c + m);
  A.block(0, 0, n, n) = H;
  A.block(0, n, n, c) = C.transpose();
  A.block(0, n + c, n, m) = G.transpose();
  A.block(n, 0, c, n) = C;
  A.block(n, n, c, c) = -(D * D.transpose()) / rho;
  A.block(n + c, 0, m, n) = G;
  Eigen::VectorXd b(n + c + m);
  b << r1, r2, r3;
  const Eigen::VectorXd s = A.fullPivLu().solve(b);
  return {s.head(n), s.segment(n, c), s.tail(m)};
}

// Biharmonic distance from the full pseudo-inverse:
// d(i, j)^2 = (e_i - e_j)' M^-1/2 pinv(A)^2 M^-1/2 (e_i - e_j), A = M^-1/2 L M^-1/2.
inline Eigen::VectorXd pinv_biharmonic(const Eigen::MatrixXd& L, const Eigen::VectorXd& mass, Index src) {
  const Eigen::VectorXd s = mass.cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd A = s.asDiagonal() * L * s.asDiagonal();
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);
  cod.setThreshold(1e-10);
  const Eigen::MatrixXd Ap = cod.pseudoInverse();
  const Eigen::MatrixXd G = s.asDiagonal() * Ap * Ap * s.asDiagonal();
  const Index n = L.rows();
  Eigen::VectorXd d(n);
  for (Index i = 0; i < n; ++i) d[i] = std::sqrt(std::max(0.0, G(i, i) + G(src, src) - 2.0 * G(i, src)));
  return d;
}

inline Eigen::MatrixXd random_psd(Index s, Index rank, std::mt19937& rng) {
  std::normal_distribution<double> nd;
  Eigen::MatrixXd B(s, rank);
  for (Index i = 0; i < s; ++i)
    for (Index j = 0; j < rank; ++j) B(i, j) = nd(rng);
  return B * B.transpose();
}

inline Eigen::MatrixXd random_symmetric(Index s, std::mt19937& rng) {
  std::normal_distribution<double> nd;
  Eigen::MatrixXd B(s, s);
  for (Index i = 0; i < s; ++i)
    for (Index j = 0; j < s; ++j) B(i, j) = nd(rng);
  return (B + B.transpose()) / 2.0;
}

}  // namespace oracle
