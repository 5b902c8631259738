#pragma once

#include <span>
#include <vector>

#include "coarsen/sparsemat.hpp"

namespace coarsen {

// Vertex elimination sequence: order[k] is the k-th vertex eliminated,
// position is its inverse. For a chordal pattern a perfect elimination
// ordering (PEO) eliminates each vertex while its later neighbours form a
// clique.
struct EliminationOrdering {
  std::vector<Index> order;
  std::vector<Index> position;

  EliminationOrdering() = default;
  explicit EliminationOrdering(std::vector<Index> order);

  static EliminationOrdering natural(Index n);
  EliminationOrdering reversed() const;
  Index size() const { return static_cast<Index>(order.size()); }
};

// Maximum-cardinality search (ties to the smallest vertex). Returns the
// reversed visit sequence, which is a PEO whenever the pattern is chordal.
EliminationOrdering mcs_order(const SymPattern& p);

// True iff eliminating in this order produces no fill.
bool is_perfect_elimination(const SymPattern& p, const EliminationOrdering& ord);

bool is_chordal(const SymPattern& p);

// Greedy minimum degree on the elimination graph, ties to the smallest index.
EliminationOrdering min_degree_order(const SymPattern& p);

// Filled pattern of symbolic Gaussian elimination in the given order.
SymPattern symbolic_fill(const SymPattern& p, const EliminationOrdering& ord);

struct ChordalExtension {
  SymPattern pattern;             // C, chordal, contains E
  EliminationOrdering ordering;   // a PEO of C
  Index fill = 0;                 // |C \ E| counted over lower-triangular entries
};

ChordalExtension chordal_extension(const SymPattern& E);

// Dense index blocks covering a chordal pattern.
// Each block is a sorted vertex list; blocks are kept in ascending
// lexicographic order. The per-block lower-triangular segments are laid out
// back to back, which is the layout of the solver's y, z and u vectors.
class CliqueSet {
 public:
  CliqueSet() = default;
  CliqueSet(Index n, std::vector<std::vector<Index>> blocks);

  Index dim() const { return n_; }
  Index size() const { return static_cast<Index>(blocks_.size()); }
  std::span<const Index> clique(Index k) const { return blocks_[k]; }
  const std::vector<std::vector<Index>>& cliques() const { return blocks_; }

  Index block_size(Index k) const { return static_cast<Index>(blocks_[k].size()); }
  Index tril_offset(Index k) const { return offsets_[k]; }
  Index tril_size(Index k) const { return offsets_[k + 1] - offsets_[k]; }
  Index total_tril() const { return offsets_.back(); }

  // Q_k: local lower-triangular layout of block k.
  TrilIndexMap local_map(Index k) const;

  // Union of every block's pair set.
  SymPattern covered_pattern() const;

  Index max_block() const;
  Index min_block() const;
  double mean_block() const;

 private:
  Index n_ = 0;
  std::vector<std::vector<Index>> blocks_;
  std::vector<Index> offsets_{0};
};

// Maximal cliques of a chordal pattern along a PEO. Throws
// std::invalid_argument when ord is not a PEO of C.
CliqueSet maximal_cliques(const SymPattern& C, const EliminationOrdering& ord);

// Clique tree as a spanning tree maximizing intersection sizes; components of
// a disconnected pattern are joined through empty separators. parent[k] is -1
// for the root; bfs lists every block, parents before children.
struct CliqueTree {
  std::vector<Index> parent;
  std::vector<Index> bfs;
};

CliqueTree clique_tree(const CliqueSet& cs);

// Bottom-up greedy merge along the clique tree: a child folds into its parent
// whenever the union has at most `threshold` vertices. Merged blocks need not
// be cliques of the input pattern; their covered_pattern() is the new chordal
// pattern.
CliqueSet merge_cliques(const CliqueSet& cs, Index threshold);

// Splits X = sum_k P_k' Z_k P_k over the blocks by LDL' along a perfect
// elimination ordering of their covered pattern; entries of X outside that
// pattern are ignored. Pivots <= 1e-14 max|diag| are dropped, so every Z_k is
// PSD and the split is exact whenever X is PSD.
std::vector<Eigen::MatrixXd> clique_decomposition(const CliqueSet& cs, const Eigen::Ref<const Eigen::MatrixXd>& X);

}  // namespace coarsen
