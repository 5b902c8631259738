#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace coarsen {

using Index = Eigen::Index;
using IndexPair = std::pair<Index, Index>;

// Non-zero structure of an n x n symmetric matrix, stored as the lower
// triangle in column-major order (ascending column, then ascending row).
// The diagonal is always present.
class SymPattern {
 public:
  SymPattern() = default;

  // Canonicalizes an arbitrary list of pairs: mirrors (i, j) with i < j,
  // drops duplicates, adds the full diagonal. Throws std::out_of_range for
  // indices outside [0, n).
  SymPattern(Index n, std::span<const IndexPair> pairs);

  static SymPattern diagonal(Index n);
  static SymPattern full(Index n);

  Index size() const { return n_; }
  Index nnz() const { return static_cast<Index>(row_idx_.size()); }

  // Rows i >= j present in column j, ascending.
  std::span<const Index> column(Index j) const {
    return {row_idx_.data() + col_ptr_[j], row_idx_.data() + col_ptr_[j + 1]};
  }
  Index column_start(Index j) const { return col_ptr_[j]; }

  // Order-insensitive membership test.
  bool contains(Index i, Index j) const;

  // Entries (i, j), i >= j, in canonical order.
  std::vector<IndexPair> entries() const;

  // Off-diagonal neighbours of every vertex, ascending.
  std::vector<std::vector<Index>> adjacency() const;

  bool is_subset_of(const SymPattern& other) const;

  // Entries of *this not present in other.
  Index count_missing_from(const SymPattern& other) const;

  friend bool operator==(const SymPattern& a, const SymPattern& b) {
    return a.n_ == b.n_ && a.col_ptr_ == b.col_ptr_ && a.row_idx_ == b.row_idx_;
  }

 private:
  Index n_ = 0;
  std::vector<Index> col_ptr_{0};
  std::vector<Index> row_idx_;
};

SymPattern pattern_from_edges(std::span<const IndexPair> edges, Index n);

// Pattern of the r-th power of the adjacency graph: (i, j) present iff the
// graph distance between i and j is at most r.
SymPattern pattern_power(const SymPattern& p, int rings);

// Up to two positions of a compressed entry inside the column-major vec(X).
struct Breadth {
  std::array<Index, 2> positions{};
  int count = 0;

  auto begin() const { return positions.begin(); }
  auto end() const { return positions.begin() + count; }
};

// Bijection between the lower-triangular entries of a pattern and the
// compressed vector x_E, plus the scatter positions into vec(X) (the P_E /
// inverse P_E pair). vec uses position(i, j) = j * n + i.
class TrilIndexMap {
 public:
  TrilIndexMap() = default;
  explicit TrilIndexMap(SymPattern pattern);

  const SymPattern& pattern() const { return pattern_; }
  Index dim() const { return pattern_.size(); }
  Index size() const { return static_cast<Index>(rows_.size()); }

  // Compressed index of (i, j) in either order, or -1 when absent.
  Index find(Index i, Index j) const;
  // As find(), but throws std::out_of_range when absent.
  Index index(Index i, Index j) const;

  Index row(Index a) const { return rows_[a]; }
  Index col(Index a) const { return cols_[a]; }
  bool is_diagonal(Index a) const { return rows_[a] == cols_[a]; }

  Breadth breadth(Index a) const;

 private:
  SymPattern pattern_;
  std::vector<Index> rows_;
  std::vector<Index> cols_;
};

TrilIndexMap tril_index_map(const SymPattern& p);

// Column-major lower-triangular index of (a, b), a >= b, inside a dense s x s
// block. Agrees with TrilIndexMap(SymPattern::full(s)).
inline Index dense_tril_index(Index s, Index a, Index b) {
  return b * s - (b * (b - 1)) / 2 + (a - b);
}
inline Index dense_tril_size(Index s) { return s * (s + 1) / 2; }

Eigen::MatrixXd expand(const TrilIndexMap& map, const Eigen::Ref<const Eigen::VectorXd>& x);
Eigen::SparseMatrix<double> expand_sparse(const TrilIndexMap& map,
                                          const Eigen::Ref<const Eigen::VectorXd>& x);

// Entries outside the pattern are ignored. Throws std::invalid_argument when X
// is not symmetric to 1e-12 relative to its largest entry.
Eigen::VectorXd compress(const TrilIndexMap& map, const Eigen::Ref<const Eigen::MatrixXd>& X);
Eigen::VectorXd compress(const TrilIndexMap& map, const Eigen::SparseMatrix<double>& X);

// Values on the lower triangle of a pattern, aligned with its canonical order.
struct SymSparse {
  SymPattern pattern;
  Eigen::VectorXd values;

  SymSparse() = default;
  SymSparse(SymPattern p, Eigen::VectorXd v);

  static SymSparse diagonal(const Eigen::VectorXd& d);

  Index size() const { return pattern.size(); }
  Eigen::SparseMatrix<double> to_sparse() const;
  Eigen::MatrixXd to_dense() const;
  Eigen::VectorXd diagonal_values() const;
};

// Matrix Market coordinate I/O, "symmetric" qualifier, lower triangle on disk.
SymSparse mm_read(const std::filesystem::path& path);
void mm_write(const std::filesystem::path& path, const SymSparse& m);

// Dense "array real general" writer (column-major values).
void mm_write_dense(const std::filesystem::path& path, const Eigen::Ref<const Eigen::MatrixXd>& A);

// %.17g formatting used for every numeric text output.
std::string format_double(double v);

}  // namespace coarsen
