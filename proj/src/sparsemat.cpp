#include "coarsen/sparsemat.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <stdexcept>
#include <string>

namespace coarsen {

SymPattern::SymPattern(Index n, std::span<const IndexPair> pairs) : n_(n) {
  if (n < 0) throw std::invalid_argument("SymPattern: negative dimension");
  std::vector<IndexPair> lower;
  lower.reserve(pairs.size() + static_cast<std::size_t>(n));
  for (auto [i, j] : pairs) {
    if (i < 0 || j < 0 || i >= n || j >= n) {
      throw std::out_of_range("SymPattern: index pair (" + std::to_string(i) + ", " +
                              std::to_string(j) + ") outside dimension " + std::to_string(n));
    }
    lower.emplace_back(std::max(i, j), std::min(i, j));
  }
  for (Index i = 0; i < n; ++i) lower.emplace_back(i, i);

  // column-major: sort by (col, row)
  std::ranges::sort(lower, [](const IndexPair& a, const IndexPair& b) {
    return a.second != b.second ? a.second < b.second : a.first < b.first;
  });
  lower.erase(std::unique(lower.begin(), lower.end()), lower.end());

  col_ptr_.assign(static_cast<std::size_t>(n) + 1, 0);
  row_idx_.reserve(lower.size());
  for (auto [i, j] : lower) {
    ++col_ptr_[j + 1];
    row_idx_.push_back(i);
  }
  for (Index j = 0; j < n; ++j) col_ptr_[j + 1] += col_ptr_[j];
}

SymPattern SymPattern::diagonal(Index n) { return SymPattern(n, {}); }

SymPattern SymPattern::full(Index n) {
  std::vector<IndexPair> all;
  all.reserve(static_cast<std::size_t>(n * (n + 1) / 2));
  for (Index j = 0; j < n; ++j)
    for (Index i = j; i < n; ++i) all.emplace_back(i, j);
  return SymPattern(n, all);
}

bool SymPattern::contains(Index i, Index j) const {
  if (i < j) std::swap(i, j);
  if (j < 0 || i >= n_) return false;
  auto col = column(j);
  return std::ranges::binary_search(col, i);
}

std::vector<IndexPair> SymPattern::entries() const {
  std::vector<IndexPair> out;
  out.reserve(row_idx_.size());
  for (Index j = 0; j < n_; ++j)
    for (Index i : column(j)) out.emplace_back(i, j);
  return out;
}

std::vector<std::vector<Index>> SymPattern::adjacency() const {
  std::vector<std::vector<Index>> adj(static_cast<std::size_t>(n_));
  for (Index j = 0; j < n_; ++j) {
    for (Index i : column(j)) {
      if (i == j) continue;
      adj[i].push_back(j);
      adj[j].push_back(i);
    }
  }
  for (auto& a : adj) std::ranges::sort(a);
  return adj;
}

bool SymPattern::is_subset_of(const SymPattern& other) const {
  return n_ == other.n_ && count_missing_from(other) == 0;
}

Index SymPattern::count_missing_from(const SymPattern& other) const {
  if (n_ != other.n_) throw std::invalid_argument("SymPattern: dimension mismatch");
  Index missing = 0;
  for (Index j = 0; j < n_; ++j) {
    auto mine = column(j);
    auto theirs = other.column(j);
    std::size_t q = 0;
    for (Index i : mine) {
      while (q < theirs.size() && theirs[q] < i) ++q;
      if (q == theirs.size() || theirs[q] != i) ++missing;
    }
  }
  return missing;
}

SymPattern pattern_from_edges(std::span<const IndexPair> edges, Index n) {
  return SymPattern(n, edges);
}

SymPattern pattern_power(const SymPattern& p, int rings) {
  if (rings < 1) throw std::invalid_argument("pattern_power: ring count must be >= 1");
  const Index n = p.size();
  const auto adj = p.adjacency();
  std::vector<IndexPair> pairs;
  std::vector<int> depth(static_cast<std::size_t>(n), -1);
  std::vector<Index> touched;
  std::deque<Index> queue;
  for (Index s = 0; s < n; ++s) {
    depth[s] = 0;
    touched.assign(1, s);
    queue.assign(1, s);
    while (!queue.empty()) {
      Index v = queue.front();
      queue.pop_front();
      if (depth[v] == rings) continue;
      for (Index w : adj[v]) {
        if (depth[w] >= 0) continue;
        depth[w] = depth[v] + 1;
        touched.push_back(w);
        queue.push_back(w);
      }
    }
    for (Index w : touched) {
      if (w > s) pairs.emplace_back(w, s);
      depth[w] = -1;
    }
  }
  return SymPattern(n, pairs);
}

TrilIndexMap::TrilIndexMap(SymPattern pattern) : pattern_(std::move(pattern)) {
  rows_.reserve(static_cast<std::size_t>(pattern_.nnz()));
  cols_.reserve(static_cast<std::size_t>(pattern_.nnz()));
  for (Index j = 0; j < pattern_.size(); ++j) {
    for (Index i : pattern_.column(j)) {
      rows_.push_back(i);
      cols_.push_back(j);
    }
  }
}

Index TrilIndexMap::find(Index i, Index j) const {
  if (i < j) std::swap(i, j);
  if (j < 0 || i >= pattern_.size()) return -1;
  auto col = pattern_.column(j);
  auto it = std::ranges::lower_bound(col, i);
  if (it == col.end() || *it != i) return -1;
  return pattern_.column_start(j) + (it - col.begin());
}

Index TrilIndexMap::index(Index i, Index j) const {
  Index a = find(i, j);
  if (a < 0) {
    throw std::out_of_range("TrilIndexMap: (" + std::to_string(i) + ", " + std::to_string(j) +
                            ") not in pattern");
  }
  return a;
}

Breadth TrilIndexMap::breadth(Index a) const {
  const Index n = pattern_.size();
  const Index i = rows_[a];
  const Index j = cols_[a];
  Breadth b;
  b.positions[0] = j * n + i;
  b.count = 1;
  if (i != j) {
    b.positions[1] = i * n + j;
    b.count = 2;
  }
  return b;
}

TrilIndexMap tril_index_map(const SymPattern& p) { return TrilIndexMap(p); }

Eigen::MatrixXd expand(const TrilIndexMap& map, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != map.size()) {
    throw std::invalid_argument("expand: vector length " + std::to_string(x.size()) +
                                " does not match pattern size " + std::to_string(map.size()));
  }
  const Index n = map.dim();
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(n, n);
  for (Index a = 0; a < map.size(); ++a) {
    X(map.row(a), map.col(a)) = x[a];
    X(map.col(a), map.row(a)) = x[a];
  }
  return X;
}

Eigen::SparseMatrix<double> expand_sparse(const TrilIndexMap& map,
                                          const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != map.size()) {
    throw std::invalid_argument("expand_sparse: vector length " + std::to_string(x.size()) +
                                " does not match pattern size " + std::to_string(map.size()));
  }
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(2 * map.size()));
  for (Index a = 0; a < map.size(); ++a) {
    trips.emplace_back(map.row(a), map.col(a), x[a]);
    if (!map.is_diagonal(a)) trips.emplace_back(map.col(a), map.row(a), x[a]);
  }
  Eigen::SparseMatrix<double> X(map.dim(), map.dim());
  X.setFromTriplets(trips.begin(), trips.end());
  return X;
}

Eigen::VectorXd compress(const TrilIndexMap& map, const Eigen::Ref<const Eigen::MatrixXd>& X) {
  const Index n = map.dim();
  if (X.rows() != n || X.cols() != n) throw std::invalid_argument("compress: dimension mismatch");
  const double scale = X.cwiseAbs().maxCoeff();
  const double asym = (X - X.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * scale) {
    throw std::invalid_argument("compress: matrix is not symmetric (max |X - X^T| = " +
                                format_double(asym) + ")");
  }
  Eigen::VectorXd x(map.size());
  for (Index a = 0; a < map.size(); ++a) x[a] = X(map.row(a), map.col(a));
  return x;
}

Eigen::VectorXd compress(const TrilIndexMap& map, const Eigen::SparseMatrix<double>& X) {
  const Index n = map.dim();
  if (X.rows() != n || X.cols() != n) throw std::invalid_argument("compress: dimension mismatch");
  Eigen::SparseMatrix<double> Xt = X.transpose();
  Eigen::SparseMatrix<double> diff = X - Xt;
  double scale = 0.0;
  for (Index k = 0; k < X.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(X, k); it; ++it)
      scale = std::max(scale, std::abs(it.value()));
  double asym = 0.0;
  for (Index k = 0; k < diff.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(diff, k); it; ++it)
      asym = std::max(asym, std::abs(it.value()));
  if (asym > 1e-12 * scale) {
    throw std::invalid_argument("compress: matrix is not symmetric (max |X - X^T| = " +
                                format_double(asym) + ")");
  }
  Eigen::VectorXd x = Eigen::VectorXd::Zero(map.size());
  for (Index k = 0; k < X.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(X, k); it; ++it) {
      if (it.row() < it.col()) continue;
      Index a = map.find(it.row(), it.col());
      if (a >= 0) x[a] = it.value();
    }
  }
  return x;
}

SymSparse::SymSparse(SymPattern p, Eigen::VectorXd v) : pattern(std::move(p)), values(std::move(v)) {
  if (values.size() != pattern.nnz()) {
    throw std::invalid_argument("SymSparse: " + std::to_string(values.size()) + " values for " +
                                std::to_string(pattern.nnz()) + " pattern entries");
  }
  if (!values.allFinite()) throw std::invalid_argument("SymSparse: non-finite value");
}

SymSparse SymSparse::diagonal(const Eigen::VectorXd& d) {
  return SymSparse(SymPattern::diagonal(d.size()), d);
}

Eigen::SparseMatrix<double> SymSparse::to_sparse() const {
  return expand_sparse(TrilIndexMap(pattern), values);
}

Eigen::MatrixXd SymSparse::to_dense() const { return expand(TrilIndexMap(pattern), values); }

Eigen::VectorXd SymSparse::diagonal_values() const {
  Eigen::VectorXd d(size());
  for (Index j = 0; j < size(); ++j) d[j] = values[pattern.column_start(j)];
  return d;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace coarsen
