#include "coarsen/chordal.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>

namespace coarsen {

EliminationOrdering::EliminationOrdering(std::vector<Index> ord) : order(std::move(ord)) {
  position.assign(order.size(), -1);
  for (std::size_t k = 0; k < order.size(); ++k) {
    Index v = order[k];
    if (v < 0 || v >= static_cast<Index>(order.size()) || position[v] != -1) {
      throw std::invalid_argument("EliminationOrdering: not a permutation");
    }
    position[v] = static_cast<Index>(k);
  }
}

EliminationOrdering EliminationOrdering::natural(Index n) {
  std::vector<Index> ord(static_cast<std::size_t>(n));
  std::iota(ord.begin(), ord.end(), Index{0});
  return EliminationOrdering(std::move(ord));
}

EliminationOrdering EliminationOrdering::reversed() const {
  return EliminationOrdering(std::vector<Index>(order.rbegin(), order.rend()));
}

EliminationOrdering mcs_order(const SymPattern& p) {
  const Index n = p.size();
  const auto adj = p.adjacency();
  std::vector<Index> weight(static_cast<std::size_t>(n), 0);
  std::vector<char> visited(static_cast<std::size_t>(n), 0);
  std::vector<Index> visit;
  visit.reserve(static_cast<std::size_t>(n));
  for (Index step = 0; step < n; ++step) {
    Index best = -1;
    for (Index v = 0; v < n; ++v) {
      if (!visited[v] && (best < 0 || weight[v] > weight[best])) best = v;
    }
    visited[best] = 1;
    visit.push_back(best);
    for (Index w : adj[best])
      if (!visited[w]) ++weight[w];
  }
  std::ranges::reverse(visit);
  return EliminationOrdering(std::move(visit));
}

namespace {

// Higher neighbours (by elimination position) of every vertex after fill,
// stored as positions.
std::vector<std::set<Index>> filled_higher_positions(const SymPattern& p,
                                                     const EliminationOrdering& ord) {
  const Index n = p.size();
  if (ord.size() != n) throw std::invalid_argument("symbolic_fill: ordering size mismatch");
  std::vector<std::set<Index>> higher(static_cast<std::size_t>(n));
  for (Index j = 0; j < n; ++j) {
    for (Index i : p.column(j)) {
      if (i == j) continue;
      Index pi = ord.position[i], pj = ord.position[j];
      if (pi < pj) higher[pi].insert(pj);
      else higher[pj].insert(pi);
    }
  }
  // Eliminating the vertex at position k makes its higher set a clique; it is
  // enough to pass that set on to its first member, which is eliminated next
  // among them and forwards it in turn.
  for (Index k = 0; k < n; ++k) {
    if (higher[k].empty()) continue;
    auto it = higher[k].begin();
    Index parent = *it;
    for (++it; it != higher[k].end(); ++it) higher[parent].insert(*it);
  }
  return higher;
}

}  // namespace

SymPattern symbolic_fill(const SymPattern& p, const EliminationOrdering& ord) {
  auto higher = filled_higher_positions(p, ord);
  std::vector<IndexPair> pairs;
  for (Index k = 0; k < p.size(); ++k)
    for (Index q : higher[k]) pairs.emplace_back(ord.order[k], ord.order[q]);
  return SymPattern(p.size(), pairs);
}

bool is_perfect_elimination(const SymPattern& p, const EliminationOrdering& ord) {
  return symbolic_fill(p, ord).nnz() == p.nnz();
}

bool is_chordal(const SymPattern& p) { return is_perfect_elimination(p, mcs_order(p)); }

EliminationOrdering min_degree_order(const SymPattern& p) {
  const Index n = p.size();
  std::vector<std::set<Index>> adj(static_cast<std::size_t>(n));
  {
    auto a = p.adjacency();
    for (Index v = 0; v < n; ++v) adj[v].insert(a[v].begin(), a[v].end());
  }
  std::vector<char> gone(static_cast<std::size_t>(n), 0);
  std::vector<Index> order;
  order.reserve(static_cast<std::size_t>(n));
  for (Index step = 0; step < n; ++step) {
    Index best = -1;
    for (Index v = 0; v < n; ++v) {
      if (gone[v]) continue;
      if (best < 0 || adj[v].size() < adj[best].size()) best = v;
    }
    gone[best] = 1;
    order.push_back(best);
    std::vector<Index> nbrs(adj[best].begin(), adj[best].end());
    for (Index u : nbrs) {
      adj[u].erase(best);
      for (Index w : nbrs)
        if (w != u) adj[u].insert(w);
    }
    adj[best].clear();
  }
  return EliminationOrdering(std::move(order));
}

ChordalExtension chordal_extension(const SymPattern& E) {
  ChordalExtension ext;
  ext.ordering = min_degree_order(E);
  ext.pattern = symbolic_fill(E, ext.ordering);
  ext.fill = ext.pattern.nnz() - E.nnz();
  return ext;
}

CliqueSet::CliqueSet(Index n, std::vector<std::vector<Index>> blocks) : n_(n), blocks_(std::move(blocks)) {
  if (blocks_.empty()) throw std::invalid_argument("CliqueSet: at least one block required");
  offsets_.assign(1, 0);
  for (auto& b : blocks_) {
    if (b.empty()) throw std::invalid_argument("CliqueSet: empty block");
    std::ranges::sort(b);
    if (std::adjacent_find(b.begin(), b.end()) != b.end())
      throw std::invalid_argument("CliqueSet: repeated vertex in block");
    if (b.front() < 0 || b.back() >= n_) throw std::out_of_range("CliqueSet: vertex out of range");
    offsets_.push_back(offsets_.back() + dense_tril_size(static_cast<Index>(b.size())));
  }
}

TrilIndexMap CliqueSet::local_map(Index k) const { return TrilIndexMap(SymPattern::full(block_size(k))); }

SymPattern CliqueSet::covered_pattern() const {
  std::vector<IndexPair> pairs;
  for (const auto& b : blocks_)
    for (std::size_t q = 0; q < b.size(); ++q)
      for (std::size_t r = q + 1; r < b.size(); ++r) pairs.emplace_back(b[r], b[q]);
  return SymPattern(n_, pairs);
}

Index CliqueSet::max_block() const {
  Index m = 0;
  for (const auto& b : blocks_) m = std::max<Index>(m, static_cast<Index>(b.size()));
  return m;
}

Index CliqueSet::min_block() const {
  Index m = n_ + 1;
  for (const auto& b : blocks_) m = std::min<Index>(m, static_cast<Index>(b.size()));
  return m;
}

double CliqueSet::mean_block() const {
  double s = 0.0;
  for (const auto& b : blocks_) s += static_cast<double>(b.size());
  return s / static_cast<double>(blocks_.size());
}

namespace {

// Drops blocks contained in another block; survivors in lexicographic order.
std::vector<std::vector<Index>> keep_maximal(Index n, std::vector<std::vector<Index>> cands) {
  std::ranges::sort(cands, [](const auto& a, const auto& b) {
    return a.size() != b.size() ? a.size() > b.size() : a < b;
  });
  std::vector<std::vector<Index>> accepted;
  std::vector<std::vector<Index>> by_vertex(static_cast<std::size_t>(n));
  for (auto& c : cands) {
    bool contained = false;
    for (Index id : by_vertex[c.front()]) {
      if (std::ranges::includes(accepted[id], c)) {
        contained = true;
        break;
      }
    }
    if (contained) continue;
    Index id = static_cast<Index>(accepted.size());
    for (Index v : c) by_vertex[v].push_back(id);
    accepted.push_back(std::move(c));
  }
  std::ranges::sort(accepted);
  return accepted;
}

struct DisjointSets {
  std::vector<Index> parent;
  explicit DisjointSets(Index n) : parent(static_cast<std::size_t>(n)) {
    std::iota(parent.begin(), parent.end(), Index{0});
  }
  Index find(Index a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
};

}  // namespace

CliqueSet maximal_cliques(const SymPattern& C, const EliminationOrdering& ord) {
  const Index n = C.size();
  auto higher = filled_higher_positions(C, ord);
  Index filled = 0;
  for (const auto& h : higher) filled += static_cast<Index>(h.size());
  if (filled + n != C.nnz()) {
    throw std::invalid_argument("maximal_cliques: ordering is not a perfect elimination ordering "
                                "(pattern is not chordal or ordering is wrong)");
  }
  std::vector<std::vector<Index>> cands;
  cands.reserve(static_cast<std::size_t>(n));
  for (Index k = 0; k < n; ++k) {
    std::vector<Index> c{ord.order[k]};
    for (Index q : higher[k]) c.push_back(ord.order[q]);
    std::ranges::sort(c);
    cands.push_back(std::move(c));
  }
  return CliqueSet(n, keep_maximal(n, std::move(cands)));
}

CliqueTree clique_tree(const CliqueSet& cs) {
  const Index p = cs.size();
  std::vector<std::vector<Index>> by_vertex(static_cast<std::size_t>(cs.dim()));
  for (Index k = 0; k < p; ++k)
    for (Index v : cs.clique(k)) by_vertex[v].push_back(k);

  // (weight, a, b) for every intersecting pair a < b
  std::vector<std::tuple<Index, Index, Index>> edges;
  std::vector<Index> overlap(static_cast<std::size_t>(p), 0);
  std::vector<Index> touched;
  for (Index a = 0; a < p; ++a) {
    touched.clear();
    for (Index v : cs.clique(a)) {
      for (Index b : by_vertex[v]) {
        if (b <= a) continue;
        if (overlap[b]++ == 0) touched.push_back(b);
      }
    }
    for (Index b : touched) {
      edges.emplace_back(overlap[b], a, b);
      overlap[b] = 0;
    }
  }
  std::ranges::sort(edges, [](const auto& x, const auto& y) {
    if (std::get<0>(x) != std::get<0>(y)) return std::get<0>(x) > std::get<0>(y);
    return std::tie(std::get<1>(x), std::get<2>(x)) < std::tie(std::get<1>(y), std::get<2>(y));
  });

  DisjointSets dsu(p);
  std::vector<std::vector<Index>> nbrs(static_cast<std::size_t>(p));
  for (auto [w, a, b] : edges) {
    Index ra = dsu.find(a), rb = dsu.find(b);
    if (ra == rb) continue;
    dsu.parent[ra] = rb;
    nbrs[a].push_back(b);
    nbrs[b].push_back(a);
  }
  // disconnected patterns: hang every other component off block 0 with an empty separator
  for (Index k = 1; k < p; ++k) {
    if (dsu.find(k) == dsu.find(0)) continue;
    dsu.parent[dsu.find(k)] = dsu.find(0);
    nbrs[0].push_back(k);
    nbrs[k].push_back(0);
  }
  for (auto& nb : nbrs) std::ranges::sort(nb);

  CliqueTree tree;
  tree.parent.assign(static_cast<std::size_t>(p), -1);
  std::vector<char> seen(static_cast<std::size_t>(p), 0);
  for (Index root = 0; root < p; ++root) {
    if (seen[root]) continue;
    seen[root] = 1;
    std::deque<Index> queue{root};
    while (!queue.empty()) {
      Index k = queue.front();
      queue.pop_front();
      tree.bfs.push_back(k);
      for (Index c : nbrs[k]) {
        if (seen[c]) continue;
        seen[c] = 1;
        tree.parent[c] = k;
        queue.push_back(c);
      }
    }
  }
  return tree;
}

CliqueSet merge_cliques(const CliqueSet& cs, Index threshold) {
  if (threshold < 1) throw std::invalid_argument("merge_cliques: threshold must be >= 1");
  const Index p = cs.size();
  const CliqueTree tree = clique_tree(cs);
  std::vector<std::vector<Index>> blocks = cs.cliques();
  std::vector<char> alive(static_cast<std::size_t>(p), 1);
  bool merged_any = false;

  // children before parents; a parent is never merged away before all of its
  // children have been visited, so parent[] always names a live block
  for (auto it = tree.bfs.rbegin(); it != tree.bfs.rend(); ++it) {
    Index child = *it;
    Index parent = tree.parent[child];
    if (parent < 0) continue;
    std::vector<Index> uni;
    std::ranges::set_union(blocks[child], blocks[parent], std::back_inserter(uni));
    if (static_cast<Index>(uni.size()) > threshold) continue;
    blocks[parent] = std::move(uni);
    blocks[child].clear();
    alive[child] = 0;
    merged_any = true;
  }
  if (!merged_any) return cs;

  std::vector<std::vector<Index>> survivors;
  for (Index k = 0; k < p; ++k)
    if (alive[k]) survivors.push_back(std::move(blocks[k]));
  return CliqueSet(cs.dim(), keep_maximal(cs.dim(), std::move(survivors)));
}

}  // namespace coarsen

namespace coarsen {

std::vector<Eigen::MatrixXd> clique_decomposition(const CliqueSet& cs, const Eigen::Ref<const Eigen::MatrixXd>& X) {
  const Index n = cs.dim();
  if (X.rows() != n || X.cols() != n) throw std::invalid_argument("clique_decomposition: dimension mismatch");
  const SymPattern C = cs.covered_pattern();
  const EliminationOrdering ord = mcs_order(C);
  if (!is_perfect_elimination(C, ord)) throw std::invalid_argument("clique_decomposition: blocks do not cover a chordal pattern");

  std::vector<std::vector<Index>> owners(static_cast<std::size_t>(n));
  for (Index k = 0; k < cs.size(); ++k) {
    for (Index v : cs.clique(k)) owners[v].push_back(k);
  }

  // Working copy of X on C, updated in place by the elimination.
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (const auto& [i, j] : C.entries()) A(i, j) = A(j, i) = X(i, j);
  const double floor = 1e-14 * (n > 0 ? X.diagonal().cwiseAbs().maxCoeff() : 0.0);

  std::vector<Eigen::MatrixXd> Z;
  for (Index k = 0; k < cs.size(); ++k) Z.push_back(Eigen::MatrixXd::Zero(cs.block_size(k), cs.block_size(k)));

  const auto adj = C.adjacency();
  for (Index p = 0; p < n; ++p) {
    const Index v = ord.order[p];
    const double pivot = A(v, v);
    if (pivot <= floor) continue;
    std::vector<Index> later;
    for (Index w : adj[v]) {
      if (ord.position[w] > p) later.push_back(w);
    }
    std::vector<Index> support = later;
    support.insert(std::ranges::lower_bound(support, v), v);

    Index owner = -1;
    for (Index k : owners[v]) {
      const auto c = cs.clique(k);
      if (std::includes(c.begin(), c.end(), support.begin(), support.end())) {
        owner = k;
        break;
      }
    }
    if (owner < 0) throw std::logic_error("clique_decomposition: elimination clique not covered by a block");

    const auto c = cs.clique(owner);
    std::vector<Index> local(support.size());
    for (std::size_t a = 0; a < support.size(); ++a) local[a] = std::ranges::lower_bound(c, support[a]) - c.begin();
    for (std::size_t a = 0; a < support.size(); ++a) {
      for (std::size_t b = 0; b < support.size(); ++b) {
        Z[owner](local[a], local[b]) += A(support[a], v) * A(support[b], v) / pivot;
      }
    }
    for (Index q : later) {
      for (Index r : later) A(q, r) -= A(q, v) * A(r, v) / pivot;
    }
  }
  return Z;
}

}  // namespace coarsen
