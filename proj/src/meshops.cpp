#include "coarsen/meshops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>
#include <tuple>

namespace coarsen {

SymPattern mesh_pattern(const TriMesh& mesh) {
  std::vector<IndexPair> edges;
  edges.reserve(static_cast<std::size_t>(3 * mesh.num_faces()));
  for (Index f = 0; f < mesh.num_faces(); ++f) {
    for (int c = 0; c < 3; ++c) {
      edges.emplace_back(mesh.faces(f, c), mesh.faces(f, (c + 1) % 3));
    }
  }
  return SymPattern(mesh.num_vertices(), edges);
}

SymSparse cotan_laplacian(const TriMesh& mesh) {
  const Index n = mesh.num_vertices();
  SymPattern pattern = mesh_pattern(mesh);
  TrilIndexMap map(pattern);
  Eigen::VectorXd values = Eigen::VectorXd::Zero(map.size());

  for (Index f = 0; f < mesh.num_faces(); ++f) {
    for (int c = 0; c < 3; ++c) {
      const Index corner = mesh.faces(f, c);
      const Index a = mesh.faces(f, (c + 1) % 3);
      const Index b = mesh.faces(f, (c + 2) % 3);
      const Eigen::Vector3d e1 = mesh.vertices.row(a) - mesh.vertices.row(corner);
      const Eigen::Vector3d e2 = mesh.vertices.row(b) - mesh.vertices.row(corner);
      const double twice_area = e1.cross(e2).norm();
      if (!(twice_area > 0.0)) {
        throw std::invalid_argument("cotan_laplacian: degenerate face " + std::to_string(f));
      }
      values[map.index(a, b)] -= 0.5 * e1.dot(e2) / twice_area;
    }
  }

  // diagonal from the off-diagonal row sums so that L * 1 = 0 by construction
  Eigen::VectorXd row_sum = Eigen::VectorXd::Zero(n);
  for (Index a = 0; a < map.size(); ++a) {
    if (map.is_diagonal(a)) continue;
    row_sum[map.row(a)] += values[a];
    row_sum[map.col(a)] += values[a];
  }
  for (Index i = 0; i < n; ++i) values[map.index(i, i)] = -row_sum[i];
  return SymSparse(std::move(pattern), std::move(values));
}

Eigen::VectorXd lumped_mass(const TriMesh& mesh) {
  Eigen::VectorXd mass = Eigen::VectorXd::Zero(mesh.num_vertices());
  for (Index f = 0; f < mesh.num_faces(); ++f) {
    const Eigen::Vector3d p0 = mesh.vertices.row(mesh.faces(f, 0));
    const Eigen::Vector3d p1 = mesh.vertices.row(mesh.faces(f, 1));
    const Eigen::Vector3d p2 = mesh.vertices.row(mesh.faces(f, 2));
    const double third = 0.5 * (p1 - p0).cross(p2 - p0).norm() / 3.0;
    for (int c = 0; c < 3; ++c) mass[mesh.faces(f, c)] += third;
  }
  for (Index i = 0; i < mass.size(); ++i) {
    if (!(mass[i] > 0.0)) {
      throw std::invalid_argument("lumped_mass: vertex " + std::to_string(i) +
                                  " has no incident face");
    }
  }
  return mass;
}

std::pair<TriMesh, double> normalize_mesh(const TriMesh& mesh) {
  double area = 0.0;
  for (Index f = 0; f < mesh.num_faces(); ++f) {
    const Eigen::Vector3d p0 = mesh.vertices.row(mesh.faces(f, 0));
    const Eigen::Vector3d p1 = mesh.vertices.row(mesh.faces(f, 1));
    const Eigen::Vector3d p2 = mesh.vertices.row(mesh.faces(f, 2));
    area += 0.5 * (p1 - p0).cross(p2 - p0).norm();
  }
  if (!(area > 0.0)) throw std::invalid_argument("normalize_mesh: mesh has zero area");
  const double scale = std::sqrt(static_cast<double>(mesh.num_vertices()) / area);
  TriMesh out = mesh;
  out.vertices *= scale;
  return {std::move(out), scale};
}

void WeightedGraph::add_edge(Index a, Index b, double w) {
  adjacency[a].emplace_back(b, w);
  adjacency[b].emplace_back(a, w);
}

WeightedGraph edge_graph(const TriMesh& mesh) {
  WeightedGraph g;
  g.adjacency.resize(static_cast<std::size_t>(mesh.num_vertices()));
  for (auto [i, j] : mesh_pattern(mesh).entries()) {
    if (i == j) continue;
    g.add_edge(i, j, (mesh.vertices.row(i) - mesh.vertices.row(j)).norm());
  }
  for (auto& nb : g.adjacency) std::ranges::sort(nb);
  return g;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Lowers dist[] with distances from `source`, touching only improved vertices.
void relax_from(const WeightedGraph& g, Index source, std::vector<double>& dist) {
  using Item = std::pair<double, Index>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[source] = 0.0;
  heap.emplace(0.0, source);
  while (!heap.empty()) {
    auto [d, v] = heap.top();
    heap.pop();
    if (d > dist[v]) continue;
    for (auto [w, len] : g.adjacency[v]) {
      double nd = d + len;
      if (nd < dist[w]) {
        dist[w] = nd;
        heap.emplace(nd, w);
      }
    }
  }
}

}  // namespace

std::vector<Index> farthest_point_sample(const WeightedGraph& graph, Index count, Index seed) {
  const Index n = graph.size();
  if (count < 1 || count > n) {
    throw std::invalid_argument("farthest_point_sample: count " + std::to_string(count) +
                                " outside 1.." + std::to_string(n));
  }
  if (seed < 0 || seed >= n) throw std::out_of_range("farthest_point_sample: seed out of range");
  std::vector<double> dist(static_cast<std::size_t>(n), kInf);
  std::vector<Index> samples{seed};
  relax_from(graph, seed, dist);
  while (static_cast<Index>(samples.size()) < count) {
    Index best = 0;
    for (Index v = 1; v < n; ++v)
      if (dist[v] > dist[best]) best = v;
    samples.push_back(best);
    relax_from(graph, best, dist);
  }
  if (std::ranges::any_of(dist, [](double d) { return d == kInf; })) {
    throw std::invalid_argument("farthest_point_sample: " + std::to_string(count) +
                                " samples cannot cover every connected component");
  }
  return samples;
}

std::vector<Index> farthest_point_sample(const TriMesh& mesh, Index count, Index seed) {
  return farthest_point_sample(edge_graph(mesh), count, seed);
}

std::vector<Index> cluster_assign(const WeightedGraph& graph, std::span<const Index> samples) {
  if (samples.empty()) throw std::invalid_argument("cluster_assign: no samples");
  const Index n = graph.size();
  std::vector<double> dist(static_cast<std::size_t>(n), kInf);
  std::vector<Index> label(static_cast<std::size_t>(n), -1);
  using Item = std::tuple<double, Index, Index>;  // distance, label, vertex
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    Index s = samples[k];
    if (s < 0 || s >= n) throw std::out_of_range("cluster_assign: sample out of range");
    if (dist[s] == 0.0) continue;  // repeated sample keeps the smaller position
    dist[s] = 0.0;
    label[s] = static_cast<Index>(k);
    heap.emplace(0.0, label[s], s);
  }
  while (!heap.empty()) {
    auto [d, lab, v] = heap.top();
    heap.pop();
    if (d > dist[v] || lab != label[v]) continue;
    for (auto [w, len] : graph.adjacency[v]) {
      double nd = d + len;
      if (nd < dist[w] || (nd == dist[w] && lab < label[w])) {
        dist[w] = nd;
        label[w] = lab;
        heap.emplace(nd, lab, w);
      }
    }
  }
  for (Index v = 0; v < n; ++v) {
    if (label[v] < 0) {
      throw std::invalid_argument("cluster_assign: vertex " + std::to_string(v) +
                                  " unreachable from every sample");
    }
  }
  return label;
}

Eigen::VectorXd coarse_mass(std::span<const Index> assignment, const Eigen::VectorXd& fine_mass,
                            Index count) {
  if (static_cast<Index>(assignment.size()) != fine_mass.size()) {
    throw std::invalid_argument("coarse_mass: assignment/mass length mismatch");
  }
  Eigen::VectorXd mc = Eigen::VectorXd::Zero(count);
  for (std::size_t v = 0; v < assignment.size(); ++v) {
    if (assignment[v] < 0 || assignment[v] >= count)
      throw std::out_of_range("coarse_mass: assignment out of range");
    mc[assignment[v]] += fine_mass[static_cast<Index>(v)];
  }
  return mc;
}

SymPattern coarse_pattern(std::span<const Index> assignment, const SymPattern& fine, Index count,
                          int rings) {
  if (static_cast<Index>(assignment.size()) != fine.size()) {
    throw std::invalid_argument("coarse_pattern: assignment length mismatch");
  }
  std::vector<IndexPair> pairs;
  for (auto [i, j] : fine.entries()) {
    Index a = assignment[i], b = assignment[j];
    if (a != b) pairs.emplace_back(a, b);
  }
  SymPattern adjacency(count, pairs);
  return rings == 1 ? adjacency : pattern_power(adjacency, rings);
}

Eigen::SparseMatrix<double, Eigen::RowMajor> restriction(std::span<const Index> samples, Index fine_count) {
  Eigen::SparseMatrix<double, Eigen::RowMajor> R(static_cast<Index>(samples.size()), fine_count);
  std::vector<Eigen::Triplet<double>> trips;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    if (samples[k] < 0 || samples[k] >= fine_count) throw std::out_of_range("restriction: sample out of range");
    trips.emplace_back(static_cast<Index>(k), samples[k], 1.0);
  }
  R.setFromTriplets(trips.begin(), trips.end());
  return R;
}

CoarseningSetup make_coarsening_setup(const TriMesh& mesh, const Eigen::VectorXd& fine_mass,
                                      Index count, int rings, Index seed) {
  if (rings < 1) throw std::invalid_argument("make_coarsening_setup: rings must be >= 1");
  const WeightedGraph graph = edge_graph(mesh);
  CoarseningSetup s;
  s.samples = farthest_point_sample(graph, count, seed);
  std::ranges::sort(s.samples);
  s.assignment = cluster_assign(graph, s.samples);
  s.coarse_mass = coarse_mass(s.assignment, fine_mass, count);
  s.pattern = coarse_pattern(s.assignment, mesh_pattern(mesh), count, rings);
  s.null_vector = Eigen::VectorXd::Ones(count);
  s.null_image = Eigen::VectorXd::Zero(count);
  return s;
}

CoarseningSetup identity_setup(const SymSparse& L, const Eigen::VectorXd& fine_mass) {
  const Index n = L.size();
  CoarseningSetup s;
  s.samples.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) s.samples[i] = i;
  s.assignment = s.samples;
  s.coarse_mass = fine_mass;
  s.pattern = L.pattern;
  s.null_vector = Eigen::VectorXd::Ones(n);
  s.null_image = Eigen::VectorXd::Zero(n);
  return s;
}

}  // namespace coarsen
