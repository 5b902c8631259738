#pragma once

#include <filesystem>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "coarsen/sparsemat.hpp"

namespace coarsen {

struct TriMesh {
  Eigen::MatrixX3d vertices;
  Eigen::MatrixX3i faces;

  Index num_vertices() const { return vertices.rows(); }
  Index num_faces() const { return faces.rows(); }
};

struct ObjLoad {
  TriMesh mesh;
  Index dropped_faces = 0;  // degenerate faces removed at load time
};

// Wavefront OBJ: v and f records only, polygons fan-triangulated, faces with
// area < 1e-14 * bbox_diagonal^2 dropped.
ObjLoad load_obj(const std::filesystem::path& path);
void write_obj(const std::filesystem::path& path, const TriMesh& mesh);

// Vertex adjacency pattern (mesh edges plus diagonal).
SymPattern mesh_pattern(const TriMesh& mesh);

// Positive semi-definite cotangent Laplacian, assembled face by face:
// L_ij = -1/2 (cot a_ij + cot b_ij), L_ii = -sum_j L_ij.
SymSparse cotan_laplacian(const TriMesh& mesh);

// Barycentric lumped mass, one third of each incident face area per vertex.
// Throws for vertices with no incident face.
Eigen::VectorXd lumped_mass(const TriMesh& mesh);

// Uniform scale about the origin so that the total lumped mass equals the
// vertex count. Returns the scaled mesh and the factor applied.
std::pair<TriMesh, double> normalize_mesh(const TriMesh& mesh);

// Edge graph with Euclidean edge lengths as weights.
struct WeightedGraph {
  std::vector<std::vector<std::pair<Index, double>>> adjacency;

  Index size() const { return static_cast<Index>(adjacency.size()); }
  void add_edge(Index a, Index b, double w);
};

WeightedGraph edge_graph(const TriMesh& mesh);

// Greedy farthest-point sampling under graph-geodesic distance. Samples are
// returned in selection order, the first being `seed`. Ties go to the
// smallest vertex index.
std::vector<Index> farthest_point_sample(const WeightedGraph& graph, Index count, Index seed);
std::vector<Index> farthest_point_sample(const TriMesh& mesh, Index count, Index seed);

// Nearest-sample assignment by graph-geodesic distance; entry v is the
// position in `samples` of the sample owning vertex v. Ties go to the smaller
// position.
std::vector<Index> cluster_assign(const WeightedGraph& graph, std::span<const Index> samples);

// Cluster mass aggregation: coarse_mass[k] = sum of fine masses assigned to k.
Eigen::VectorXd coarse_mass(std::span<const Index> assignment, const Eigen::VectorXd& fine_mass,
                            Index count);

// Coarse pattern: samples adjacent iff their clusters hold fine-adjacent
// vertices, then widened to `rings` rings.
SymPattern coarse_pattern(std::span<const Index> assignment, const SymPattern& fine, Index count,
                          int rings);

// Row-selection restriction R with R(k, samples[k]) = 1.
Eigen::SparseMatrix<double, Eigen::RowMajor> restriction(std::span<const Index> samples, Index fine_count);

struct CoarseningSetup {
  std::vector<Index> samples;     // ascending fine indices
  std::vector<Index> assignment;  // fine vertex -> sample position
  Eigen::VectorXd coarse_mass;
  SymPattern pattern;             // E on the coarse vertices
  Eigen::VectorXd null_vector;    // v
  Eigen::VectorXd null_image;     // e

  Index coarse_count() const { return static_cast<Index>(samples.size()); }
};

// Samples, clusters, coarse mass and coarse pattern for a normalized mesh.
CoarseningSetup make_coarsening_setup(const TriMesh& mesh, const Eigen::VectorXd& fine_mass,
                                      Index count, int rings, Index seed);

// The identity coarsening: every vertex kept, E = pattern of L, M~ = M.
CoarseningSetup identity_setup(const SymSparse& L, const Eigen::VectorXd& fine_mass);

// Test and demo meshes.
TriMesh icosphere(int subdivisions);
TriMesh grid_mesh(Index nx, Index ny, double jitter, unsigned seed);
TriMesh regular_tetrahedron();

}  // namespace coarsen
