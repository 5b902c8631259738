#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "coarsen/eig.hpp"
#include "coarsen/meshops.hpp"
#include "oracles/oracles.hpp"

using namespace coarsen;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "coarsen_test_meshops";
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::filesystem::path write_text(const std::string& name, const std::string& s) {
  const auto p = scratch(name);
  std::ofstream(p) << s;
  return p;
}

TriMesh equilateral() {
  TriMesh m;
  m.vertices.resize(3, 3);
  m.vertices << 0, 0, 0, 1, 0, 0, 0.5, std::sqrt(3.0) / 2, 0;
  m.faces.resize(1, 3);
  m.faces << 0, 1, 2;
  return m;
}

TriMesh rhombus() {
  TriMesh m;
  m.vertices.resize(4, 3);
  m.vertices << 0, 0, 0, 1, 0, 0, 0.5, std::sqrt(3.0) / 2, 0, 1.5, std::sqrt(3.0) / 2, 0;
  m.faces.resize(2, 3);
  m.faces << 0, 1, 2, 1, 3, 2;
  return m;
}

WeightedGraph unit_path(Index n) {
  WeightedGraph g;
  g.adjacency.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i + 1 < n; ++i) g.add_edge(i, i + 1, 1.0);
  return g;
}

double surface_area(const TriMesh& m) {
  double a = 0.0;
  for (Index f = 0; f < m.num_faces(); ++f) {
    const Eigen::Vector3d p0 = m.vertices.row(m.faces(f, 0));
    const Eigen::Vector3d p1 = m.vertices.row(m.faces(f, 1));
    const Eigen::Vector3d p2 = m.vertices.row(m.faces(f, 2));
    a += 0.5 * (p1 - p0).cross(p2 - p0).norm();
  }
  return a;
}

}  // namespace

TEST_CASE("load_obj") {
  const auto tri = load_obj(write_text("tri.obj", "# one\nv 0 0 0\nv 1 0 0\nv 0 1 0\nvn 0 0 1\nf 1 2 3\n"));
  CHECK(tri.mesh.num_vertices() == 3);
  CHECK(tri.mesh.num_faces() == 1);
  CHECK(tri.dropped_faces == 0);

  const auto quad = load_obj(write_text("quad.obj", "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1/1/1 2/2/2 3/3/3 4/4/4\n"));
  REQUIRE(quad.mesh.num_faces() == 2);
  CHECK(quad.mesh.faces.row(0) == Eigen::RowVector3i(0, 1, 2));
  CHECK(quad.mesh.faces.row(1) == Eigen::RowVector3i(0, 2, 3));

  CHECK_THROWS(load_obj(write_text("zero.obj", "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 0 1 2\n")));
  CHECK_THROWS(load_obj(write_text("range.obj", "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 4\n")));
  CHECK_THROWS(load_obj(write_text("junk.obj", "v 0 0 x\n")));
  CHECK_THROWS(load_obj(scratch("missing.obj")));

  const auto degenerate =
      load_obj(write_text("degenerate.obj", "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 2 0 0\nf 1 2 3\nf 1 2 4\n"));
  CHECK(degenerate.mesh.num_faces() == 1);
  CHECK(degenerate.dropped_faces == 1);

  const TriMesh ico = icosphere(1);
  write_obj(scratch("ico.obj"), ico);
  const auto back = load_obj(scratch("ico.obj"));
  CHECK(back.mesh.faces == ico.faces);
  CHECK((back.mesh.vertices - ico.vertices).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("cotan_laplacian on an equilateral triangle") {
  const Eigen::MatrixXd L = cotan_laplacian(equilateral()).to_dense();
  const double off = -1.0 / (2.0 * std::sqrt(3.0));
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < 3; ++j) CHECK(L(i, j) == doctest::Approx(i == j ? 0.577350269 : off).epsilon(1e-9));
  CHECK(off == doctest::Approx(-0.288675).epsilon(1e-6));
}

TEST_CASE("cotan_laplacian is PSD with constant null space") {
  const std::vector<TriMesh> meshes = {regular_tetrahedron(), icosphere(1), icosphere(2), grid_mesh(6, 5, 0.3, 3),
                                       grid_mesh(8, 8, 0.45, 11), rhombus()};
  for (const auto& mesh : meshes) {
    const Eigen::MatrixXd L = cotan_laplacian(mesh).to_dense();
    CHECK((L - L.transpose()).cwiseAbs().maxCoeff() == 0.0);
    const double norm = L.norm();
    CHECK((L * Eigen::VectorXd::Ones(L.rows())).cwiseAbs().maxCoeff() <= 1e-12 * norm);
    const auto lambda = sym_eig_dense(L).values;
    CHECK(lambda[0] >= -1e-9 * lambda[lambda.size() - 1]);
  }

  const auto tet = sym_eig_dense(cotan_laplacian(regular_tetrahedron()).to_dense()).values;
  CHECK(std::abs(tet[0]) <= 1e-12 * tet[3]);
  for (Index i = 1; i < 4; ++i) CHECK(tet[i] > 1e-6);

  const SymSparse L = cotan_laplacian(icosphere(2));
  const auto path = scratch("L.mtx");
  mm_write(path, L);
  const Eigen::MatrixXd back = mm_read(path).to_dense();
  CHECK((back * Eigen::VectorXd::Ones(back.rows())).cwiseAbs().maxCoeff() <= 1e-12 * back.norm());
}

TEST_CASE("cotan_laplacian rejects degenerate faces") {
  TriMesh m = equilateral();
  m.vertices.row(2) = Eigen::RowVector3d(2, 0, 0);
  CHECK_THROWS_AS(cotan_laplacian(m), std::invalid_argument);
}

TEST_CASE("lumped_mass") {
  const Eigen::VectorXd m1 = lumped_mass(equilateral());
  for (Index i = 0; i < 3; ++i) CHECK(m1[i] == doctest::Approx(std::sqrt(3.0) / 12.0).epsilon(1e-12));
  CHECK(m1[0] == doctest::Approx(0.144338).epsilon(1e-5));

  const Eigen::VectorXd m2 = lumped_mass(rhombus());
  CHECK(m2[1] == doctest::Approx(0.288675).epsilon(1e-5));
  CHECK(m2[2] == doctest::Approx(0.288675).epsilon(1e-5));
  CHECK(m2[0] == doctest::Approx(0.144338).epsilon(1e-5));

  const TriMesh g = grid_mesh(7, 4, 0.3, 2);
  CHECK(lumped_mass(g).sum() == doctest::Approx(surface_area(g)).epsilon(1e-12));

  TriMesh isolated = equilateral();
  isolated.vertices.conservativeResize(4, 3);
  isolated.vertices.row(3) = Eigen::RowVector3d(5, 5, 5);
  CHECK_THROWS_AS(lumped_mass(isolated), std::invalid_argument);
}

TEST_CASE("normalize_mesh") {
  const auto [tri, s] = normalize_mesh(equilateral());
  CHECK(s == doctest::Approx(std::sqrt(3.0 / (std::sqrt(3.0) / 4.0))).epsilon(1e-12));
  CHECK(lumped_mass(tri).sum() == doctest::Approx(3.0).epsilon(1e-12));

  const auto [again, s2] = normalize_mesh(tri);
  CHECK(s2 == doctest::Approx(1.0).epsilon(1e-12));

  const TriMesh g = grid_mesh(5, 6, 0.2, 9);
  TriMesh doubled = g;
  doubled.vertices *= 2.0;
  CHECK((normalize_mesh(doubled).first.vertices - normalize_mesh(g).first.vertices).cwiseAbs().maxCoeff() <= 1e-12);

  TriMesh flat = equilateral();
  flat.vertices.setZero();
  CHECK_THROWS_AS(normalize_mesh(flat), std::invalid_argument);
}

TEST_CASE("farthest_point_sample") {
  const TriMesh g = grid_mesh(4, 4, 0.0, 0);
  auto all = farthest_point_sample(g, g.num_vertices(), 3);
  std::ranges::sort(all);
  for (Index i = 0; i < g.num_vertices(); ++i) CHECK(all[i] == i);
  CHECK(farthest_point_sample(g, 1, 7) == std::vector<Index>{7});
  CHECK(farthest_point_sample(unit_path(5), 2, 0) == std::vector<Index>{0, 4});
  CHECK(farthest_point_sample(g, 5, 2) == farthest_point_sample(g, 5, 2));
  CHECK(farthest_point_sample(g, 5, 2).front() == 2);
  CHECK_THROWS_AS(farthest_point_sample(g, 0, 0), std::invalid_argument);
  CHECK_THROWS_AS(farthest_point_sample(g, g.num_vertices() + 1, 0), std::invalid_argument);

  WeightedGraph split = unit_path(4);
  split.adjacency.resize(6);
  split.add_edge(4, 5, 1.0);
  CHECK_THROWS_AS(farthest_point_sample(split, 1, 0), std::invalid_argument);
  CHECK(farthest_point_sample(split, 2, 0).size() == 2);
}

TEST_CASE("cluster_assign") {
  const std::vector<Index> ends = {0, 2};
  CHECK(cluster_assign(unit_path(3), ends) == std::vector<Index>{0, 0, 1});

  const TriMesh g = grid_mesh(5, 5, 0.2, 4);
  const WeightedGraph graph = edge_graph(g);
  const auto samples = farthest_point_sample(graph, 6, 0);
  const auto a = cluster_assign(graph, samples);
  for (std::size_t k = 0; k < samples.size(); ++k) CHECK(a[samples[k]] == static_cast<Index>(k));

  std::vector<Index> every(static_cast<std::size_t>(g.num_vertices()));
  std::iota(every.begin(), every.end(), Index{0});
  CHECK(cluster_assign(graph, every) == every);
  CHECK_THROWS(cluster_assign(graph, std::vector<Index>{}));
}

TEST_CASE("coarse_mass conserves mass") {
  const Eigen::Vector3d mass(1.0, 2.0, 4.0);
  CHECK(coarse_mass(std::vector<Index>{0, 1, 2}, mass, 3) == Eigen::VectorXd(mass));
  CHECK(coarse_mass(std::vector<Index>{0, 0, 0}, mass, 1)[0] == 7.0);

  std::mt19937 rng(6);
  std::uniform_real_distribution<double> ud(0.1, 3.0);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd fine(50);
    for (Index i = 0; i < 50; ++i) fine[i] = ud(rng);
    std::vector<Index> assignment(50);
    for (auto& x : assignment) x = static_cast<Index>(rng() % 7);
    CHECK(std::abs(coarse_mass(assignment, fine, 7).sum() - fine.sum()) <= 1e-12 * fine.sum());
  }
}

TEST_CASE("coarse_pattern") {
  const TriMesh g = grid_mesh(5, 4, 0.1, 1);
  const SymPattern fine = mesh_pattern(g);
  std::vector<Index> id(static_cast<std::size_t>(g.num_vertices()));
  std::iota(id.begin(), id.end(), Index{0});
  CHECK(coarse_pattern(id, fine, g.num_vertices(), 1) == fine);

  std::vector<Index> halves(id.size());
  for (std::size_t v = 0; v < id.size(); ++v) halves[v] = g.vertices(static_cast<Index>(v), 0) < 0.5 ? 0 : 1;
  CHECK(coarse_pattern(halves, fine, 2, 1) == SymPattern::full(2));

  std::vector<Index> strips(id.size());
  for (std::size_t v = 0; v < id.size(); ++v) strips[v] = static_cast<Index>(v) % 5;
  const SymPattern r1 = coarse_pattern(strips, fine, 5, 1);
  CHECK(coarse_pattern(strips, fine, 5, 2) == oracle::distance_power(r1, 2));

  const TriMesh ico = icosphere(2);
  const Eigen::VectorXd mass = lumped_mass(ico);
  const auto setup = make_coarsening_setup(ico, mass, 30, 1, 0);
  SymPattern prev = setup.pattern;
  for (int r = 2; r <= 3; ++r) {
    const SymPattern next = coarse_pattern(setup.assignment, mesh_pattern(ico), 30, r);
    CHECK(prev.is_subset_of(next));
    prev = next;
  }
}

TEST_CASE("restriction") {
  const auto R = restriction(std::vector<Index>{2}, 3);
  CHECK(R.rows() == 1);
  CHECK(Eigen::MatrixXd(R) == Eigen::MatrixXd(Eigen::RowVector3d(0, 0, 1)));

  const auto I = restriction(std::vector<Index>{0, 1, 2, 3}, 4);
  CHECK(Eigen::MatrixXd(I) == Eigen::MatrixXd::Identity(4, 4));

  const auto S = restriction(std::vector<Index>{1, 4, 6}, 9);
  CHECK(S * Eigen::VectorXd::Ones(9) == Eigen::VectorXd::Ones(3));
  CHECK_THROWS_AS(restriction(std::vector<Index>{9}, 9), std::out_of_range);
}

TEST_CASE("make_coarsening_setup invariants") {
  const auto [mesh, scale] = normalize_mesh(icosphere(2));
  const Eigen::VectorXd mass = lumped_mass(mesh);
  const auto s = make_coarsening_setup(mesh, mass, 40, 2, 5);
  CHECK(s.coarse_count() == 40);
  CHECK(std::ranges::is_sorted(s.samples));
  CHECK(std::adjacent_find(s.samples.begin(), s.samples.end()) == s.samples.end());
  CHECK(static_cast<Index>(s.assignment.size()) == mesh.num_vertices());
  CHECK(s.coarse_mass.minCoeff() > 0.0);
  CHECK(std::abs(s.coarse_mass.sum() - mass.sum()) <= 1e-12 * mass.sum());
  CHECK(s.null_vector == Eigen::VectorXd::Ones(40));
  CHECK(s.null_image == Eigen::VectorXd::Zero(40));
  CHECK_THROWS_AS(make_coarsening_setup(mesh, mass, 40, 0, 5), std::invalid_argument);
}
