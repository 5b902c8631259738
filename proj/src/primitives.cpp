#include <cmath>
#include <map>
#include <random>
#include <stdexcept>
#include <vector>

#include "coarsen/meshops.hpp"

namespace coarsen {

TriMesh icosphere(int subdivisions) {
  if (subdivisions < 0) throw std::invalid_argument("icosphere: negative subdivision level");
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Eigen::Vector3d> v = {
      {-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
      {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (auto& p : v) p.normalize();
  std::vector<Eigen::Vector3i> f = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
      {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
      {3, 8, 9},  {4, 9, 5},  {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};

  for (int level = 0; level < subdivisions; ++level) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      v.push_back((v[a] + v[b]).normalized());
      int id = static_cast<int>(v.size()) - 1;
      midpoint.emplace(key, id);
      return id;
    };
    std::vector<Eigen::Vector3i> next;
    next.reserve(f.size() * 4);
    for (const auto& tri : f) {
      int a = mid(tri[0], tri[1]), b = mid(tri[1], tri[2]), c = mid(tri[2], tri[0]);
      next.emplace_back(tri[0], a, c);
      next.emplace_back(tri[1], b, a);
      next.emplace_back(tri[2], c, b);
      next.emplace_back(a, b, c);
    }
    f = std::move(next);
  }

  TriMesh mesh;
  mesh.vertices.resize(static_cast<Index>(v.size()), 3);
  for (std::size_t i = 0; i < v.size(); ++i) mesh.vertices.row(static_cast<Index>(i)) = v[i];
  mesh.faces.resize(static_cast<Index>(f.size()), 3);
  for (std::size_t i = 0; i < f.size(); ++i) mesh.faces.row(static_cast<Index>(i)) = f[i];
  return mesh;
}

TriMesh grid_mesh(Index nx, Index ny, double jitter, unsigned seed) {
  if (nx < 2 || ny < 2) throw std::invalid_argument("grid_mesh: need at least 2x2 vertices");
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> offset(-jitter, jitter);
  const double hx = 1.0 / static_cast<double>(nx - 1);
  const double hy = 1.0 / static_cast<double>(ny - 1);
  TriMesh mesh;
  mesh.vertices.resize(nx * ny, 3);
  for (Index j = 0; j < ny; ++j) {
    for (Index i = 0; i < nx; ++i) {
      double x = static_cast<double>(i) * hx + offset(rng) * hx;
      double y = static_cast<double>(j) * hy + offset(rng) * hy;
      mesh.vertices.row(j * nx + i) << x, y, 0.0;
    }
  }
  mesh.faces.resize(2 * (nx - 1) * (ny - 1), 3);
  Index f = 0;
  for (Index j = 0; j + 1 < ny; ++j) {
    for (Index i = 0; i + 1 < nx; ++i) {
      int a = static_cast<int>(j * nx + i), b = a + 1;
      int c = static_cast<int>((j + 1) * nx + i), d = c + 1;
      mesh.faces.row(f++) << a, b, d;
      mesh.faces.row(f++) << a, d, c;
    }
  }
  return mesh;
}

TriMesh regular_tetrahedron() {
  TriMesh mesh;
  mesh.vertices.resize(4, 3);
  mesh.vertices << 1, 1, 1, 1, -1, -1, -1, 1, -1, -1, -1, 1;
  mesh.faces.resize(4, 3);
  mesh.faces << 0, 1, 2, 0, 3, 1, 0, 2, 3, 1, 3, 2;
  return mesh;
}

}  // namespace coarsen
