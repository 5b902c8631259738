#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "coarsen/meshops.hpp"

namespace coarsen {
namespace {

// OBJ face token "v", "v/vt", "v//vn" or "v/vt/vn"; negative indices are
// relative to the vertices read so far.
Index parse_face_index(const std::string& token, Index vertex_count, const std::filesystem::path& path,
                       long line) {
  const std::string head = token.substr(0, token.find('/'));
  long idx = 0;
  try {
    std::size_t used = 0;
    idx = std::stol(head, &used);
    if (used != head.size()) throw std::invalid_argument(head);
  } catch (const std::exception&) {
    throw std::runtime_error(path.string() + ":" + std::to_string(line) + ": bad face index '" + token + "'");
  }
  if (idx == 0) {
    throw std::runtime_error(path.string() + ":" + std::to_string(line) +
                             ": face index 0 (OBJ indices are 1-based)");
  }
  Index resolved = idx > 0 ? idx - 1 : vertex_count + idx;
  if (resolved < 0 || resolved >= vertex_count) {
    throw std::runtime_error(path.string() + ":" + std::to_string(line) + ": face index " +
                             std::to_string(idx) + " out of range");
  }
  return resolved;
}

}  // namespace

ObjLoad load_obj(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_obj: cannot open " + path.string());

  std::vector<Eigen::Vector3d> verts;
  std::vector<Eigen::Vector3i> tris;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag)) continue;
    if (tag == "v") {
      Eigen::Vector3d p;
      if (!(ss >> p.x() >> p.y() >> p.z())) {
        throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": malformed vertex");
      }
      verts.push_back(p);
    } else if (tag == "f") {
      std::vector<Index> poly;
      std::string tok;
      while (ss >> tok) poly.push_back(parse_face_index(tok, static_cast<Index>(verts.size()), path, lineno));
      if (poly.size() < 3) {
        throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": face with fewer than 3 vertices");
      }
      for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
        tris.emplace_back(static_cast<int>(poly[0]), static_cast<int>(poly[k]), static_cast<int>(poly[k + 1]));
      }
    }
  }

  ObjLoad out;
  out.mesh.vertices.resize(static_cast<Index>(verts.size()), 3);
  for (std::size_t i = 0; i < verts.size(); ++i) out.mesh.vertices.row(static_cast<Index>(i)) = verts[i];

  double bbox2 = 0.0;
  if (!verts.empty()) {
    Eigen::Vector3d lo = out.mesh.vertices.colwise().minCoeff();
    Eigen::Vector3d hi = out.mesh.vertices.colwise().maxCoeff();
    bbox2 = (hi - lo).squaredNorm();
  }
  std::vector<Eigen::Vector3i> kept;
  for (const auto& t : tris) {
    const Eigen::Vector3d p0 = verts[t[0]], p1 = verts[t[1]], p2 = verts[t[2]];
    double area = 0.5 * (p1 - p0).cross(p2 - p0).norm();
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2] || area < 1e-14 * bbox2) {
      ++out.dropped_faces;
      continue;
    }
    kept.push_back(t);
  }
  out.mesh.faces.resize(static_cast<Index>(kept.size()), 3);
  for (std::size_t f = 0; f < kept.size(); ++f) out.mesh.faces.row(static_cast<Index>(f)) = kept[f];
  return out;
}

void write_obj(const std::filesystem::path& path, const TriMesh& mesh) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_obj: cannot open " + path.string());
  for (Index i = 0; i < mesh.num_vertices(); ++i) {
    out << "v " << format_double(mesh.vertices(i, 0)) << ' ' << format_double(mesh.vertices(i, 1)) << ' '
        << format_double(mesh.vertices(i, 2)) << '\n';
  }
  for (Index f = 0; f < mesh.num_faces(); ++f) {
    out << "f " << mesh.faces(f, 0) + 1 << ' ' << mesh.faces(f, 1) + 1 << ' ' << mesh.faces(f, 2) + 1 << '\n';
  }
}

}  // namespace coarsen
