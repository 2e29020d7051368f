#include "roomfit/geom/mesh.hpp"

#include <map>
#include <stdexcept>
#include <string>

namespace roomfit::geom {

Aabb TriMesh::bounds() const {
  Aabb b;
  for (const Vec3& v : vertices) b.expand(v);
  return b;
}

double TriMesh::surface_area() const {
  double a = 0.0;
  for (const auto& f : faces) {
    const Vec3 e1 = vertices[f[1]] - vertices[f[0]];
    const Vec3 e2 = vertices[f[2]] - vertices[f[0]];
    a += 0.5 * e1.cross(e2).norm();
  }
  return a;
}

void TriMesh::compute_vertex_normals() {
  normals.assign(vertices.size(), Vec3{});
  for (const auto& f : faces) {
    const Vec3 e1 = vertices[f[1]] - vertices[f[0]];
    const Vec3 e2 = vertices[f[2]] - vertices[f[0]];
    const Vec3 an = e1.cross(e2);  // magnitude twice the face area
    normals[f[0]] += an;
    normals[f[1]] += an;
    normals[f[2]] += an;
  }
  for (Vec3& n : normals) {
    const double len = n.norm();
    n = len > 1e-30 ? n / len : Vec3{0.0, 1.0, 0.0};
  }
}

void TriMesh::validate() const {
  const int nv = static_cast<int>(vertices.size());
  for (size_t i = 0; i < vertices.size(); ++i)
    if (!vertices[i].is_finite())
      throw std::runtime_error("mesh: non-finite vertex " + std::to_string(i));
  for (size_t i = 0; i < faces.size(); ++i)
    for (int k = 0; k < 3; ++k)
      if (faces[i][k] < 0 || faces[i][k] >= nv)
        throw std::runtime_error("mesh: face " + std::to_string(i) +
                                 " references invalid vertex " +
                                 std::to_string(faces[i][k]));
}

WatertightReport validate_watertight(const TriMesh& mesh) {
  std::map<std::pair<int, int>, int> uses;
  for (const auto& f : mesh.faces) {
    for (int k = 0; k < 3; ++k) {
      int a = f[k], b = f[(k + 1) % 3];
      if (a > b) std::swap(a, b);
      ++uses[{a, b}];
    }
  }
  WatertightReport rep;
  for (const auto& [e, n] : uses) {
    if (n == 1) rep.boundary_edges.push_back({e.first, e.second});
    else if (n > 2) rep.nonmanifold_edges.push_back({e.first, e.second});
  }
  return rep;
}

}  // namespace roomfit::geom
