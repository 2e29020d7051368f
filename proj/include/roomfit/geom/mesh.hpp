#pragma once

#include <array>
#include <string>
#include <vector>

#include "roomfit/geom/vec3.hpp"

namespace roomfit::geom {

// Indexed triangle mesh. Units are meters, +y is up, right-handed,
// counter-clockwise winding seen from outside.
struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;
  // per-vertex unit normals; empty when not computed
  std::vector<Vec3> normals;

  bool has_normals() const { return !normals.empty(); }
  Aabb bounds() const;
  double surface_area() const;

  // area-weighted average of incident face normals
  void compute_vertex_normals();

  // throws std::runtime_error on out-of-range indices or non-finite vertices
  void validate() const;
};

struct Edge {
  int a = 0, b = 0;  // undirected, stored with a < b
  bool operator==(const Edge&) const = default;
};

struct WatertightReport {
  std::vector<Edge> boundary_edges;     // edges used by exactly one face
  std::vector<Edge> nonmanifold_edges;  // edges used by three or more faces
  bool watertight() const { return boundary_edges.empty() && nonmanifold_edges.empty(); }
};

WatertightReport validate_watertight(const TriMesh& mesh);

// ASCII OBJ, triangles only (polygons fan-triangulated on read).
TriMesh load_obj(const std::string& path);
void save_obj(const TriMesh& mesh, const std::string& path);

}  // namespace roomfit::geom
