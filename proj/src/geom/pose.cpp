#include "roomfit/geom/pose.hpp"

#include <stdexcept>

namespace roomfit::geom {

void pose_points(const PoseParams& p, std::span<const Vec3> in, std::span<Vec3> out) {
  const double c = std::cos(p.yaw), s = std::sin(p.yaw);
  const Vec3 sc = p.scale;
  const Vec3 t = p.translation;
  for (size_t i = 0; i < in.size(); ++i) {
    const double qx = sc.x * in[i].x;
    const double qy = sc.y * in[i].y;
    const double qz = sc.z * in[i].z;
    out[i] = {c * qx + s * qz + t.x, qy + t.y, -s * qx + c * qz + t.z};
  }
}

TriMesh apply_pose(const TriMesh& mesh, const PoseParams& p) {
  if (!(p.scale.x > 0.0 && p.scale.y > 0.0 && p.scale.z > 0.0))
    throw std::invalid_argument("apply_pose: scale components must be positive");

  PoseParams wrapped = p;
  wrapped.yaw = wrap_angle(p.yaw);

  TriMesh out;
  out.vertices.resize(mesh.vertices.size());
  out.faces = mesh.faces;
  pose_points(wrapped, mesh.vertices, out.vertices);
  if (mesh.has_normals()) out.compute_vertex_normals();
  return out;
}

}  // namespace roomfit::geom
