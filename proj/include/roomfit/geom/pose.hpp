#pragma once

#include <span>

#include "roomfit/geom/mesh.hpp"

namespace roomfit::geom {

// Object placement: per-axis scale, then yaw about +y, then translation.
//   v' = R_y(yaw) * (scale .* v) + translation
struct PoseParams {
  Vec3 scale{1.0, 1.0, 1.0};
  double yaw = 0.0;  // radians, callers may pass any value; applied wrapped
  Vec3 translation{0.0, 0.0, 0.0};
};

inline Vec3 pose_point(const PoseParams& p, const Vec3& v) {
  const double c = std::cos(p.yaw), s = std::sin(p.yaw);
  const Vec3 q = p.scale.cwise(v);
  return {c * q.x + s * q.z + p.translation.x,
          q.y + p.translation.y,
          -s * q.x + c * q.z + p.translation.z};
}

void pose_points(const PoseParams& p, std::span<const Vec3> in, std::span<Vec3> out);

// Copies the mesh with posed vertices; yaw is wrapped to [0, 2*pi) and
// normals are recomputed when the input carries them.
// Throws std::invalid_argument when any scale component is <= 0.
TriMesh apply_pose(const TriMesh& mesh, const PoseParams& p);

}  // namespace roomfit::geom
