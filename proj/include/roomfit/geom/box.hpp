#pragma once

#include <array>

#include "roomfit/geom/pose.hpp"

namespace roomfit::geom {

// Gravity-aligned box: free rotation only about +y.
struct OrientedBox {
  Vec3 center{0, 0, 0};
  Vec3 half{0, 0, 0};  // half extents along the local x/y/z axes
  double yaw = 0.0;

  double volume() const { return 8.0 * half.x * half.y * half.z; }
  std::array<Vec3, 8> corners() const;
};

// Axis box of the canonical mesh carried through scale -> yaw -> translate.
OrientedBox pose_box(const Aabb& canonical, const PoseParams& p);

// Intersection-over-union of two yaw-only boxes: convex polygon clip of the
// xz footprints times the y interval overlap.
double oriented_iou3d(const OrientedBox& a, const OrientedBox& b);

}  // namespace roomfit::geom
