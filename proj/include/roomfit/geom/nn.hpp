#pragma once

#include <span>
#include <vector>

#include "roomfit/geom/vec3.hpp"

namespace roomfit::geom {

// Distances restricted to coordinate subspaces; YOnly measures |dy|,
// XZOnly measures hypot(dx, dz).
enum class AxisFilter { All, YOnly, XZOnly };

inline Vec3 axis_weights(AxisFilter f) {
  switch (f) {
    case AxisFilter::YOnly: return {0.0, 1.0, 0.0};
    case AxisFilter::XZOnly: return {1.0, 0.0, 1.0};
    default: return {1.0, 1.0, 1.0};
  }
}

// Nearest-neighbor hierarchy over a fixed point set; queries take per-axis
// weights so one structure serves every axis filter.
class PointBvh {
 public:
  explicit PointBvh(std::span<const Vec3> points, int leaf_size = 8);
  double nearest_squared(const Vec3& q, const Vec3& w) const;

 private:
  struct Node {
    Aabb box;
    int left = -1, right = -1;
    int begin = 0, end = 0;
  };
  int build(int begin, int end, int leaf_size);
  void query(int node, const Vec3& q, const Vec3& w, double& best) const;

  std::vector<Node> nodes_;
  std::vector<Vec3> pts_;
};

// Mean unsquared distance from each source point to its nearest target,
// one direction only. Empty source contributes 0; empty target throws.
double one_sided_chamfer(std::span<const Vec3> source, std::span<const Vec3> target,
                         AxisFilter filter = AxisFilter::All);
double one_sided_chamfer(std::span<const Vec3> source, const PointBvh& target,
                         AxisFilter filter = AxisFilter::All);

}  // namespace roomfit::geom
