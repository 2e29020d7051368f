#pragma once

#include <span>
#include <vector>

#include "roomfit/geom/mesh.hpp"

namespace roomfit::geom {

// Closest point on triangle abc to p.
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

// Triangle hierarchy for nearest-surface and winding-number queries.
// Queries are exact for distances; the winding number uses far-field dipole
// approximations for clusters farther than `beta` node radii and exact
// solid angles elsewhere (beta <= 0 forces the fully exact sum).
class TriBvh {
 public:
  explicit TriBvh(const TriMesh& mesh, int leaf_size = 8);

  double squared_distance(const Vec3& p) const;
  // `upper_sq` is a known squared-distance upper bound used to prune the
  // search; the result is exact either way
  double squared_distance(const Vec3& p, double upper_sq) const;
  double distance(const Vec3& p) const { return std::sqrt(squared_distance(p)); }
  double winding_number(const Vec3& p) const;
  bool inside(const Vec3& p) const { return winding_number(p) > 0.5; }
  // unsigned distance, negated when the winding number says inside
  double signed_distance(const Vec3& p) const;

  const Aabb& bounds() const { return nodes_[0].box; }
  void set_winding_beta(double beta) { beta_ = beta; }

 private:
  struct Node {
    Aabb box;
    Vec3 dipole;    // sum of area-weighted triangle normals
    Vec3 centroid;  // area-weighted centroid
    double radius = 0.0;
    int left = -1, right = -1;  // children, or leaf range below
    int begin = 0, end = 0;
  };

  int build(std::vector<int>& order, int begin, int end, int leaf_size,
            const std::vector<Vec3>& ta, const std::vector<Vec3>& tb,
            const std::vector<Vec3>& tc);
  void query_distance(int node, const Vec3& p, double& best) const;
  double winding(int node, const Vec3& p) const;

  std::vector<Node> nodes_;
  std::vector<Vec3> a_, b_, c_;  // triangle vertices in BVH order
  double beta_ = 2.0;
};

// Mean distance from each query point to the mesh surface.
double point_to_surface(std::span<const Vec3> points, const TriBvh& bvh);
double point_to_surface(std::span<const Vec3> points, const TriMesh& mesh);

}  // namespace roomfit::geom
