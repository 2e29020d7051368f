#pragma once

#include <string>
#include <vector>

#include "roomfit/geom/mesh.hpp"
#include "roomfit/geom/vec3.hpp"

namespace roomfit::sdf {

/// Uniform lattice of sample nodes. Node (i, j, k) sits at
/// origin + voxel * (i, j, k); the grid covers the padded union AABB of the
/// bodies it was built for.
struct GridSpec {
  geom::Vec3 origin;
  double voxel = 0.0;
  int nx = 0, ny = 0, nz = 0;

  size_t node_count() const { return size_t(nx) * ny * nz; }
  geom::Vec3 node_position(int i, int j, int k) const {
    return origin + geom::Vec3{i * voxel, j * voxel, k * voxel};
  }
  geom::Vec3 max_corner() const { return node_position(nx - 1, ny - 1, nz - 1); }
  double diagonal() const { return voxel * std::sqrt(3.0); }

  bool operator==(const GridSpec& o) const {
    return origin.x == o.origin.x && origin.y == o.origin.y && origin.z == o.origin.z &&
           voxel == o.voxel && nx == o.nx && ny == o.ny && nz == o.nz;
  }
};

/// Sample value returned outside the grid; far enough that nothing out there
/// can register as penetrating.
inline constexpr double kOutsideSdf = 1e3;

/// Dense signed distances on a GridSpec lattice, negative inside.
struct SdfVolume {
  GridSpec spec;
  std::vector<float> field;

  float& at(int i, int j, int k) { return field[(size_t(k) * spec.ny + j) * spec.nx + i]; }
  float at(int i, int j, int k) const { return field[(size_t(k) * spec.ny + j) * spec.nx + i]; }

  /// Trilinear interpolation; points outside the lattice return kOutsideSdf.
  double sample(const geom::Vec3& p) const;
};

/// Smallest grid with `resolution` nodes along the longest axis of the
/// bodies' union AABB grown by `padding` on every side. Slack from rounding
/// the other axes up to whole voxels is split evenly, so a cubic input maps
/// to the exact AABB.
GridSpec grid_from_bodies(const std::vector<geom::TriMesh>& bodies, int resolution = 256,
                          double padding = 0.2);

/// Exact nearest-triangle distance at every node, negated where the
/// generalized winding number reports inside. The mesh must be watertight.
SdfVolume build_body_sdf(const geom::TriMesh& mesh, const GridSpec& spec);

/// Elementwise minimum; all volumes must share one GridSpec.
SdfVolume accumulate_min(const std::vector<SdfVolume>& volumes);
void min_into(SdfVolume& acc, const SdfVolume& v);

/// Union SDF of many bodies on one grid (grid_from_bodies over the set). Each
/// body is evaluated only on a lattice-aligned window around its padded
/// bounds and min-folded in; nodes no window reaches keep kOutsideSdf. Inside
/// distances match the dense per-body accumulation exactly, and outside
/// values within `padding` of some body do too, so consumers of the sign or
/// of near-surface values see the dense result at a fraction of the cost.
SdfVolume accumulate_body_sdf(const std::vector<geom::TriMesh>& bodies, int resolution = 256,
                              double padding = 0.2);

/// Debug dump: <base>.raw (little-endian float32) plus <base>.json sidecar.
void save_volume(const SdfVolume& volume, const std::string& base_path);
SdfVolume load_volume(const std::string& base_path);

}  // namespace roomfit::sdf
