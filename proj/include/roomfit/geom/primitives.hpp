#pragma once

#include "roomfit/geom/mesh.hpp"

namespace roomfit::geom {

// All generators produce watertight meshes in the canonical object frame:
// +y up, base plane at y = 0, centered in x and z, front toward -z.

// extents = full size; segments subdivide the top face only (contact targets)
TriMesh make_box(const Vec3& extents, int top_segments = 1);

// Box with every face subdivided (sx * sy * sz cells); interior face nodes
// keep exact face normals after vertex-normal averaging.
TriMesh make_box_grid(const Vec3& extents, int sx, int sy, int sz);

// centered at origin (not base-aligned); used by analytic tests
TriMesh make_uv_sphere(double radius, int slices = 24, int stacks = 16);

// capsule around a segment from `a` to `b`
TriMesh make_capsule(const Vec3& a, const Vec3& b, double radius,
                     int slices = 10, int stacks = 4);

// L-profile prism for chairs/sofas: horizontal seat slab plus a vertical
// back slab on the +z side, extruded along x.
TriMesh make_seat_prism(double width, double depth, double seat_height,
                        double total_height, double thickness);

// appends `src` as an extra connected component
void append_mesh(TriMesh& dst, const TriMesh& src);

}  // namespace roomfit::geom
