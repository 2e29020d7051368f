#pragma once

#include <optional>
#include <string>
#include <vector>

#include "roomfit/geom/box.hpp"
#include "roomfit/geom/mesh.hpp"
#include "roomfit/raster/rasterizer.hpp"
#include "roomfit/sdf/sdf.hpp"

namespace roomfit::hsi {

/// Partial result of one loss term: a raw sum and the number of
/// contributors. Mean-style terms divide at combine time, sum-style terms
/// ignore the count.
struct TermAccum {
  double sum = 0.0;
  int64_t count = 0;

  double mean() const { return count > 0 ? sum / static_cast<double>(count) : 0.0; }
  TermAccum& operator+=(const TermAccum& o) {
    sum += o.sum;
    count += o.count;
    return *this;
  }
};

// --- depth ordering -------------------------------------------------------

/// Per-object depth bounds for a single frame. `near` holds the body's
/// back-surface depth where the object must lie behind the person (-inf
/// elsewhere); `far` holds the body's front-surface depth where the object
/// occludes the person (+inf elsewhere).
struct FrameDepthRanges {
  std::vector<raster::DepthMap> near;
  std::vector<raster::DepthMap> far;
};

/// Frame bounds folded over the sequence: near = max over frames,
/// far = min over frames.
using DepthRangeMaps = FrameDepthRanges;

FrameDepthRanges frame_depth_ranges(const raster::Intrinsics& intr,
                                    const geom::TriMesh& body_cam,
                                    const raster::MaskImage& person_mask,
                                    const std::vector<raster::MaskImage>& object_masks);

void accumulate_into(DepthRangeMaps& acc, const FrameDepthRanges& frame);
DepthRangeMaps accumulate_depth_ranges(const std::vector<FrameDepthRanges>& frames);

/// Hinge penalty for object pixels leaving their [near, far] depth window,
/// restricted to the object's detected mask. The rendered depth must come
/// from the object alone (front pass); `roi` must contain its silhouette.
TermAccum depth_order_term(const raster::DepthMap& rendered, const raster::DepthMap& near,
                           const raster::DepthMap& far, const raster::MaskImage& object_mask,
                           const raster::Roi& roi);

/// Mean of both hinges over all contributing pixels of all objects.
double depth_order_loss(const raster::Intrinsics& intr, const geom::Mat3& cam_rotation,
                        const std::vector<geom::TriMesh>& posed_objects,
                        const DepthRangeMaps& maps,
                        const std::vector<raster::MaskImage>& object_masks);

// --- collision --------------------------------------------------------------

TermAccum collision_term(const std::vector<geom::Vec3>& world_verts, const sdf::SdfVolume& sdf);

/// Sum of squared negative SDF samples over every object vertex, divided by
/// the total vertex count.
double collision_loss(const std::vector<geom::TriMesh>& posed_objects,
                      const sdf::SdfVolume& global_sdf);

// --- contact ---------------------------------------------------------------

enum class Category { Chair, Sofa, Bed, Table };

Category category_from_string(const std::string& name);
const char* to_string(Category c);

/// Vertex-index sets of a canonical mesh (+y up, seat facing +z): `seat` are
/// vertices whose normal lies within 30 degrees of +y (below 60% of object
/// height for chairs and sofas, above it for beds and tables), `back` within
/// 30 degrees of +z (chairs and sofas only).
struct ContactRegions {
  std::vector<int> seat;
  std::vector<int> back;
};

ContactRegions extract_contact_regions(const geom::TriMesh& canonical, Category category);

/// Object index per labeled body-contact vertex, grouped by frame; -1 where
/// no object qualified.
struct ContactAssignment {
  std::vector<std::vector<int>> object_of;

  size_t assigned_count() const {
    size_t n = 0;
    for (const auto& f : object_of)
      for (int o : f)
        if (o >= 0) ++n;
    return n;
  }
};

/// A vertex joins object i when its projection falls inside the dilated mask
/// of i and it sits within `radius` of the posed object's AABB; among several
/// candidates the smallest point-to-surface distance wins.
ContactAssignment assign_contacts(const raster::Intrinsics& intr,
                                  const std::vector<std::vector<geom::Vec3>>& contact_verts_cam,
                                  const geom::Mat3& cam_rotation,
                                  const std::vector<raster::MaskImage>& dilated_masks,
                                  const std::vector<geom::TriMesh>& posed_objects,
                                  double radius = 0.5);

/// Pools the assigned vertices into world-frame point sets, one per object.
std::vector<std::vector<geom::Vec3>> group_contact_points(
    const ContactAssignment& assignment,
    const std::vector<std::vector<geom::Vec3>>& contact_verts_cam,
    const geom::Mat3& cam_rotation, size_t object_count);

/// One-directional Chamfer from the assigned body points to the object's
/// contact regions: y-only to the seat set, xz-only to the back set (skipped
/// when empty). count is 1 when the object has any assigned points.
TermAccum contact_term(const std::vector<geom::Vec3>& body_points_world,
                       const std::vector<geom::Vec3>& posed_verts, const ContactRegions& regions);

/// Mean of contact_term over objects with at least one assigned vertex.
double contact_loss(const std::vector<std::vector<geom::Vec3>>& body_points_per_object,
                    const std::vector<geom::TriMesh>& posed_objects,
                    const std::vector<ContactRegions>& regions);

// --- 2D box and scale anchors ------------------------------------------------

struct PixelBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double width = 0.0;
  double height = 0.0;
};

/// Screen-space bounds of the eight projected box corners; empty when no
/// corner lies in front of the near plane.
std::optional<PixelBox> project_box(const raster::Intrinsics& intr,
                                    const geom::Mat3& cam_rotation, const geom::OrientedBox& box);

/// L1 gap in {x_min, y_min, width}, normalized by image width. Objects whose
/// projection is empty are skipped.
double bbox_loss(const std::vector<std::optional<PixelBox>>& projected,
                 const std::vector<PixelBox>& detected, int image_width);

/// Sum over objects of || s / s_init - 1 ||_2.
double scale_loss(const std::vector<geom::Vec3>& scales,
                  const std::vector<geom::Vec3>& init_scales);

// --- composition -------------------------------------------------------------

struct HsiTerms {
  double bbox = 0.0;
  double occ_sil = 0.0;
  double scale = 0.0;
  double depth = 0.0;
  double collision = 0.0;
  double contact = 0.0;
};

struct HsiWeights {
  double bbox = 1000.0;
  double occ_sil = 0.3;
  double scale = 1000.0;
  double depth = 8.0;
  double collision = 1000.0;
  double contact = 1e5;
};

inline double total_loss(const HsiTerms& t, const HsiWeights& w) {
  return w.bbox * t.bbox + w.occ_sil * t.occ_sil + w.scale * t.scale + w.depth * t.depth +
         w.collision * t.collision + w.contact * t.contact;
}

}  // namespace roomfit::hsi
