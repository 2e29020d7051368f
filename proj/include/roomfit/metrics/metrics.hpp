#pragma once

#include <string>
#include <vector>

#include "roomfit/body/body.hpp"
#include "roomfit/geom/mesh.hpp"
#include "roomfit/geom/pose.hpp"
#include "roomfit/hsi/hsi.hpp"
#include "roomfit/raster/camera.hpp"

namespace roomfit::metrics {

/// Axis-aligned rectangle IoU in pixels; degenerate rectangles score 0.
double iou2d(const hsi::PixelBox& a, const hsi::PixelBox& b);

/// Mean over bodies of the fraction of vertices that lie inside no object.
/// The inside test is a winding number against each posed mesh, so the score
/// is independent of any voxelization. Complementary by construction:
/// score + penetrating fraction = 1.
double non_collision_score(const std::vector<geom::TriMesh>& bodies,
                           const std::vector<geom::TriMesh>& objects);

/// Fraction of bodies with at least one vertex penetrating an object.
double contact_score(const std::vector<geom::TriMesh>& bodies,
                     const std::vector<geom::TriMesh>& objects);

/// Auxiliary variant: a body also counts as in contact when any vertex comes
/// within `radius` of an object surface, penetrating or not.
double contact_proximity_score(const std::vector<geom::TriMesh>& bodies,
                               const std::vector<geom::TriMesh>& objects, double radius = 0.02);

struct GroundPenetration {
  double frequency = 0.0;
  double mean_distance = 0.0;
};

/// Foot-contact vertices below the ground plane. Heights are measured in the
/// world frame as (R^T v).y - y_gp; a vertex penetrates when its height drops
/// below -threshold. The distance is averaged over penetrating vertices only.
/// Throws std::invalid_argument when no frame labels any foot contact.
GroundPenetration ground_penetration(const std::vector<body::BodyFrame>& frames, double y_gp,
                                     const geom::Mat3& cam_rotation, double threshold = 0.0);

struct OrientationError {
  double pitch = 0.0;
  double roll = 0.0;
  double mean = 0.0;
};

OrientationError camera_orientation_error(double est_pitch, double est_roll, double gt_pitch,
                                          double gt_roll);

/// A scene layout under evaluation: canonical meshes with their poses and the
/// camera/ground parameters they were solved against.
struct ScenePlacement {
  std::vector<geom::TriMesh> canonical;
  std::vector<geom::PoseParams> poses;
  std::vector<hsi::Category> categories;
  double pitch = 0.0;
  double roll = 0.0;
  double y_gp = 0.0;

  geom::Mat3 cam_rotation() const;
  void validate() const;
};

struct ObjectScore {
  int gt_index = -1;
  int estimate_index = -1;  // -1 when no same-category estimate was left
  bool matched = false;
  double iou_3d = 0.0;
  double iou_2d = 0.0;
  double p2s = 0.0;  // meters, ground-truth vertices against the estimated surface
};

struct SceneReport {
  int schema_version = 1;
  bool gt_available = false;

  std::vector<ObjectScore> objects;
  double mean_iou_3d = 0.0;
  double mean_iou_2d = 0.0;
  double mean_p2s = 0.0;

  double non_collision = 0.0;
  double contact = 0.0;
  double contact_proximity = 0.0;
  GroundPenetration ground;
  OrientationError orientation;

  std::string to_json() const;
  /// Header line plus one value row, both newline-terminated.
  std::string to_csv() const;
};

/// Body-interaction and ground metrics only; layout scores need ground truth.
SceneReport evaluate(const ScenePlacement& estimate, const std::vector<body::BodyFrame>& frames);

/// Full report. Ground-truth objects are matched to estimates of the same
/// category greedily by descending 3D IoU; unmatched ground-truth objects
/// score zero and are flagged. Mean p2s runs over matched objects.
SceneReport evaluate(const raster::Intrinsics& intr, const ScenePlacement& estimate,
                     const ScenePlacement& gt, const std::vector<body::BodyFrame>& frames);

}  // namespace roomfit::metrics
