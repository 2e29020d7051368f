#pragma once

#include <span>
#include <vector>

#include "roomfit/geom/mesh.hpp"
#include "roomfit/hsi/hsi.hpp"
#include "roomfit/raster/camera.hpp"

namespace roomfit::body {

/// Joint 0 carries the root of the skeleton; the outlier filter measures
/// whole-body motion there.
inline constexpr int kPelvisJoint = 0;

/// One motion frame. The mesh and joints live in the camera frame until the
/// camera stage fixes a rotation; `joints_observed` keeps the raw estimates so
/// smoothing always restarts from the same data.
struct BodyFrame {
  int timestamp = 0;
  geom::TriMesh mesh;
  std::vector<geom::Vec3> joints;
  std::vector<geom::Vec3> joints_observed;
  std::vector<int> feet_contacts;
  std::vector<int> body_contacts;

  /// Throws std::invalid_argument on out-of-range contact indices,
  /// non-finite joints, or a joint/observation size mismatch.
  void validate() const;
};

struct TrajectoryFilterConfig {
  double tau_pelvis = 0.05;
  double tau_local = 0.08;

  void validate() const;
};

/// Sum of sigma^2 r^2 / (r^2 + sigma^2) over the residual components.
/// Behaves like r^2 near zero and saturates at sigma^2 per component.
double geman_mcclure(std::span<const double> residual, double sigma);
double geman_mcclure(double residual, double sigma);

/// Camera-and-ground alignment term: every foot-contact vertex, rotated into
/// the gravity-aligned frame, should sit at the ground height. Mean of the
/// robustified height gaps over all foot-contact vertices of all frames.
/// Throws std::invalid_argument when no frame has a foot contact.
double feet_loss(double pitch, double roll, double y_gp, const std::vector<BodyFrame>& frames,
                 double sigma = 0.1);

/// Constant-velocity deviation of the joint trajectories, robustified per
/// interior frame: `spatial` over 3D second differences (sigma 0.1),
/// `projected` over pixel-space second differences (sigma 100). The projected
/// part is a diagnostic; the smoothing solve only acts on the 3D term.
struct SmoothnessTerms {
  double spatial = 0.0;
  double projected = 0.0;

  double total() const { return spatial + projected; }
};

SmoothnessTerms smoothness_terms(const std::vector<std::vector<geom::Vec3>>& joints,
                                 const raster::Intrinsics& intr);
double smoothness_loss(const std::vector<std::vector<geom::Vec3>>& joints,
                       const raster::Intrinsics& intr);

/// Replaces each frame's joints with the minimizer of
/// ||J - J_observed||^2 + lambda * ||second differences of J||^2,
/// solved exactly per joint and coordinate. Reads `joints_observed`, so a
/// second application reproduces the same output.
void smooth_trajectories(std::vector<BodyFrame>& frames, double lambda);

/// Indices of frames whose pelvis acceleration stays under tau_pelvis and
/// whose largest pelvis-relative joint acceleration stays under tau_local.
/// Boundary frames have no central second difference and are always kept.
std::vector<int> filter_outlier_frames(const std::vector<BodyFrame>& frames,
                                       const TrajectoryFilterConfig& config);

/// Per-frame rigid translation nudging the body out of scene objects and onto
/// its assigned contact regions, found by derivative-free descent of
///   sum of squared penetration depths over body vertices
/// + sum of distances from assigned contact vertices to their region points
/// + ||delta||^2,
/// with ||delta|| capped at max_shift. `assignment.object_of[t]` pairs with
/// frames[t].body_contacts in order. Frames and objects are world frame.
std::vector<geom::Vec3> refine_body_placement(const std::vector<BodyFrame>& frames,
                                              const std::vector<geom::TriMesh>& posed_objects,
                                              const std::vector<hsi::ContactRegions>& regions,
                                              const hsi::ContactAssignment& assignment,
                                              double max_shift = 0.3);

}  // namespace roomfit::body
