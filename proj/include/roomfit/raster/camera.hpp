#pragma once

#include <stdexcept>

#include "roomfit/geom/vec3.hpp"

namespace roomfit::raster {

/// Pinhole intrinsics. Pixel (u, v) has its center at (u + 0.5, v + 0.5)
/// in continuous image coordinates; projection lands in that continuous
/// space, so a point projecting to exactly (cx, cy) sits on the center of
/// pixel (cx - 0.5, cy - 0.5) only when cx is half-integral.
struct Intrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  void validate() const {
    if (fx <= 0.0 || fy <= 0.0) throw std::invalid_argument("intrinsics: focal lengths must be positive");
    if (width <= 0 || height <= 0) throw std::invalid_argument("intrinsics: image size must be positive");
  }
};

/// Camera at the world origin, oriented by pitch (about camera x) and roll
/// (about the optical axis). World points map to camera space via
/// x_cam = R_x(pitch) * R_z(roll) * x_world.
struct PinholeCamera {
  Intrinsics intr;
  double pitch = 0.0;
  double roll = 0.0;

  void validate() const {
    intr.validate();
    constexpr double half_pi = geom::kPi / 2.0;
    if (std::abs(pitch) >= half_pi || std::abs(roll) >= half_pi)
      throw std::invalid_argument("camera: |pitch| and |roll| must be < pi/2");
  }

  geom::Mat3 rotation() const { return geom::Mat3::rot_x(pitch) * geom::Mat3::rot_z(roll); }

  geom::Vec3 to_camera(const geom::Vec3& world) const { return rotation() * world; }
};

/// Projection of a single camera-space point.
struct Projected {
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;
  bool valid = false;  // false when the point is at or behind the near plane
};

inline constexpr double kNearClip = 1e-4;

inline Projected project_camera_point(const Intrinsics& intr, const geom::Vec3& p) {
  Projected out;
  if (!(p.z > kNearClip)) return out;
  out.u = intr.fx * p.x / p.z + intr.cx;
  out.v = intr.fy * p.y / p.z + intr.cy;
  out.depth = p.z;
  out.valid = true;
  return out;
}

inline Projected project_world_point(const PinholeCamera& cam, const geom::Vec3& world) {
  return project_camera_point(cam.intr, cam.to_camera(world));
}

}  // namespace roomfit::raster
