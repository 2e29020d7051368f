#include <cmath>
#include <stdexcept>

#include "roomfit/geom/nn.hpp"
#include "roomfit/hsi/hsi.hpp"
#include "roomfit/kernels/kernels.hpp"

namespace roomfit::hsi {

using geom::Vec3;

TermAccum collision_term(const std::vector<Vec3>& world_verts, const sdf::SdfVolume& sdf) {
  std::vector<float> samples(world_verts.size());
  for (size_t i = 0; i < world_verts.size(); ++i)
    samples[i] = static_cast<float>(sdf.sample(world_verts[i]));
  TermAccum acc;
  acc.sum = kernels::sum_sq_neg(samples.data(), samples.size());
  acc.count = static_cast<int64_t>(samples.size());
  return acc;
}

double collision_loss(const std::vector<geom::TriMesh>& posed_objects,
                      const sdf::SdfVolume& global_sdf) {
  TermAccum total;
  for (const auto& obj : posed_objects) total += collision_term(obj.vertices, global_sdf);
  return total.mean();
}

TermAccum contact_term(const std::vector<Vec3>& body_points_world,
                       const std::vector<Vec3>& posed_verts, const ContactRegions& regions) {
  TermAccum acc;
  if (body_points_world.empty()) return acc;
  if (regions.seat.empty())
    throw std::invalid_argument("contact: object has an empty seat region");

  std::vector<Vec3> targets;
  targets.reserve(regions.seat.size());
  for (int idx : regions.seat) targets.push_back(posed_verts[static_cast<size_t>(idx)]);
  acc.sum = geom::one_sided_chamfer(body_points_world, targets, geom::AxisFilter::YOnly);

  if (!regions.back.empty()) {
    targets.clear();
    for (int idx : regions.back) targets.push_back(posed_verts[static_cast<size_t>(idx)]);
    acc.sum += geom::one_sided_chamfer(body_points_world, targets, geom::AxisFilter::XZOnly);
  }
  acc.count = 1;
  return acc;
}

double contact_loss(const std::vector<std::vector<Vec3>>& body_points_per_object,
                    const std::vector<geom::TriMesh>& posed_objects,
                    const std::vector<ContactRegions>& regions) {
  if (body_points_per_object.size() != posed_objects.size() ||
      posed_objects.size() != regions.size())
    throw std::invalid_argument("contact: per-object list sizes differ");
  TermAccum total;
  for (size_t i = 0; i < posed_objects.size(); ++i)
    total += contact_term(body_points_per_object[i], posed_objects[i].vertices, regions[i]);
  return total.mean();
}

std::optional<PixelBox> project_box(const raster::Intrinsics& intr, const geom::Mat3& cam_rotation,
                                    const geom::OrientedBox& box) {
  double u0 = std::numeric_limits<double>::infinity(), v0 = u0;
  double u1 = -u0, v1 = -u0;
  bool any = false;
  for (const Vec3& corner : box.corners()) {
    const auto p = raster::project_camera_point(intr, cam_rotation * corner);
    if (!p.valid) continue;
    any = true;
    u0 = std::min(u0, p.u);
    v0 = std::min(v0, p.v);
    u1 = std::max(u1, p.u);
    v1 = std::max(v1, p.v);
  }
  if (!any) return std::nullopt;
  return PixelBox{u0, v0, u1 - u0, v1 - v0};
}

double bbox_loss(const std::vector<std::optional<PixelBox>>& projected,
                 const std::vector<PixelBox>& detected, int image_width) {
  if (projected.size() != detected.size())
    throw std::invalid_argument("bbox: projected/detected count mismatch");
  if (image_width <= 0) throw std::invalid_argument("bbox: image width must be positive");
  double sum = 0.0;
  for (size_t i = 0; i < projected.size(); ++i) {
    if (!projected[i]) continue;
    sum += std::abs(projected[i]->x_min - detected[i].x_min) +
           std::abs(projected[i]->y_min - detected[i].y_min) +
           std::abs(projected[i]->width - detected[i].width);
  }
  return sum / image_width;
}

double scale_loss(const std::vector<Vec3>& scales, const std::vector<Vec3>& init_scales) {
  if (scales.size() != init_scales.size())
    throw std::invalid_argument("scale: current/init count mismatch");
  double sum = 0.0;
  for (size_t i = 0; i < scales.size(); ++i) {
    const Vec3 r{scales[i].x / init_scales[i].x - 1.0, scales[i].y / init_scales[i].y - 1.0,
                 scales[i].z / init_scales[i].z - 1.0};
    sum += r.norm();
  }
  return sum;
}

}  // namespace roomfit::hsi
