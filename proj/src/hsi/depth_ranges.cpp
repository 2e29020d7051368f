#include <stdexcept>

#include "roomfit/hsi/hsi.hpp"
#include "roomfit/kernels/kernels.hpp"

namespace roomfit::hsi {

using raster::DepthMap;
using raster::Image;
using raster::MaskImage;

namespace {

constexpr float kNoNear = -std::numeric_limits<float>::infinity();
constexpr float kNoFar = std::numeric_limits<float>::infinity();

void check_sizes(const raster::Intrinsics& intr, const MaskImage& person,
                 const std::vector<MaskImage>& objects) {
  if (!person.same_size(intr.width, intr.height))
    throw std::invalid_argument("depth ranges: person mask resolution mismatch");
  for (const auto& m : objects)
    if (!m.same_size(intr.width, intr.height))
      throw std::invalid_argument("depth ranges: object mask resolution mismatch");
}

}  // namespace

FrameDepthRanges frame_depth_ranges(const raster::Intrinsics& intr, const geom::TriMesh& body_cam,
                                    const MaskImage& person_mask,
                                    const std::vector<MaskImage>& object_masks) {
  check_sizes(intr, person_mask, object_masks);
  const DepthMap front = raster::render_depth(body_cam.vertices, body_cam.faces, intr,
                                              raster::DepthPass::Front);
  const DepthMap back = raster::render_depth(body_cam.vertices, body_cam.faces, intr,
                                             raster::DepthPass::Back);

  FrameDepthRanges out;
  out.near.reserve(object_masks.size());
  out.far.reserve(object_masks.size());
  for (const auto& mask : object_masks) {
    DepthMap near(intr.width, intr.height, kNoNear);
    DepthMap far(intr.width, intr.height, kNoFar);
    for (size_t q = 0; q < mask.size(); ++q) {
      if (!mask.data()[q]) continue;
      const float body_front = front.data()[q];
      if (!std::isfinite(body_front)) continue;  // body absent at this pixel
      if (person_mask.data()[q]) {
        // person visible in front: object must stay behind the body's far side
        near.data()[q] = back.data()[q];
      } else {
        // body rendered but hidden by the object: object must be in front
        far.data()[q] = body_front;
      }
    }
    out.near.push_back(std::move(near));
    out.far.push_back(std::move(far));
  }
  return out;
}

void accumulate_into(DepthRangeMaps& acc, const FrameDepthRanges& frame) {
  if (acc.near.empty() && acc.far.empty()) {
    acc = frame;
    return;
  }
  if (acc.near.size() != frame.near.size() || acc.far.size() != frame.far.size())
    throw std::invalid_argument("depth ranges: object count mismatch");
  for (size_t i = 0; i < acc.near.size(); ++i) {
    if (!acc.near[i].same_size(frame.near[i]) || !acc.far[i].same_size(frame.far[i]))
      throw std::invalid_argument("depth ranges: resolution mismatch");
    kernels::max_inplace(acc.near[i].data(), frame.near[i].data(), acc.near[i].size());
    kernels::min_inplace(acc.far[i].data(), frame.far[i].data(), acc.far[i].size());
  }
}

DepthRangeMaps accumulate_depth_ranges(const std::vector<FrameDepthRanges>& frames) {
  DepthRangeMaps acc;
  for (const auto& f : frames) accumulate_into(acc, f);
  return acc;
}

TermAccum depth_order_term(const DepthMap& rendered, const DepthMap& near, const DepthMap& far,
                           const MaskImage& object_mask, const raster::Roi& roi) {
  if (!rendered.same_size(near) || !rendered.same_size(far) || !rendered.same_size(object_mask))
    throw std::invalid_argument("depth order: image sizes differ");
  const raster::Roi r = roi.clipped(rendered.width(), rendered.height());
  TermAccum acc;
  for (int y = r.y0; y < r.y1; ++y) {
    const size_t off = static_cast<size_t>(r.x0);
    const auto h = kernels::depth_hinge(rendered.row(y) + off, near.row(y) + off,
                                        far.row(y) + off, object_mask.row(y) + off,
                                        static_cast<size_t>(r.width()));
    acc.sum += h.sum;
    acc.count += h.count;
  }
  return acc;
}

double depth_order_loss(const raster::Intrinsics& intr, const geom::Mat3& cam_rotation,
                        const std::vector<geom::TriMesh>& posed_objects,
                        const DepthRangeMaps& maps,
                        const std::vector<raster::MaskImage>& object_masks) {
  if (posed_objects.size() != maps.near.size() || posed_objects.size() != object_masks.size())
    throw std::invalid_argument("depth order: object count mismatch");
  TermAccum total;
  std::vector<geom::Vec3> cam_verts;
  for (size_t i = 0; i < posed_objects.size(); ++i) {
    cam_verts.resize(posed_objects[i].vertices.size());
    for (size_t v = 0; v < cam_verts.size(); ++v)
      cam_verts[v] = cam_rotation * posed_objects[i].vertices[v];
    const DepthMap rendered =
        raster::render_depth(cam_verts, posed_objects[i].faces, intr, raster::DepthPass::Front);
    total += depth_order_term(rendered, maps.near[i], maps.far[i], object_masks[i],
                              raster::Roi::full(intr));
  }
  return total.mean();
}

}  // namespace roomfit::hsi
