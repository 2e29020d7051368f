#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "roomfit/geom/box.hpp"
#include "roomfit/kernels/kernels.hpp"
#include "roomfit/optim/optim.hpp"

namespace roomfit::optim {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(std::string("eval context: ") + what);
}

void check_mask_sizes(const std::vector<raster::MaskImage>& masks, const raster::Intrinsics& intr,
                      const char* what) {
  for (const auto& m : masks)
    require(m.width() == intr.width && m.height() == intr.height, what);
}

}  // namespace

void EvalContext::validate(const StageConfig& cfg) const {
  intr.validate();
  const size_t n = canonical.size();
  require(canonical_bounds.size() == n, "one bounding box per object required");
  require(regions.size() == n, "one contact-region set per object required");
  require(init_scales.size() == n, "one initial scale per object required");
  require(object_masks.size() == n, "one detected mask per object required");
  require(ignore_masks.size() == n, "one ignore mask per object required");
  require(detected_boxes.size() == n, "one detected box per object required");
  require(contact_points.size() == n, "one contact-point set per object required");
  check_mask_sizes(object_masks, intr, "detected mask resolution mismatch");
  check_mask_sizes(ignore_masks, intr, "ignore mask resolution mismatch");
  for (const auto& s : init_scales)
    require(s.x > 0.0 && s.y > 0.0 && s.z > 0.0, "initial scales must be positive");
  if (cfg.weights.depth > 0.0) {
    require(depth_maps.near.size() == n && depth_maps.far.size() == n,
            "depth-range maps required for the depth term");
    for (const auto& img : depth_maps.near)
      require(img.width() == intr.width && img.height() == intr.height,
              "depth-range resolution mismatch");
  }
  if (cfg.weights.collision > 0.0) require(body_sdf != nullptr, "body SDF required");
  if (cfg.feet_weight > 0.0) require(frames != nullptr, "body frames required for the feet term");
}

LossEvaluator::LossEvaluator(const EvalContext& ctx, const StageConfig& cfg)
    : ctx_(ctx), cfg_(cfg) {
  cfg_.validate();
  layout_.object_count = static_cast<int>(ctx.canonical.size());
  ctx_.validate(cfg_);
  active_ = active_mask(layout_, cfg_.id);
  cache_.resize(ctx.canonical.size());

  const size_t n = ctx.canonical.size();
  target_float_.reserve(n);
  occ_count_.assign(n, 0);
  occ_target_sq_.assign(n, 0.0);
  const std::vector<float> zeros(ctx.intr.width, 0.0f);
  for (size_t i = 0; i < n; ++i) {
    target_float_.push_back(raster::to_float(ctx.object_masks[i]));
    for (int y = 0; y < ctx.intr.height; ++y) {
      const auto mass = kernels::masked_sq_diff(zeros.data(), target_float_[i].row(y),
                                                ctx.ignore_masks[i].row(y),
                                                static_cast<size_t>(ctx.intr.width));
      occ_count_[i] += mass.count;
      occ_target_sq_[i] += mass.sum;
    }
  }
}

double LossEvaluator::probe_step(int param) const {
  if (layout_.owner(param) >= 0) {
    switch (param % 7) {
      case 0:
      case 1:
      case 2: return 1e-4;  // log-scale
      case 3: return 1e-3;  // yaw, radians
      default: return 1e-3;  // translation, meters
    }
  }
  return 1e-3;  // pitch/roll radians, ground height meters
}

namespace {

raster::Roi roi_for_box(const raster::Intrinsics& intr, const geom::Mat3& rotation,
                        const geom::OrientedBox& box) {
  double u0 = std::numeric_limits<double>::infinity(), v0 = u0;
  double u1 = -u0, v1 = -u0;
  for (const auto& corner : box.corners()) {
    const auto p = raster::project_camera_point(intr, rotation * corner);
    if (!p.valid) return raster::Roi::full(intr);  // clipping may spread coverage anywhere
    u0 = std::min(u0, p.u);
    u1 = std::max(u1, p.u);
    v0 = std::min(v0, p.v);
    v1 = std::max(v1, p.v);
  }
  // the mesh lies inside the box, so its projection lies inside the corner
  // hull; pad the window to be safe against edge rounding
  const raster::Roi roi{static_cast<int>(std::floor(u0)) - 2, static_cast<int>(std::floor(v0)) - 2,
                        static_cast<int>(std::ceil(u1)) + 3, static_cast<int>(std::ceil(v1)) + 3};
  return roi.clipped(intr.width, intr.height);
}

}  // namespace

LossEvaluator::ObjectAccums LossEvaluator::evaluate_object(const SceneParams& scene,
                                                           int obj) const {
  ObjectAccums acc;
  const geom::PoseParams& pose = scene.objects[obj];
  const geom::TriMesh& mesh = ctx_.canonical[obj];
  const bool need_raster = cfg_.weights.occ_sil > 0.0 || cfg_.weights.depth > 0.0;
  const bool need_world =
      need_raster || cfg_.weights.collision > 0.0 || cfg_.weights.contact > 0.0;

  std::vector<geom::Vec3> world;
  if (need_world) {
    world.resize(mesh.vertices.size());
    geom::pose_points(pose, mesh.vertices, world);
  }

  if (cfg_.weights.scale > 0.0) {
    const geom::Vec3& s0 = ctx_.init_scales[obj];
    const geom::Vec3 r{pose.scale.x / s0.x - 1.0, pose.scale.y / s0.y - 1.0,
                       pose.scale.z / s0.z - 1.0};
    acc.scale_norm = r.norm();
  }

  const geom::OrientedBox box = geom::pose_box(ctx_.canonical_bounds[obj], pose);
  if (cfg_.weights.bbox > 0.0) {
    if (const auto px = hsi::project_box(ctx_.intr, ctx_.cam_rotation, box)) {
      const hsi::PixelBox& det = ctx_.detected_boxes[obj];
      acc.bbox_sum = (std::abs(px->x_min - det.x_min) + std::abs(px->y_min - det.y_min) +
                      std::abs(px->width - det.width)) /
                     static_cast<double>(ctx_.intr.width);
    }
  }

  if (need_raster) {
    std::vector<geom::Vec3> cam(world.size());
    for (size_t i = 0; i < world.size(); ++i) cam[i] = ctx_.cam_rotation * world[i];
    const raster::Roi roi = roi_for_box(ctx_.intr, ctx_.cam_rotation, box);
    raster::DepthMap depth = raster::make_depth_map(ctx_.intr.width, ctx_.intr.height);
    raster::render_depth_into(cam, mesh.faces, ctx_.intr, raster::DepthPass::Front, depth, roi);

    if (cfg_.weights.occ_sil > 0.0) {
      const int width = roi.x1 - roi.x0;
      double window_sq = 0.0;
      double window_target_sq = 0.0;
      std::vector<float> cover(std::max(width, 0), 0.0f);
      const std::vector<float> zeros(std::max(width, 0), 0.0f);
      for (int y = roi.y0; y < roi.y1; ++y) {
        const float* drow = depth.row(y) + roi.x0;
        for (int x = 0; x < width; ++x) cover[x] = std::isfinite(drow[x]) ? 1.0f : 0.0f;
        const float* trow = target_float_[obj].row(y) + roi.x0;
        const uint8_t* irow = ctx_.ignore_masks[obj].row(y) + roi.x0;
        window_sq += kernels::masked_sq_diff(cover.data(), trow, irow, width).sum;
        window_target_sq += kernels::masked_sq_diff(zeros.data(), trow, irow, width).sum;
      }
      // outside the window the silhouette is empty: every unmatched target
      // pixel contributes exactly its own mass
      acc.occ_sil.sum = window_sq + (occ_target_sq_[obj] - window_target_sq);
      acc.occ_sil.count = occ_count_[obj];
    }

    if (cfg_.weights.depth > 0.0)
      acc.depth = hsi::depth_order_term(depth, ctx_.depth_maps.near[obj],
                                        ctx_.depth_maps.far[obj], ctx_.object_masks[obj], roi);
  }

  if (cfg_.weights.collision > 0.0) acc.collision = hsi::collision_term(world, *ctx_.body_sdf);

  if (cfg_.weights.contact > 0.0)
    acc.contact = hsi::contact_term(ctx_.contact_points[obj], world, ctx_.regions[obj]);

  return acc;
}

TermBreakdown LossEvaluator::combine(const SceneParams& scene,
                                     const std::vector<ObjectAccums>& accums) const {
  hsi::TermAccum occ, dep, col, con;
  double bbox = 0.0, scale = 0.0;
  for (const auto& acc : accums) {
    occ += acc.occ_sil;
    dep += acc.depth;
    col += acc.collision;
    con += acc.contact;
    bbox += acc.bbox_sum;
    scale += acc.scale_norm;
  }
  TermBreakdown bd;
  bd.terms.bbox = bbox;
  bd.terms.occ_sil = occ.mean();
  bd.terms.scale = scale;
  bd.terms.depth = dep.mean();
  bd.terms.collision = col.mean();
  bd.terms.contact = con.mean();
  if (cfg_.feet_weight > 0.0)
    bd.feet = body::feet_loss(scene.pitch, scene.roll, scene.y_gp, *ctx_.frames);
  bd.total = hsi::total_loss(bd.terms, cfg_.weights) + cfg_.feet_weight * bd.feet;
  return bd;
}

TermBreakdown LossEvaluator::evaluate(const std::vector<double>& params) {
  const SceneParams scene = unpack_params(layout_, params);
  for (int obj = 0; obj < layout_.object_count; ++obj)
    cache_[obj] = evaluate_object(scene, obj);
  const TermBreakdown bd = combine(scene, cache_);

  const struct {
    const char* name;
    double value;
  } checks[] = {{"bbox", bd.terms.bbox},         {"occ_sil", bd.terms.occ_sil},
                {"scale", bd.terms.scale},       {"depth", bd.terms.depth},
                {"collision", bd.terms.collision}, {"contact", bd.terms.contact},
                {"feet", bd.feet}};
  for (const auto& c : checks)
    if (!std::isfinite(c.value))
      throw std::runtime_error(std::string("total_loss: non-finite ") + c.name + " term");
  last_ = bd;
  return bd;
}

double LossEvaluator::probe(const std::vector<double>& params, int moved_param) const {
  const SceneParams scene = unpack_params(layout_, params);
  const int owner = layout_.owner(moved_param);
  if (owner < 0) return combine(scene, cache_).total;
  std::vector<ObjectAccums> accums = cache_;
  accums[owner] = evaluate_object(scene, owner);
  return combine(scene, accums).total;
}

std::vector<double> LossEvaluator::gradient(const std::vector<double>& params,
                                            double step_scale) {
  if (!(step_scale > 0.0)) throw std::invalid_argument("gradient: step scale must be positive");
  evaluate(params);
  std::vector<double> steps(params.size(), 0.0);
  for (size_t i = 0; i < params.size(); ++i)
    steps[i] = probe_step(static_cast<int>(i)) * step_scale;
  return central_differences(
      [this](const std::vector<double>& p, int coord) { return probe(p, coord); }, params, steps,
      active_);
}

}  // namespace roomfit::optim
