#include "roomfit/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <stdexcept>

#include "json.hpp"
#include "roomfit/geom/box.hpp"
#include "roomfit/geom/bvh.hpp"
#include "roomfit/parallel.hpp"

namespace roomfit::metrics {

namespace {

std::vector<geom::TriMesh> pose_all(const ScenePlacement& scene) {
  std::vector<geom::TriMesh> posed;
  posed.reserve(scene.canonical.size());
  for (size_t i = 0; i < scene.canonical.size(); ++i)
    posed.push_back(geom::apply_pose(scene.canonical[i], scene.poses[i]));
  return posed;
}

std::vector<geom::TriBvh> build_bvhs(const std::vector<geom::TriMesh>& meshes) {
  std::vector<geom::TriBvh> bvhs;
  bvhs.reserve(meshes.size());
  for (const auto& m : meshes) bvhs.emplace_back(m);
  return bvhs;
}

bool inside_any(const geom::Vec3& p, const std::vector<geom::TriBvh>& objects) {
  for (const auto& bvh : objects)
    if (bvh.bounds().contains(p) && bvh.inside(p)) return true;
  return false;
}

/// Per-body statistics computed in parallel, reduced in body order.
template <typename Fn>
std::vector<double> per_body(const std::vector<geom::TriMesh>& bodies, Fn&& fn) {
  std::vector<double> out(bodies.size(), 0.0);
  parallel_for(int64_t(bodies.size()), [&](int64_t b) { out[b] = fn(bodies[b]); });
  return out;
}

double mean_of(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / double(values.size());
}

}  // namespace

double iou2d(const hsi::PixelBox& a, const hsi::PixelBox& b) {
  if (a.width <= 0.0 || a.height <= 0.0 || b.width <= 0.0 || b.height <= 0.0) return 0.0;
  const double ix = std::min(a.x_min + a.width, b.x_min + b.width) - std::max(a.x_min, b.x_min);
  const double iy = std::min(a.y_min + a.height, b.y_min + b.height) - std::max(a.y_min, b.y_min);
  if (ix <= 0.0 || iy <= 0.0) return 0.0;
  const double inter = ix * iy;
  return inter / (a.width * a.height + b.width * b.height - inter);
}

double non_collision_score(const std::vector<geom::TriMesh>& bodies,
                           const std::vector<geom::TriMesh>& objects) {
  const std::vector<geom::TriBvh> bvhs = build_bvhs(objects);
  const std::vector<double> fractions = per_body(bodies, [&](const geom::TriMesh& body) {
    if (body.vertices.empty()) return 1.0;
    size_t outside = 0;
    for (const auto& v : body.vertices)
      if (!inside_any(v, bvhs)) ++outside;
    return double(outside) / double(body.vertices.size());
  });
  return fractions.empty() ? 1.0 : mean_of(fractions);
}

double contact_score(const std::vector<geom::TriMesh>& bodies,
                     const std::vector<geom::TriMesh>& objects) {
  const std::vector<geom::TriBvh> bvhs = build_bvhs(objects);
  const std::vector<double> touching = per_body(bodies, [&](const geom::TriMesh& body) {
    for (const auto& v : body.vertices)
      if (inside_any(v, bvhs)) return 1.0;
    return 0.0;
  });
  return mean_of(touching);
}

double contact_proximity_score(const std::vector<geom::TriMesh>& bodies,
                               const std::vector<geom::TriMesh>& objects, double radius) {
  if (radius < 0.0) throw std::invalid_argument("contact_proximity_score: negative radius");
  const std::vector<geom::TriBvh> bvhs = build_bvhs(objects);
  const double r_sq = radius * radius;
  const std::vector<double> touching = per_body(bodies, [&](const geom::TriMesh& body) {
    for (const auto& v : body.vertices)
      for (const auto& bvh : bvhs)
        if (bvh.squared_distance(v, r_sq * 4.0 + 1e-9) <= r_sq) return 1.0;
    return 0.0;
  });
  return mean_of(touching);
}

GroundPenetration ground_penetration(const std::vector<body::BodyFrame>& frames, double y_gp,
                                     const geom::Mat3& cam_rotation, double threshold) {
  const geom::Mat3 to_world = cam_rotation.transposed();
  size_t total = 0;
  size_t below = 0;
  double depth_sum = 0.0;
  for (const auto& frame : frames) {
    for (int idx : frame.feet_contacts) {
      const double h = (to_world * frame.mesh.vertices[idx]).y - y_gp;
      ++total;
      if (h < -threshold) {
        ++below;
        depth_sum += std::abs(h);
      }
    }
  }
  if (total == 0) throw std::invalid_argument("ground_penetration: no foot contacts labeled");
  GroundPenetration result;
  result.frequency = double(below) / double(total);
  result.mean_distance = below > 0 ? depth_sum / double(below) : 0.0;
  return result;
}

OrientationError camera_orientation_error(double est_pitch, double est_roll, double gt_pitch,
                                          double gt_roll) {
  OrientationError err;
  err.pitch = std::abs(est_pitch - gt_pitch);
  err.roll = std::abs(est_roll - gt_roll);
  err.mean = 0.5 * (err.pitch + err.roll);
  return err;
}

geom::Mat3 ScenePlacement::cam_rotation() const {
  return geom::Mat3::rot_x(pitch) * geom::Mat3::rot_z(roll);
}

void ScenePlacement::validate() const {
  if (canonical.size() != poses.size() || canonical.size() != categories.size())
    throw std::invalid_argument("ScenePlacement: mismatched object array sizes");
}

namespace {

std::vector<geom::TriMesh> bodies_in_world(const ScenePlacement& estimate,
                                           const std::vector<body::BodyFrame>& frames) {
  const geom::Mat3 to_world = estimate.cam_rotation().transposed();
  std::vector<geom::TriMesh> bodies;
  bodies.reserve(frames.size());
  for (const auto& frame : frames) {
    geom::TriMesh world = frame.mesh;
    for (auto& v : world.vertices) v = to_world * v;
    bodies.push_back(std::move(world));
  }
  return bodies;
}

void fill_body_metrics(SceneReport& report, const ScenePlacement& estimate,
                       const std::vector<body::BodyFrame>& frames) {
  const std::vector<geom::TriMesh> posed = pose_all(estimate);
  const std::vector<geom::TriMesh> bodies = bodies_in_world(estimate, frames);
  report.non_collision = non_collision_score(bodies, posed);
  report.contact = contact_score(bodies, posed);
  report.contact_proximity = contact_proximity_score(bodies, posed);
  report.ground = ground_penetration(frames, estimate.y_gp, estimate.cam_rotation());
}

struct MatchCandidate {
  double iou = 0.0;
  int gt = 0;
  int est = 0;
};

}  // namespace

SceneReport evaluate(const ScenePlacement& estimate, const std::vector<body::BodyFrame>& frames) {
  estimate.validate();
  SceneReport report;
  report.gt_available = false;
  fill_body_metrics(report, estimate, frames);
  return report;
}

SceneReport evaluate(const raster::Intrinsics& intr, const ScenePlacement& estimate,
                     const ScenePlacement& gt, const std::vector<body::BodyFrame>& frames) {
  estimate.validate();
  gt.validate();
  SceneReport report;
  report.gt_available = true;
  fill_body_metrics(report, estimate, frames);

  std::vector<geom::OrientedBox> est_boxes(estimate.canonical.size());
  for (size_t i = 0; i < estimate.canonical.size(); ++i)
    est_boxes[i] = geom::pose_box(estimate.canonical[i].bounds(), estimate.poses[i]);
  std::vector<geom::OrientedBox> gt_boxes(gt.canonical.size());
  for (size_t i = 0; i < gt.canonical.size(); ++i)
    gt_boxes[i] = geom::pose_box(gt.canonical[i].bounds(), gt.poses[i]);

  std::vector<MatchCandidate> candidates;
  for (int g = 0; g < int(gt.canonical.size()); ++g)
    for (int e = 0; e < int(estimate.canonical.size()); ++e)
      if (gt.categories[g] == estimate.categories[e])
        candidates.push_back({geom::oriented_iou3d(gt_boxes[g], est_boxes[e]), g, e});
  std::sort(candidates.begin(), candidates.end(), [](const MatchCandidate& a,
                                                     const MatchCandidate& b) {
    if (a.iou != b.iou) return a.iou > b.iou;
    if (a.gt != b.gt) return a.gt < b.gt;
    return a.est < b.est;
  });

  report.objects.resize(gt.canonical.size());
  for (int g = 0; g < int(gt.canonical.size()); ++g) report.objects[g].gt_index = g;
  std::vector<char> est_taken(estimate.canonical.size(), 0);
  for (const auto& c : candidates) {
    if (report.objects[c.gt].matched || est_taken[c.est]) continue;
    report.objects[c.gt].matched = true;
    report.objects[c.gt].estimate_index = c.est;
    est_taken[c.est] = 1;
  }

  parallel_for(int64_t(report.objects.size()), [&](int64_t g) {
    ObjectScore& score = report.objects[g];
    if (!score.matched) return;
    const int e = score.estimate_index;
    score.iou_3d = geom::oriented_iou3d(gt_boxes[g], est_boxes[e]);

    const auto gt_px = hsi::project_box(intr, gt.cam_rotation(), gt_boxes[g]);
    const auto est_px = hsi::project_box(intr, estimate.cam_rotation(), est_boxes[e]);
    score.iou_2d = (gt_px && est_px) ? iou2d(*gt_px, *est_px) : 0.0;

    const geom::TriMesh gt_posed = geom::apply_pose(gt.canonical[g], gt.poses[g]);
    const geom::TriMesh est_posed = geom::apply_pose(estimate.canonical[e], estimate.poses[e]);
    const geom::TriBvh bvh(est_posed);
    double sum = 0.0;
    for (const auto& v : gt_posed.vertices) sum += std::sqrt(bvh.squared_distance(v));
    score.p2s = gt_posed.vertices.empty() ? 0.0 : sum / double(gt_posed.vertices.size());
  });

  double iou3_sum = 0.0, iou2_sum = 0.0, p2s_sum = 0.0;
  size_t matched = 0;
  for (const auto& score : report.objects) {
    iou3_sum += score.iou_3d;
    iou2_sum += score.iou_2d;
    if (score.matched) {
      p2s_sum += score.p2s;
      ++matched;
    }
  }
  const size_t n = report.objects.size();
  report.mean_iou_3d = n > 0 ? iou3_sum / double(n) : 0.0;
  report.mean_iou_2d = n > 0 ? iou2_sum / double(n) : 0.0;
  report.mean_p2s = matched > 0 ? p2s_sum / double(matched) : 0.0;

  report.orientation =
      camera_orientation_error(estimate.pitch, estimate.roll, gt.pitch, gt.roll);
  return report;
}

std::string SceneReport::to_json() const {
  nlohmann::ordered_json j;
  j["schema_version"] = schema_version;
  j["metadata"] = {{"p2s_query_points", "gt_mesh_vertices"},
                   {"contact_proximity_radius_m", 0.02},
                   {"contact_proximity_note", "auxiliary variant counting near-surface bodies"}};
  j["gt_available"] = gt_available;
  j["non_collision"] = non_collision;
  j["contact"] = contact;
  j["contact_proximity"] = contact_proximity;
  j["ground_penetration"] = {{"frequency", ground.frequency},
                             {"mean_distance_m", ground.mean_distance}};
  if (gt_available) {
    j["mean_iou_3d"] = mean_iou_3d;
    j["mean_iou_2d"] = mean_iou_2d;
    j["mean_p2s_m"] = mean_p2s;
    j["camera_error"] = {
        {"pitch_rad", orientation.pitch}, {"roll_rad", orientation.roll},
        {"mean_rad", orientation.mean}};
    j["objects"] = nlohmann::ordered_json::array();
    for (const auto& score : objects) {
      j["objects"].push_back({{"gt_index", score.gt_index},
                              {"estimate_index", score.estimate_index},
                              {"matched", score.matched},
                              {"iou_3d", score.iou_3d},
                              {"iou_2d", score.iou_2d},
                              {"p2s_m", score.p2s}});
    }
  }
  return j.dump(2) + "\n";
}

std::string SceneReport::to_csv() const {
  std::string out =
      "mean_iou_3d,mean_iou_2d,mean_p2s_m,non_collision,contact,contact_proximity,"
      "ground_pen_freq,ground_pen_dist_m,cam_pitch_err_rad,cam_roll_err_rad,cam_err_mean_rad\n";
  char row[512];
  std::snprintf(row, sizeof(row),
                "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                mean_iou_3d, mean_iou_2d, mean_p2s, non_collision, contact, contact_proximity,
                ground.frequency, ground.mean_distance, orientation.pitch, orientation.roll,
                orientation.mean);
  return out + row;
}

}  // namespace roomfit::metrics
