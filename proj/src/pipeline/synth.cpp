#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>

#include "json.hpp"
#include "roomfit/geom/box.hpp"
#include "roomfit/geom/primitives.hpp"
#include "roomfit/pipeline/pipeline.hpp"
#include "roomfit/raster/edt.hpp"
#include "roomfit/rng.hpp"

namespace roomfit::pipeline {

namespace fs = std::filesystem;
using geom::TriMesh;
using geom::Vec3;
using nlohmann::ordered_json;

namespace {

constexpr double kPi = geom::kPi;
constexpr double kBodyRadius = 0.17;
constexpr double kSeatHover = 0.015;   // capsule bottom above the seat plane
constexpr double kMarkerLift = 0.005;  // contact marker height above the seat
constexpr double kFootLift = 0.001;    // foot markers float just off the ground

struct SynthScene {
  double gt_pitch = 0.0;
  double gt_roll = 0.0;
  double gt_y = 0.0;
  double init_y = 0.0;
  geom::Mat3 rotation;

  std::vector<std::string> ids;
  std::vector<hsi::Category> categories;
  std::vector<TriMesh> canonical;
  std::vector<geom::PoseParams> gt_poses;
  std::vector<geom::PoseParams> init_poses;
  std::vector<raster::MaskImage> masks;
  std::vector<hsi::PixelBox> boxes;

  std::vector<body::BodyFrame> frames;  // camera frame, ready to serialize
  std::vector<raster::MaskImage> person_masks;
  std::vector<int> teleports;
};

// --- furniture -----------------------------------------------------------------

TriMesh make_seat_with_back(const Vec3& seat, double back_height, double back_thickness) {
  TriMesh mesh = geom::make_box_grid(seat, 3, 2, 3);
  TriMesh back = geom::make_box_grid({seat.x, back_height, back_thickness}, 3, 3, 2);
  for (auto& v : back.vertices) v += Vec3{0.0, seat.y, (seat.z - back_thickness) / 2.0};
  geom::append_mesh(mesh, back);
  return mesh;
}

TriMesh make_furniture(hsi::Category category, Rng& rng) {
  const double u = rng.uniform();
  switch (category) {
    case hsi::Category::Chair:
      return make_seat_with_back({0.52 + 0.08 * u, 0.42 + 0.05 * rng.uniform(),
                                  0.5 + 0.06 * rng.uniform()},
                                 0.45 + 0.1 * rng.uniform(), 0.09);
    case hsi::Category::Sofa:
      return make_seat_with_back({1.4 + 0.25 * u, 0.4 + 0.04 * rng.uniform(),
                                  0.68 + 0.08 * rng.uniform()},
                                 0.42 + 0.08 * rng.uniform(), 0.13);
    case hsi::Category::Bed:
      return geom::make_box_grid(
          {1.35 + 0.2 * u, 0.45 + 0.08 * rng.uniform(), 1.7 + 0.25 * rng.uniform()}, 4, 2, 4);
    default:
      return geom::make_box_grid(
          {1.0 + 0.25 * u, 0.62 + 0.12 * rng.uniform(), 0.62 + 0.15 * rng.uniform()}, 3, 2, 3);
  }
}

// xz distance from a point to a yaw-only box footprint, 0 inside
double footprint_distance(const geom::OrientedBox& box, const Vec3& p) {
  const double c = std::cos(box.yaw), s = std::sin(box.yaw);
  const double dx = p.x - box.center.x;
  const double dz = p.z - box.center.z;
  const double lx = c * dx - s * dz;
  const double lz = s * dx + c * dz;
  const double gx = std::max(std::abs(lx) - box.half.x, 0.0);
  const double gz = std::max(std::abs(lz) - box.half.z, 0.0);
  return std::hypot(gx, gz);
}

geom::OrientedBox padded(geom::OrientedBox box, double r) {
  box.half += Vec3{r, r, r};
  return box;
}

// --- trajectory phases ----------------------------------------------------------

struct Phases {
  int walk = 0;   // trapezoidal-speed straight approach
  int fold = 0;   // pelvis drops, legs fold, position held
  int glide = 0;  // seated-height slide onto the seat
  bool sits = false;

  int total_transition() const { return fold + glide; }
};

Phases plan_phases(int frame_count) {
  Phases p;
  p.sits = frame_count >= 40;
  if (p.sits) {
    p.fold = 6;
    p.glide = 9;
    p.walk = frame_count - p.fold - p.glide - frame_count / 4;
  } else {
    p.walk = frame_count;
  }
  return p;
}

// Per-step speeds ramp up over `ramp` steps, cruise, and ramp down, so the
// per-frame acceleration stays a single ramp increment and the outlier filter
// keeps every clean frame.
std::vector<double> walk_fractions(int walk_frames, int ramp) {
  const int steps = walk_frames - 1;
  std::vector<double> speed(steps);
  double sum = 0.0;
  for (int k = 0; k < steps; ++k) {
    speed[k] = std::min({double(k + 1), double(steps - k), double(ramp)});
    sum += speed[k];
  }
  std::vector<double> fractions(walk_frames, 0.0);
  double acc = 0.0;
  for (int k = 0; k < steps; ++k) {
    acc += speed[k] / sum;
    fractions[k + 1] = acc;
  }
  fractions.back() = 1.0;
  return fractions;
}

double cosine_blend(double u) { return 0.5 * (1.0 - std::cos(kPi * u)); }

// --- scene assembly --------------------------------------------------------------

struct BuildInputs {
  const SynthSpec& spec;
  raster::Intrinsics intr;
};

/// One construction attempt; nullopt when placement sampling or any of the
/// ground-truth consistency checks fails.
std::optional<SynthScene> build_scene(const BuildInputs& in, Rng rng) {
  const SynthSpec& spec = in.spec;
  SynthScene scene;
  scene.gt_pitch = rng.uniform(-spec.camera_pitch_range, spec.camera_pitch_range);
  scene.gt_roll = rng.uniform(-spec.camera_roll_range, spec.camera_roll_range);
  scene.gt_y = -1.35 + rng.uniform(-0.05, 0.05);
  scene.init_y = scene.gt_y + rng.uniform(-spec.ground_offset_range, spec.ground_offset_range);
  scene.rotation = geom::Mat3::rot_x(scene.gt_pitch) * geom::Mat3::rot_z(scene.gt_roll);

  const int n = std::clamp(spec.object_count, 1, 5);
  const hsi::Category order[5] = {hsi::Category::Chair, hsi::Category::Table,
                                  hsi::Category::Sofa, hsi::Category::Table,
                                  hsi::Category::Bed};
  for (int i = 0; i < n; ++i) {
    scene.categories.push_back(order[i]);
    scene.ids.push_back(std::string(hsi::to_string(order[i])) + "_" + std::to_string(i));
    scene.canonical.push_back(make_furniture(order[i], rng));
  }

  const auto gt_box = [&](int i) {
    return geom::pose_box(scene.canonical[i].bounds(), scene.gt_poses[i]);
  };
  const auto visible = [&](const geom::OrientedBox& box) {
    const auto px = hsi::project_box(in.intr, scene.rotation, box);
    if (!px) return false;
    const double x0 = std::max(px->x_min, 0.0);
    const double y0 = std::max(px->y_min, 0.0);
    const double x1 = std::min(px->x_min + px->width, double(in.intr.width));
    const double y1 = std::min(px->y_min + px->height, double(in.intr.height));
    if (x1 <= x0 || y1 <= y0) return false;
    return (x1 - x0) * (y1 - y0) >= 0.55 * px->width * px->height;
  };

  // The sitting target goes in a near band; everything else goes behind the
  // deepest body position so the walking body is always the closest surface
  // at shared pixels (the one arrangement where every accumulated depth
  // window is satisfiable by the true scene).
  scene.gt_poses.resize(n);
  bool placed_chair = false;
  for (int attempt = 0; attempt < 60 && !placed_chair; ++attempt) {
    geom::PoseParams pose;
    pose.yaw = rng.uniform(-0.3, 0.3);
    pose.translation = {rng.uniform(-0.8, 0.8), scene.gt_y, rng.uniform(2.5, 3.0)};
    scene.gt_poses[0] = pose;
    placed_chair = visible(gt_box(0));
  }
  if (!placed_chair) return std::nullopt;

  const Vec3 seat_extent = scene.canonical[0].bounds().extent();
  const double seat_h = geom::make_box_grid({1, 1, 1}, 1, 1, 1).bounds().max.y > 0
                            ? scene.canonical[0].bounds().max.y  // placeholder, replaced below
                            : 0.0;
  (void)seat_h;
  // Seat slab height is the lowest top-normal contact band; for the built
  // chairs it equals the seat box's y extent, recovered from the regions.
  const hsi::ContactRegions chair_regions =
      hsi::extract_contact_regions(scene.canonical[0], scene.categories[0]);
  if (chair_regions.seat.empty()) return std::nullopt;
  const double seat_top = scene.canonical[0].vertices[chair_regions.seat.front()].y;
  const double seat_depth = seat_extent.z;

  const geom::PoseParams& chair = scene.gt_poses[0];
  const auto chair_local = [&](double lx, double lz) {
    return geom::pose_point(chair, {lx, 0.0, lz});
  };
  const Vec3 preseat = chair_local(0.0, -(seat_depth / 2.0 + 0.28));
  const Vec3 seat_center = chair_local(0.0, -0.05);
  const double body_z_max = std::max(preseat.z, seat_center.z) + 0.25;

  // walk start on the other side of the room from the chair
  const double start_x = chair.translation.x >= 0.0 ? rng.uniform(-1.7, -1.3)
                                                    : rng.uniform(1.3, 1.7);
  const Vec3 walk_start{start_x, 0.0, 1.2 + rng.uniform(0.0, 0.15)};

  for (int i = 1; i < n; ++i) {
    const double slot_width = (2.0 * spec.room_half) / std::max(1, n - 1);
    const double slot_base = -spec.room_half + slot_width * (i - 1);
    bool placed = false;
    for (int attempt = 0; attempt < 200 && !placed; ++attempt) {
      geom::PoseParams pose;
      pose.yaw = rng.uniform(-kPi, kPi);
      pose.translation = {slot_base + rng.uniform(0.1, slot_width - 0.1), scene.gt_y,
                          rng.uniform(body_z_max + 0.8, 4.9)};
      scene.gt_poses[i] = pose;
      const geom::OrientedBox box = gt_box(i);
      if (!visible(box)) continue;

      double min_z = std::numeric_limits<double>::infinity();
      for (const Vec3& corner : box.corners()) min_z = std::min(min_z, corner.z);
      if (min_z < body_z_max + 0.5) continue;

      bool clear = true;
      for (int k = 0; k < i && clear; ++k)
        clear = geom::oriented_iou3d(padded(box, 0.12), gt_box(k)) == 0.0;
      placed = clear;
    }
    if (!placed) return std::nullopt;
  }

  // --- trajectory -----------------------------------------------------------

  const Phases phases = plan_phases(spec.frame_count);
  if (phases.walk < 8) return std::nullopt;
  const int ramp = std::min(8, phases.walk / 3);
  const std::vector<double> walk_u = walk_fractions(phases.walk, ramp);

  const double stand_pelvis = scene.gt_y + 0.95;
  const double seated_pelvis = scene.gt_y + seat_top + kSeatHover + 0.255;
  const double stand_leg = -0.45;   // capsule axis bottom offset from the pelvis
  const double seated_leg = -0.085;

  std::vector<Vec3> pelvis(spec.frame_count);
  std::vector<double> leg_offset(spec.frame_count, stand_leg);
  for (int t = 0; t < phases.walk; ++t) {
    const double u = walk_u[t];
    pelvis[t] = {walk_start.x + u * (preseat.x - walk_start.x), stand_pelvis,
                 walk_start.z + u * (preseat.z - walk_start.z)};
  }
  for (int t = phases.walk; t < spec.frame_count && phases.sits; ++t) {
    const int k = t - phases.walk;
    if (k < phases.fold) {
      const double u = cosine_blend(double(k + 1) / phases.fold);
      pelvis[t] = {preseat.x, stand_pelvis + u * (seated_pelvis - stand_pelvis), preseat.z};
      leg_offset[t] = stand_leg + u * (seated_leg - stand_leg);
    } else if (k < phases.fold + phases.glide) {
      const double u = cosine_blend(double(k + 1 - phases.fold) / phases.glide);
      pelvis[t] = {preseat.x + u * (seat_center.x - preseat.x), seated_pelvis,
                   preseat.z + u * (seat_center.z - preseat.z)};
      leg_offset[t] = seated_leg;
    } else {
      pelvis[t] = {seat_center.x, seated_pelvis, seat_center.z};
      leg_offset[t] = seated_leg;
    }
  }

  // teleports go into zero-acceleration cruise frames, displaced by less than
  // the pelvis threshold so the central second difference trips only at the
  // displaced frame itself
  if (spec.teleport_count > 0) {
    std::vector<int> cruise;
    for (int t = ramp + 2; t <= phases.walk - 3 - ramp; ++t) cruise.push_back(t);
    const int needed = spec.teleport_count;
    if (int(cruise.size()) < 3 * needed - 2) return std::nullopt;
    const int stride = std::max<int>(3, cruise.size() / needed);
    for (int k = 0; k < needed; ++k) scene.teleports.push_back(cruise[k * stride]);
  }

  // --- per-frame bodies -------------------------------------------------------

  const int sit_start = phases.walk + phases.total_transition();
  std::vector<Vec3> seat_markers;
  if (phases.sits) {
    const std::vector<int>& anchor_pool =
        chair_regions.back.empty() ? chair_regions.seat : chair_regions.back;
    const int picks[3] = {0, int(anchor_pool.size()) / 2, int(anchor_pool.size()) - 1};
    for (int p : picks) {
      const Vec3 v = scene.canonical[0].vertices[anchor_pool[p]];
      const double behind = chair_regions.back.empty() ? 0.0 : 0.002;
      seat_markers.push_back(
          geom::pose_point(chair, {v.x, seat_top + kMarkerLift, v.z + behind}));
      seat_markers.back().y = scene.gt_y + seat_top + kMarkerLift;
    }
  }

  const double tele_shift = 0.75 * Thresholds{}.tau_pelvis;
  for (int t = 0; t < spec.frame_count; ++t) {
    const Vec3& p = pelvis[t];
    Vec3 shift{0, 0, 0};
    for (size_t k = 0; k < scene.teleports.size(); ++k)
      if (scene.teleports[k] == t) shift.x = (k % 2 == 0 ? tele_shift : -tele_shift);

    body::BodyFrame frame;
    frame.timestamp = t;
    TriMesh capsule = geom::make_capsule(p + Vec3{0, leg_offset[t], 0} + shift,
                                         p + Vec3{0, 0.55, 0} + shift, kBodyRadius);
    frame.mesh = std::move(capsule);

    const bool planted = t >= phases.walk && phases.sits;
    const Vec3 feet_anchor = planted ? preseat : p;
    const int base = int(frame.mesh.vertices.size());
    frame.mesh.vertices.push_back(Vec3{feet_anchor.x - 0.09, scene.gt_y + kFootLift,
                                       feet_anchor.z} + shift);
    frame.mesh.vertices.push_back(Vec3{feet_anchor.x + 0.09, scene.gt_y + kFootLift,
                                       feet_anchor.z} + shift);
    frame.feet_contacts = {base, base + 1};
    if (t >= sit_start && phases.sits) {
      for (const Vec3& m : seat_markers) {
        frame.body_contacts.push_back(int(frame.mesh.vertices.size()));
        frame.mesh.vertices.push_back(m + shift);
      }
    }

    frame.joints = {p + shift, p + Vec3{0, 0.55, 0} + shift,
                    p + Vec3{-0.1, -0.85, 0} + shift, p + Vec3{0.1, -0.85, 0} + shift};
    frame.joints_observed = frame.joints;

    // world to camera
    for (auto& v : frame.mesh.vertices) v = scene.rotation * v;
    for (auto& j : frame.joints) j = scene.rotation * j;
    frame.joints_observed = frame.joints;
    scene.frames.push_back(std::move(frame));
  }

  // --- renders -----------------------------------------------------------------

  std::vector<TriMesh> posed;
  raster::DepthMap scene_depth = raster::make_depth_map(in.intr.width, in.intr.height);
  for (int i = 0; i < n; ++i) {
    TriMesh world = geom::apply_pose(scene.canonical[i], scene.gt_poses[i]);
    for (auto& v : world.vertices) v = scene.rotation * v;
    raster::render_depth_into(world.vertices, world.faces, in.intr, raster::DepthPass::Front,
                              scene_depth, raster::Roi::full(in.intr));
    scene.masks.push_back(raster::render_silhouette(world.vertices, world.faces, in.intr));
    const auto box = hsi::project_box(in.intr, scene.rotation, gt_box(i));
    if (!box) return std::nullopt;
    scene.boxes.push_back(*box);
    posed.push_back(geom::apply_pose(scene.canonical[i], scene.gt_poses[i]));
  }

  for (size_t q = 0; q < scene.masks[0].size(); ++q) {
    if (!scene.masks[0].data()[q]) continue;
    for (int i = 1; i < n; ++i)
      if (scene.masks[i].data()[q]) return std::nullopt;  // chair band must stay clear
  }
  for (const auto& mask : scene.masks) {
    int64_t set = 0;
    for (size_t q = 0; q < mask.size(); ++q) set += mask.data()[q];
    if (set < 250) return std::nullopt;
  }

  for (const auto& frame : scene.frames) {
    const raster::DepthMap body = raster::render_depth(frame.mesh.vertices, frame.mesh.faces,
                                                       in.intr, raster::DepthPass::Front);
    raster::MaskImage person(in.intr.width, in.intr.height, 0);
    for (size_t q = 0; q < person.size(); ++q) {
      const float d = body.data()[q];
      person.data()[q] = std::isfinite(d) && d < scene_depth.data()[q] ? 1 : 0;
    }
    scene.person_masks.push_back(std::move(person));
  }

  // --- ground truth consistency ---------------------------------------------------

  const Thresholds thresholds;
  body::TrajectoryFilterConfig filter{thresholds.tau_pelvis, thresholds.tau_local};
  const std::vector<int> retained = body::filter_outlier_frames(scene.frames, filter);
  {
    std::vector<int> dropped;
    size_t r = 0;
    for (int t = 0; t < spec.frame_count; ++t) {
      if (r < retained.size() && retained[r] == t)
        ++r;
      else
        dropped.push_back(t);
    }
    if (dropped != scene.teleports) return std::nullopt;
  }

  hsi::DepthRangeMaps maps;
  std::vector<TriMesh> world_bodies;
  std::vector<body::BodyFrame> retained_frames;
  const geom::Mat3 cam_to_world = scene.rotation.transposed();
  for (int t : retained) {
    hsi::accumulate_into(maps, hsi::frame_depth_ranges(in.intr, scene.frames[t].mesh,
                                                       scene.person_masks[t], scene.masks));
    world_bodies.push_back(scene.frames[t].mesh);
    for (auto& v : world_bodies.back().vertices) v = cam_to_world * v;
    retained_frames.push_back(scene.frames[t]);
  }
  if (hsi::depth_order_loss(in.intr, scene.rotation, posed, maps, scene.masks) != 0.0)
    return std::nullopt;

  const sdf::SdfVolume body_sdf =
      sdf::accumulate_body_sdf(world_bodies, spec.sdf_resolution, RunConfig{}.sdf.padding);
  if (hsi::collision_loss(posed, body_sdf) != 0.0) return std::nullopt;

  if (metrics::ground_penetration(retained_frames, scene.gt_y, scene.rotation).frequency != 0.0)
    return std::nullopt;

  if (phases.sits) {
    std::vector<raster::MaskImage> dilated;
    std::vector<hsi::ContactRegions> regions;
    for (int i = 0; i < n; ++i) {
      dilated.push_back(raster::dilate(scene.masks[i], thresholds.dilation_px));
      regions.push_back(hsi::extract_contact_regions(scene.canonical[i], scene.categories[i]));
    }
    std::vector<std::vector<Vec3>> contact_verts;
    for (const auto& frame : retained_frames) {
      std::vector<Vec3> verts;
      for (int idx : frame.body_contacts) verts.push_back(frame.mesh.vertices[idx]);
      contact_verts.push_back(std::move(verts));
    }
    const hsi::ContactAssignment assignment =
        hsi::assign_contacts(in.intr, contact_verts, scene.rotation, dilated, posed,
                             thresholds.assign_radius);
    if (assignment.assigned_count() == 0) return std::nullopt;
    const auto points = hsi::group_contact_points(assignment, contact_verts, scene.rotation, n);
    if (hsi::contact_loss(points, posed, regions) >= 0.01) return std::nullopt;
  }

  // --- perturbed initial estimates ------------------------------------------------

  for (int i = 0; i < n; ++i) {
    geom::PoseParams init = scene.gt_poses[i];
    init.translation.x += rng.uniform(-spec.perturb_translation, spec.perturb_translation);
    init.translation.z += rng.uniform(-spec.perturb_translation, spec.perturb_translation);
    init.translation.y = scene.init_y;
    init.yaw += rng.uniform(-spec.perturb_yaw, spec.perturb_yaw);
    init.scale = {1.0 + rng.uniform(-spec.perturb_scale, spec.perturb_scale),
                  1.0 + rng.uniform(-spec.perturb_scale, spec.perturb_scale),
                  1.0 + rng.uniform(-spec.perturb_scale, spec.perturb_scale)};
    scene.init_poses.push_back(init);
  }
  return scene;
}

std::string frame_stem(int t) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d", t);
  return buf;
}

void write_frame_data(const std::string& path, const body::BodyFrame& frame) {
  ordered_json j;
  j["joints"] = ordered_json::array();
  for (const auto& v : frame.joints) j["joints"].push_back({v.x, v.y, v.z});
  j["feet_contacts"] = frame.feet_contacts;
  j["body_contacts"] = frame.body_contacts;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("synth: cannot write '" + path + "'");
  out << j.dump(2) << "\n";
}

}  // namespace

void synth_generate(const SynthSpec& spec, const std::string& out_dir) {
  spec.validate();
  BuildInputs in{spec, {}};
  in.intr.fx = spec.focal;
  in.intr.fy = spec.focal;
  in.intr.cx = spec.image_width / 2.0;
  in.intr.cy = spec.image_height / 2.0;
  in.intr.width = spec.image_width;
  in.intr.height = spec.image_height;

  Rng master(spec.seed);
  std::optional<SynthScene> scene;
  for (int attempt = 0; attempt < 100 && !scene; ++attempt)
    scene = build_scene(in, Rng(master.next_u64()));
  if (!scene)
    throw std::runtime_error("synth: no consistent scene found within 100 attempts");

  fs::create_directories(out_dir + "/meshes");
  fs::create_directories(out_dir + "/masks");
  fs::create_directories(out_dir + "/frames");

  SceneManifest manifest;
  manifest.intr = in.intr;
  manifest.init_pitch = 0.0;
  manifest.init_roll = 0.0;
  manifest.init_y_gp = scene->init_y;
  manifest.init_frame = 0;

  GroundTruth gt;
  gt.pitch = scene->gt_pitch;
  gt.roll = scene->gt_roll;
  gt.y_gp = scene->gt_y;
  gt.teleport_frames = scene->teleports;

  const int n = int(scene->canonical.size());
  for (int i = 0; i < n; ++i) {
    const std::string mesh_rel = "meshes/" + scene->ids[i] + ".obj";
    const std::string mask_rel = "masks/" + scene->ids[i] + ".pgm";
    geom::save_obj(scene->canonical[i], out_dir + "/" + mesh_rel);
    raster::save_pgm(out_dir + "/" + mask_rel, scene->masks[i]);

    ManifestObject obj;
    obj.id = scene->ids[i];
    obj.mesh_path = mesh_rel;
    obj.category = scene->categories[i];
    obj.init_pose = scene->init_poses[i];
    obj.detected_box = scene->boxes[i];
    obj.mask_path = mask_rel;
    manifest.objects.push_back(std::move(obj));

    GroundTruthObject gto;
    gto.id = scene->ids[i];
    gto.category = scene->categories[i];
    gto.mesh_path = mesh_rel;
    gto.pose = scene->gt_poses[i];
    gt.objects.push_back(std::move(gto));
  }

  for (int t = 0; t < spec.frame_count; ++t) {
    const std::string stem = frame_stem(t);
    const body::BodyFrame& frame = scene->frames[t];
    geom::save_obj(frame.mesh, out_dir + "/frames/body_" + stem + ".obj");
    write_frame_data(out_dir + "/frames/data_" + stem + ".json", frame);
    raster::save_pgm(out_dir + "/frames/person_" + stem + ".pgm", scene->person_masks[t]);

    ManifestFrame mf;
    mf.timestamp = t;
    mf.body_path = "frames/body_" + stem + ".obj";
    mf.data_path = "frames/data_" + stem + ".json";
    mf.person_mask_path = "frames/person_" + stem + ".pgm";
    manifest.frames.push_back(std::move(mf));
  }

  save_manifest(manifest, out_dir + "/manifest.json");
  save_ground_truth(gt, out_dir + "/gt.json");

  RunConfig config;
  config.manifest_path = "manifest.json";
  config.gt_path = "gt.json";
  config.output_dir = "out";
  config.seed = spec.seed;
  config.sdf.resolution = spec.sdf_resolution;
  save_run_config(config, out_dir + "/run.json");
}

}  // namespace roomfit::pipeline
