#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "roomfit/pipeline/pipeline.hpp"

namespace roomfit::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

json parse_file(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument(std::string(what) + ": cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string(what) + ": '" + path + "' is not valid JSON: " +
                                e.what());
  }
  return j;
}

// --- content hashing ---------------------------------------------------------

/// FNV-1a over raw bytes. Keys every cached artifact, so any input change
/// lands in a fresh cache directory instead of invalidating in place.
struct Fnv {
  uint64_t h = 1469598103934665603ULL;

  void bytes(const void* data, size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 1099511628211ULL;
    }
  }
  void f64(double v) { bytes(&v, sizeof v); }
  void i64(int64_t v) { bytes(&v, sizeof v); }
  void str(const std::string& s) {
    i64(static_cast<int64_t>(s.size()));
    bytes(s.data(), s.size());
  }
  void vec3(const geom::Vec3& v) {
    f64(v.x);
    f64(v.y);
    f64(v.z);
  }
  void mesh(const geom::TriMesh& m) {
    i64(static_cast<int64_t>(m.vertices.size()));
    for (const auto& v : m.vertices) vec3(v);
    i64(static_cast<int64_t>(m.faces.size()));
    for (const auto& f : m.faces) {
      i64(f[0]);
      i64(f[1]);
      i64(f[2]);
    }
  }
  void mask(const raster::MaskImage& m) {
    i64(m.width());
    i64(m.height());
    bytes(m.data(), m.size());
  }

  std::string hex() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
  }
};

Fnv hash_inputs(const RunContext& ctx) {
  Fnv f;
  const Thresholds& t = ctx.config.thresholds;
  f.f64(t.tau_pelvis);
  f.f64(t.tau_local);
  f.f64(t.dilation_px);
  f.f64(t.smooth_lambda);
  f.f64(ctx.intr.fx);
  f.f64(ctx.intr.fy);
  f.f64(ctx.intr.cx);
  f.f64(ctx.intr.cy);
  f.i64(ctx.intr.width);
  f.i64(ctx.intr.height);
  f.i64(ctx.manifest.init_frame);
  for (size_t i = 0; i < ctx.canonical.size(); ++i) {
    f.mesh(ctx.canonical[i]);
    f.mask(ctx.object_masks[i]);
  }
  for (size_t t_idx = 0; t_idx < ctx.frames.size(); ++t_idx) {
    const body::BodyFrame& fr = ctx.frames[t_idx];
    f.i64(fr.timestamp);
    f.mesh(fr.mesh);
    f.i64(static_cast<int64_t>(fr.joints.size()));
    for (const auto& j : fr.joints) f.vec3(j);
    for (int idx : fr.feet_contacts) f.i64(idx);
    for (int idx : fr.body_contacts) f.i64(idx);
    f.mask(ctx.person_masks[t_idx]);
  }
  return f;
}

// --- frame data files ---------------------------------------------------------

geom::Vec3 vec3_from_json(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3)
    throw std::invalid_argument("frame data: '" + path + "' joint entries must be [x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

void load_frame_data(const std::string& path, body::BodyFrame& frame) {
  const json j = parse_file(path, "frame data");
  if (!j.contains("joints"))
    throw std::invalid_argument("frame data: '" + path + "' is missing 'joints'");
  for (const json& joint : j.at("joints")) frame.joints.push_back(vec3_from_json(joint, path));
  frame.joints_observed = frame.joints;
  if (j.contains("feet_contacts"))
    frame.feet_contacts = j.at("feet_contacts").get<std::vector<int>>();
  if (j.contains("body_contacts"))
    frame.body_contacts = j.at("body_contacts").get<std::vector<int>>();
}

// --- cache artifact layout -----------------------------------------------------

std::string mask_path(const std::string& dir, const char* stem, size_t i) {
  return dir + "/" + stem + "_" + std::to_string(i) + ".pgm";
}

std::string depth_path(const std::string& dir, const char* stem, size_t i) {
  return dir + "/" + stem + "_" + std::to_string(i) + ".pfm";
}

void save_precompute_cache(const RunContext& ctx, const std::string& dir) {
  fs::create_directories(dir);
  for (size_t i = 0; i < ctx.object_masks.size(); ++i) {
    raster::save_pfm(depth_path(dir, "near", i), ctx.depth_maps.near[i]);
    raster::save_pfm(depth_path(dir, "far", i), ctx.depth_maps.far[i]);
    raster::save_pgm(mask_path(dir, "dilated", i), ctx.dilated_masks[i]);
    raster::save_pgm(mask_path(dir, "ignore", i), ctx.ignore_masks[i]);
  }
  ordered_json j;
  j["retained"] = ctx.retained;
  j["joints"] = ordered_json::array();
  for (int t : ctx.retained) {
    ordered_json frame = ordered_json::array();
    for (const auto& v : ctx.frames[t].joints) frame.push_back({v.x, v.y, v.z});
    j["joints"].push_back(std::move(frame));
  }
  std::ofstream out(dir + "/retained.json", std::ios::binary);
  if (!out) throw std::runtime_error("precompute: cannot write cache under '" + dir + "'");
  out << j.dump(2) << "\n";
}

bool load_precompute_cache(RunContext& ctx, const std::string& dir) {
  std::ifstream marker(dir + "/retained.json");
  if (!marker) return false;
  json j;
  marker >> j;
  ctx.retained = j.at("retained").get<std::vector<int>>();
  const json& joints = j.at("joints");
  for (size_t k = 0; k < ctx.retained.size(); ++k) {
    auto& frame = ctx.frames[ctx.retained[k]];
    frame.joints.clear();
    for (const json& v : joints[k]) frame.joints.push_back(vec3_from_json(v, dir));
  }
  ctx.depth_maps = hsi::DepthRangeMaps{};
  ctx.dilated_masks.clear();
  ctx.ignore_masks.clear();
  for (size_t i = 0; i < ctx.object_masks.size(); ++i) {
    ctx.depth_maps.near.push_back(raster::load_pfm(depth_path(dir, "near", i)));
    ctx.depth_maps.far.push_back(raster::load_pfm(depth_path(dir, "far", i)));
    ctx.dilated_masks.push_back(raster::load_pgm(mask_path(dir, "dilated", i)));
    ctx.ignore_masks.push_back(raster::load_pgm(mask_path(dir, "ignore", i)));
  }
  return true;
}

geom::TriMesh to_world(const geom::TriMesh& cam_mesh, const geom::Mat3& cam_to_world) {
  geom::TriMesh out;
  out.vertices.reserve(cam_mesh.vertices.size());
  for (const auto& v : cam_mesh.vertices) out.vertices.push_back(cam_to_world * v);
  out.faces = cam_mesh.faces;
  return out;
}

}  // namespace

std::string RunContext::cache_dir() const {
  if (const char* env = std::getenv("ROOMFIT_CACHE_DIR"); env && *env) return env;
  if (!config.cache_dir.empty()) return config.cache_dir;
  return config.output_dir + "/cache";
}

std::vector<body::BodyFrame> RunContext::retained_frames() const {
  std::vector<body::BodyFrame> out;
  out.reserve(retained.size());
  for (int t : retained) out.push_back(frames[t]);
  return out;
}

RunContext load_run(const std::string& config_path) {
  RunContext ctx;
  ctx.config = load_run_config(config_path);
  ctx.manifest = load_manifest(ctx.config.manifest_path);
  ctx.intr = ctx.manifest.intr;

  for (const ManifestObject& obj : ctx.manifest.objects) {
    geom::TriMesh mesh = geom::load_obj(obj.mesh_path);
    const geom::WatertightReport report = geom::validate_watertight(mesh);
    if (!report.watertight())
      throw std::invalid_argument(
          "object '" + obj.id + "': mesh '" + obj.mesh_path + "' is not watertight (" +
          std::to_string(report.boundary_edges.size()) + " boundary, " +
          std::to_string(report.nonmanifold_edges.size()) + " non-manifold edges)");
    ctx.regions.push_back(hsi::extract_contact_regions(mesh, obj.category));
    ctx.canonical.push_back(std::move(mesh));

    raster::MaskImage mask = raster::load_pgm(obj.mask_path);
    if (!mask.same_size(ctx.intr.width, ctx.intr.height))
      throw std::invalid_argument(
          "object '" + obj.id + "': mask '" + obj.mask_path + "' is " +
          std::to_string(mask.width()) + "x" + std::to_string(mask.height()) + ", camera is " +
          std::to_string(ctx.intr.width) + "x" + std::to_string(ctx.intr.height));
    ctx.object_masks.push_back(std::move(mask));

    const hsi::PixelBox& box = obj.detected_box;
    if (!std::isfinite(box.x_min) || !std::isfinite(box.y_min) || !(box.width > 0.0) ||
        !(box.height > 0.0))
      throw std::invalid_argument("object '" + obj.id + "': detected box is malformed");
  }

  for (const ManifestFrame& mf : ctx.manifest.frames) {
    body::BodyFrame frame;
    frame.timestamp = mf.timestamp;
    frame.mesh = geom::load_obj(mf.body_path);
    load_frame_data(mf.data_path, frame);
    try {
      frame.validate();
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("frame data '" + mf.data_path + "': " + e.what());
    }
    ctx.frames.push_back(std::move(frame));

    raster::MaskImage mask = raster::load_pgm(mf.person_mask_path);
    if (!mask.same_size(ctx.intr.width, ctx.intr.height))
      throw std::invalid_argument("person mask '" + mf.person_mask_path + "' is " +
                                  std::to_string(mask.width()) + "x" +
                                  std::to_string(mask.height()) + ", camera is " +
                                  std::to_string(ctx.intr.width) + "x" +
                                  std::to_string(ctx.intr.height));
    ctx.person_masks.push_back(std::move(mask));
  }

  if (!ctx.config.gt_path.empty()) {
    ctx.gt = load_ground_truth(ctx.config.gt_path);
    for (const GroundTruthObject& obj : ctx.gt->objects) {
      geom::TriMesh mesh = geom::load_obj(obj.mesh_path);
      const geom::WatertightReport report = geom::validate_watertight(mesh);
      if (!report.watertight())
        throw std::invalid_argument("ground truth object '" + obj.id + "': mesh '" +
                                    obj.mesh_path + "' is not watertight");
      ctx.gt_canonical.push_back(std::move(mesh));
    }
  }
  return ctx;
}

void precompute(RunContext& ctx) {
  if (ctx.precomputed) return;

  Fnv key = hash_inputs(ctx);
  key.str("precompute-v1");
  const std::string dir = ctx.cache_dir() + "/pre_" + key.hex();

  if (!load_precompute_cache(ctx, dir)) {
    body::TrajectoryFilterConfig filter;
    filter.tau_pelvis = ctx.config.thresholds.tau_pelvis;
    filter.tau_local = ctx.config.thresholds.tau_local;
    ctx.retained = body::filter_outlier_frames(ctx.frames, filter);
    if (ctx.retained.empty())
      throw std::runtime_error("precompute: the outlier filter retained no frames");

    std::vector<body::BodyFrame> kept = ctx.retained_frames();
    body::smooth_trajectories(kept, ctx.config.thresholds.smooth_lambda);
    for (size_t k = 0; k < kept.size(); ++k)
      ctx.frames[ctx.retained[k]].joints = kept[k].joints;

    ctx.depth_maps = hsi::DepthRangeMaps{};
    for (int t : ctx.retained)
      hsi::accumulate_into(ctx.depth_maps,
                           hsi::frame_depth_ranges(ctx.intr, ctx.frames[t].mesh,
                                                   ctx.person_masks[t], ctx.object_masks));

    ctx.dilated_masks.clear();
    ctx.ignore_masks.clear();
    const raster::MaskImage& init_person = ctx.person_masks[ctx.manifest.init_frame];
    for (size_t i = 0; i < ctx.object_masks.size(); ++i) {
      ctx.dilated_masks.push_back(
          raster::dilate(ctx.object_masks[i], ctx.config.thresholds.dilation_px));
      raster::MaskImage ignore(ctx.intr.width, ctx.intr.height, 0);
      for (size_t k = 0; k < ctx.object_masks.size(); ++k) {
        if (k == i) continue;
        for (size_t q = 0; q < ignore.size(); ++q)
          ignore.data()[q] |= ctx.object_masks[k].data()[q];
      }
      for (size_t q = 0; q < ignore.size(); ++q) ignore.data()[q] |= init_person.data()[q];
      ctx.ignore_masks.push_back(std::move(ignore));
    }

    save_precompute_cache(ctx, dir);
  }
  ctx.precomputed = true;
}

WorldStage build_world_stage(const RunContext& ctx, const optim::SceneParams& params) {
  if (!ctx.precomputed)
    throw std::logic_error("build_world_stage: precompute() has not run");
  const geom::Mat3 rotation =
      geom::Mat3::rot_x(params.pitch) * geom::Mat3::rot_z(params.roll);
  const geom::Mat3 cam_to_world = rotation.transposed();

  WorldStage stage;

  Fnv key = hash_inputs(ctx);
  key.str("world-v1");
  key.f64(params.pitch);
  key.f64(params.roll);
  key.i64(ctx.config.sdf.resolution);
  key.f64(ctx.config.sdf.padding);
  for (int t : ctx.retained) key.i64(t);
  const std::string base = ctx.cache_dir() + "/sdf_" + key.hex();

  if (fs::exists(base + ".json")) {
    stage.body_sdf = sdf::load_volume(base);
  } else {
    std::vector<geom::TriMesh> world_bodies;
    world_bodies.reserve(ctx.retained.size());
    for (int t : ctx.retained)
      world_bodies.push_back(to_world(ctx.frames[t].mesh, cam_to_world));
    stage.body_sdf = sdf::accumulate_body_sdf(world_bodies, ctx.config.sdf.resolution,
                                              ctx.config.sdf.padding);
    fs::create_directories(ctx.cache_dir());
    sdf::save_volume(stage.body_sdf, base);
  }

  std::vector<std::vector<geom::Vec3>> contact_verts_cam;
  contact_verts_cam.reserve(ctx.retained.size());
  for (int t : ctx.retained) {
    std::vector<geom::Vec3> verts;
    verts.reserve(ctx.frames[t].body_contacts.size());
    for (int idx : ctx.frames[t].body_contacts) verts.push_back(ctx.frames[t].mesh.vertices[idx]);
    contact_verts_cam.push_back(std::move(verts));
  }

  std::vector<geom::TriMesh> posed;
  posed.reserve(ctx.canonical.size());
  for (size_t i = 0; i < ctx.canonical.size(); ++i)
    posed.push_back(geom::apply_pose(ctx.canonical[i], params.objects[i]));

  stage.assignment = hsi::assign_contacts(ctx.intr, contact_verts_cam, rotation,
                                          ctx.dilated_masks, posed,
                                          ctx.config.thresholds.assign_radius);
  stage.contact_points = hsi::group_contact_points(stage.assignment, contact_verts_cam, rotation,
                                                   ctx.canonical.size());
  return stage;
}

}  // namespace roomfit::pipeline
