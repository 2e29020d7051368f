#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
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

void write_file(const std::string& path, const std::string& text, const char* what) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(std::string(what) + ": cannot write '" + path + "'");
  out << text;
}

void check_schema(const json& j, const std::string& path, const char* what) {
  if (!j.contains("schema_version") || !j["schema_version"].is_number_integer())
    throw std::invalid_argument(std::string(what) + ": '" + path +
                                "' is missing an integer schema_version");
  if (j["schema_version"].get<int>() != 1)
    throw std::invalid_argument(std::string(what) + ": '" + path +
                                "' has unsupported schema_version " +
                                std::to_string(j["schema_version"].get<int>()));
}

/// Reads a required key, naming the file and key on failure.
template <typename T>
T require(const json& j, const char* key, const std::string& path, const char* what) {
  if (!j.contains(key))
    throw std::invalid_argument(std::string(what) + ": '" + path + "' is missing '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw std::invalid_argument(std::string(what) + ": '" + path + "' has a malformed '" + key +
                                "'");
  }
}

geom::PoseParams pose_from_json(const json& j, const std::string& path, const char* what) {
  geom::PoseParams pose;
  const auto scale = require<std::vector<double>>(j, "scale", path, what);
  const auto translation = require<std::vector<double>>(j, "translation", path, what);
  if (scale.size() != 3 || translation.size() != 3)
    throw std::invalid_argument(std::string(what) + ": '" + path +
                                "' pose vectors must have 3 entries");
  pose.scale = {scale[0], scale[1], scale[2]};
  pose.translation = {translation[0], translation[1], translation[2]};
  pose.yaw = require<double>(j, "yaw", path, what);
  return pose;
}

ordered_json pose_to_json(const geom::PoseParams& pose) {
  return {{"scale", {pose.scale.x, pose.scale.y, pose.scale.z}},
          {"yaw", pose.yaw},
          {"translation", {pose.translation.x, pose.translation.y, pose.translation.z}}};
}

std::string resolve_from(const std::string& base_file, const std::string& relative) {
  if (relative.empty() || fs::path(relative).is_absolute()) return relative;
  return (fs::path(base_file).parent_path() / relative).lexically_normal().string();
}

}  // namespace

void Thresholds::validate() const {
  if (!(tau_pelvis > 0.0) || !(tau_local > 0.0))
    throw std::invalid_argument("thresholds: acceleration cutoffs must be positive");
  if (!(assign_radius > 0.0))
    throw std::invalid_argument("thresholds: assign_radius must be positive");
  if (dilation_px < 0.0) throw std::invalid_argument("thresholds: dilation_px must be >= 0");
  if (smooth_lambda < 0.0) throw std::invalid_argument("thresholds: smooth_lambda must be >= 0");
}

void SdfSettings::validate() const {
  if (resolution < 8) throw std::invalid_argument("sdf: resolution must be at least 8");
  if (!(padding > 0.0)) throw std::invalid_argument("sdf: padding must be positive");
}

void RunConfig::validate() const {
  if (manifest_path.empty()) throw std::invalid_argument("config: manifest path is required");
  if (output_dir.empty()) throw std::invalid_argument("config: output_dir is required");
  if (threads < 0) throw std::invalid_argument("config: threads must be >= 0");
  thresholds.validate();
  sdf.validate();
  for (const auto& stage : stages) stage.validate();
}

void SceneManifest::validate() const {
  if (intr.width <= 0 || intr.height <= 0 || !(intr.fx > 0.0) || !(intr.fy > 0.0))
    throw std::invalid_argument("manifest: camera intrinsics are malformed");
  if (objects.empty()) throw std::invalid_argument("manifest: at least one object is required");
  if (frames.empty()) throw std::invalid_argument("manifest: at least one frame is required");
  if (init_frame < 0 || init_frame >= int(frames.size()))
    throw std::invalid_argument("manifest: init_frame is out of range");
  for (size_t i = 0; i < objects.size(); ++i)
    for (size_t k = i + 1; k < objects.size(); ++k)
      if (objects[i].id == objects[k].id)
        throw std::invalid_argument("manifest: duplicate object id '" + objects[i].id + "'");
  for (size_t t = 1; t < frames.size(); ++t)
    if (frames[t].timestamp <= frames[t - 1].timestamp)
      throw std::invalid_argument("manifest: frame timestamps must strictly increase");
}

void SynthSpec::validate() const {
  if (frame_count < 8) throw std::invalid_argument("synth: frame_count must be at least 8");
  if (!(room_half > 0.5)) throw std::invalid_argument("synth: room_half must exceed 0.5");
  if (perturb_translation < 0.0 || perturb_yaw < 0.0 || perturb_scale < 0.0 ||
      perturb_scale >= 0.9)
    throw std::invalid_argument("synth: perturbation ranges are out of range");
  if (teleport_count < 0 || teleport_count > frame_count / 4)
    throw std::invalid_argument("synth: teleport_count is out of range");
  if (image_width < 32 || image_height < 32 || !(focal > 0.0))
    throw std::invalid_argument("synth: camera settings are malformed");
  if (sdf_resolution < 8) throw std::invalid_argument("synth: sdf_resolution is too small");
}

RunConfig load_run_config(const std::string& path) {
  const json j = parse_file(path, "config");
  check_schema(j, path, "config");

  RunConfig config;
  config.manifest_path = resolve_from(path, require<std::string>(j, "manifest", path, "config"));
  if (j.contains("gt")) config.gt_path = resolve_from(path, j.at("gt").get<std::string>());
  config.output_dir = resolve_from(path, require<std::string>(j, "output_dir", path, "config"));
  if (j.contains("cache_dir"))
    config.cache_dir = resolve_from(path, j.at("cache_dir").get<std::string>());
  if (j.contains("seed")) config.seed = j.at("seed").get<uint64_t>();
  if (j.contains("threads")) config.threads = j.at("threads").get<int>();

  if (j.contains("thresholds")) {
    const json& t = j.at("thresholds");
    if (t.contains("tau_pelvis")) config.thresholds.tau_pelvis = t.at("tau_pelvis");
    if (t.contains("tau_local")) config.thresholds.tau_local = t.at("tau_local");
    if (t.contains("assign_radius")) config.thresholds.assign_radius = t.at("assign_radius");
    if (t.contains("dilation_px")) config.thresholds.dilation_px = t.at("dilation_px");
    if (t.contains("smooth_lambda")) config.thresholds.smooth_lambda = t.at("smooth_lambda");
  }
  if (j.contains("sdf")) {
    const json& s = j.at("sdf");
    if (s.contains("resolution")) config.sdf.resolution = s.at("resolution");
    if (s.contains("padding")) config.sdf.padding = s.at("padding");
  }

  if (j.contains("stages")) {
    for (const json& s : j.at("stages")) {
      optim::StageConfig stage =
          optim::default_stage_config(optim::stage_from_string(require<std::string>(
              s, "stage", path, "config")));
      if (s.contains("iterations")) stage.iterations = s.at("iterations");
      if (s.contains("step")) stage.step = s.at("step");
      if (s.contains("weights")) {
        const json& w = s.at("weights");
        if (w.contains("bbox")) stage.weights.bbox = w.at("bbox");
        if (w.contains("occ_sil")) stage.weights.occ_sil = w.at("occ_sil");
        if (w.contains("scale")) stage.weights.scale = w.at("scale");
        if (w.contains("depth")) stage.weights.depth = w.at("depth");
        if (w.contains("collision")) stage.weights.collision = w.at("collision");
        if (w.contains("contact")) stage.weights.contact = w.at("contact");
      }
      if (s.contains("feet_weight")) stage.feet_weight = s.at("feet_weight");
      config.stages.push_back(stage);
    }
  }

  config.validate();
  return config;
}

void save_run_config(const RunConfig& config, const std::string& path) {
  config.validate();
  ordered_json j;
  j["schema_version"] = config.schema_version;
  j["manifest"] = config.manifest_path;
  if (!config.gt_path.empty()) j["gt"] = config.gt_path;
  j["output_dir"] = config.output_dir;
  if (!config.cache_dir.empty()) j["cache_dir"] = config.cache_dir;
  j["seed"] = config.seed;
  j["threads"] = config.threads;
  j["thresholds"] = {{"tau_pelvis", config.thresholds.tau_pelvis},
                     {"tau_local", config.thresholds.tau_local},
                     {"assign_radius", config.thresholds.assign_radius},
                     {"dilation_px", config.thresholds.dilation_px},
                     {"smooth_lambda", config.thresholds.smooth_lambda}};
  j["sdf"] = {{"resolution", config.sdf.resolution}, {"padding", config.sdf.padding}};
  if (!config.stages.empty()) {
    j["stages"] = ordered_json::array();
    for (const auto& stage : config.stages) {
      ordered_json s;
      s["stage"] = optim::to_string(stage.id);
      s["iterations"] = stage.iterations;
      s["step"] = stage.step;
      s["feet_weight"] = stage.feet_weight;
      s["weights"] = {{"bbox", stage.weights.bbox},       {"occ_sil", stage.weights.occ_sil},
                      {"scale", stage.weights.scale},     {"depth", stage.weights.depth},
                      {"collision", stage.weights.collision},
                      {"contact", stage.weights.contact}};
      j["stages"].push_back(s);
    }
  }
  write_file(path, j.dump(2) + "\n", "config");
}

SceneManifest load_manifest(const std::string& path) {
  const json j = parse_file(path, "manifest");
  check_schema(j, path, "manifest");

  SceneManifest m;
  const json& cam = j.contains("camera") ? j.at("camera") : json();
  if (cam.is_null()) throw std::invalid_argument("manifest: '" + path + "' is missing 'camera'");
  m.intr.fx = require<double>(cam, "fx", path, "manifest");
  m.intr.fy = require<double>(cam, "fy", path, "manifest");
  m.intr.cx = require<double>(cam, "cx", path, "manifest");
  m.intr.cy = require<double>(cam, "cy", path, "manifest");
  m.intr.width = require<int>(cam, "width", path, "manifest");
  m.intr.height = require<int>(cam, "height", path, "manifest");
  if (cam.contains("pitch")) m.init_pitch = cam.at("pitch");
  if (cam.contains("roll")) m.init_roll = cam.at("roll");
  m.init_y_gp = require<double>(j, "ground_y", path, "manifest");
  if (j.contains("init_frame")) m.init_frame = j.at("init_frame");

  for (const json& o : require<json>(j, "objects", path, "manifest")) {
    ManifestObject obj;
    obj.id = require<std::string>(o, "id", path, "manifest");
    obj.mesh_path = resolve_from(path, require<std::string>(o, "mesh", path, "manifest"));
    obj.category = hsi::category_from_string(require<std::string>(o, "category", path,
                                                                  "manifest"));
    obj.init_pose = pose_from_json(require<json>(o, "pose", path, "manifest"), path, "manifest");
    const auto box = require<std::vector<double>>(o, "box", path, "manifest");
    if (box.size() != 4)
      throw std::invalid_argument("manifest: '" + path + "' object '" + obj.id +
                                  "' box must be [x, y, width, height]");
    obj.detected_box = {box[0], box[1], box[2], box[3]};
    obj.mask_path = resolve_from(path, require<std::string>(o, "mask", path, "manifest"));
    m.objects.push_back(std::move(obj));
  }

  for (const json& f : require<json>(j, "frames", path, "manifest")) {
    ManifestFrame frame;
    frame.timestamp = require<int>(f, "timestamp", path, "manifest");
    frame.body_path = resolve_from(path, require<std::string>(f, "body", path, "manifest"));
    frame.data_path = resolve_from(path, require<std::string>(f, "data", path, "manifest"));
    frame.person_mask_path =
        resolve_from(path, require<std::string>(f, "person_mask", path, "manifest"));
    m.frames.push_back(std::move(frame));
  }

  m.validate();
  return m;
}

void save_manifest(const SceneManifest& manifest, const std::string& path) {
  manifest.validate();
  ordered_json j;
  j["schema_version"] = manifest.schema_version;
  j["camera"] = {{"fx", manifest.intr.fx},   {"fy", manifest.intr.fy},
                 {"cx", manifest.intr.cx},   {"cy", manifest.intr.cy},
                 {"width", manifest.intr.width}, {"height", manifest.intr.height},
                 {"pitch", manifest.init_pitch}, {"roll", manifest.init_roll}};
  j["ground_y"] = manifest.init_y_gp;
  j["init_frame"] = manifest.init_frame;
  j["objects"] = ordered_json::array();
  for (const auto& obj : manifest.objects) {
    j["objects"].push_back({{"id", obj.id},
                            {"mesh", obj.mesh_path},
                            {"category", hsi::to_string(obj.category)},
                            {"pose", pose_to_json(obj.init_pose)},
                            {"box",
                             {obj.detected_box.x_min, obj.detected_box.y_min,
                              obj.detected_box.width, obj.detected_box.height}},
                            {"mask", obj.mask_path}});
  }
  j["frames"] = ordered_json::array();
  for (const auto& frame : manifest.frames) {
    j["frames"].push_back({{"timestamp", frame.timestamp},
                           {"body", frame.body_path},
                           {"data", frame.data_path},
                           {"person_mask", frame.person_mask_path}});
  }
  write_file(path, j.dump(2) + "\n", "manifest");
}

GroundTruth load_ground_truth(const std::string& path) {
  const json j = parse_file(path, "ground truth");
  check_schema(j, path, "ground truth");

  GroundTruth gt;
  gt.pitch = require<double>(j, "pitch", path, "ground truth");
  gt.roll = require<double>(j, "roll", path, "ground truth");
  gt.y_gp = require<double>(j, "ground_y", path, "ground truth");
  for (const json& o : require<json>(j, "objects", path, "ground truth")) {
    GroundTruthObject obj;
    obj.id = require<std::string>(o, "id", path, "ground truth");
    obj.category =
        hsi::category_from_string(require<std::string>(o, "category", path, "ground truth"));
    obj.mesh_path = resolve_from(path, require<std::string>(o, "mesh", path, "ground truth"));
    obj.pose = pose_from_json(require<json>(o, "pose", path, "ground truth"), path,
                              "ground truth");
    gt.objects.push_back(std::move(obj));
  }
  if (j.contains("teleport_frames"))
    gt.teleport_frames = j.at("teleport_frames").get<std::vector<int>>();
  return gt;
}

void save_ground_truth(const GroundTruth& gt, const std::string& path) {
  ordered_json j;
  j["schema_version"] = gt.schema_version;
  j["pitch"] = gt.pitch;
  j["roll"] = gt.roll;
  j["ground_y"] = gt.y_gp;
  j["objects"] = ordered_json::array();
  for (const auto& obj : gt.objects) {
    j["objects"].push_back({{"id", obj.id},
                            {"category", hsi::to_string(obj.category)},
                            {"mesh", obj.mesh_path},
                            {"pose", pose_to_json(obj.pose)}});
  }
  j["teleport_frames"] = gt.teleport_frames;
  write_file(path, j.dump(2) + "\n", "ground truth");
}

void save_layout(const RunContext& ctx, const optim::SceneParams& params,
                 const std::string& path) {
  if (params.objects.size() != ctx.manifest.objects.size())
    throw std::invalid_argument("layout: parameter count does not match the manifest");
  ordered_json j;
  j["schema_version"] = 1;
  j["pitch"] = params.pitch;
  j["roll"] = params.roll;
  j["ground_y"] = params.y_gp;
  j["objects"] = ordered_json::array();
  for (size_t i = 0; i < params.objects.size(); ++i) {
    j["objects"].push_back(
        {{"id", ctx.manifest.objects[i].id}, {"pose", pose_to_json(params.objects[i])}});
  }
  write_file(path, j.dump(2) + "\n", "layout");
}

optim::SceneParams load_layout(const std::string& path, size_t expected_objects) {
  const json j = parse_file(path, "layout");
  check_schema(j, path, "layout");
  optim::SceneParams params;
  params.pitch = require<double>(j, "pitch", path, "layout");
  params.roll = require<double>(j, "roll", path, "layout");
  params.y_gp = require<double>(j, "ground_y", path, "layout");
  for (const json& o : require<json>(j, "objects", path, "layout"))
    params.objects.push_back(pose_from_json(require<json>(o, "pose", path, "layout"), path,
                                            "layout"));
  if (params.objects.size() != expected_objects)
    throw std::invalid_argument("layout: '" + path + "' has " +
                                std::to_string(params.objects.size()) + " objects, expected " +
                                std::to_string(expected_objects));
  return params;
}

}  // namespace roomfit::pipeline
