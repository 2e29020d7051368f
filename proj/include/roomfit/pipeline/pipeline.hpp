#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "roomfit/body/body.hpp"
#include "roomfit/geom/mesh.hpp"
#include "roomfit/geom/pose.hpp"
#include "roomfit/hsi/hsi.hpp"
#include "roomfit/metrics/metrics.hpp"
#include "roomfit/optim/optim.hpp"
#include "roomfit/raster/camera.hpp"
#include "roomfit/raster/image.hpp"
#include "roomfit/sdf/sdf.hpp"

namespace roomfit::pipeline {

struct Thresholds {
  double tau_pelvis = 0.05;    // pelvis acceleration cutoff, meters
  double tau_local = 0.08;     // pelvis-relative joint acceleration cutoff
  double assign_radius = 0.5;  // contact-to-object distance gate, meters
  double dilation_px = 5.0;    // mask dilation for contact assignment
  double smooth_lambda = 10.0;

  void validate() const;
};

struct SdfSettings {
  int resolution = 128;  // voxels along the longest body-bounds axis
  double padding = 0.2;  // meters added around the accumulated body bounds

  void validate() const;
};

struct RunConfig {
  int schema_version = 1;
  std::string manifest_path;
  std::string gt_path;  // empty = no ground truth
  std::string output_dir = "out";
  std::string cache_dir;  // empty = <output_dir>/cache; ROOMFIT_CACHE_DIR overrides both
  uint64_t seed = 1;
  int threads = 0;
  std::vector<optim::StageConfig> stages;  // empty = the three standard stages
  Thresholds thresholds;
  SdfSettings sdf;

  void validate() const;
};

/// Paths inside the config resolve relative to the config file's directory.
RunConfig load_run_config(const std::string& path);
void save_run_config(const RunConfig& config, const std::string& path);

struct ManifestObject {
  std::string id;
  std::string mesh_path;
  hsi::Category category = hsi::Category::Table;
  geom::PoseParams init_pose;
  hsi::PixelBox detected_box;
  std::string mask_path;
};

struct ManifestFrame {
  int timestamp = 0;
  std::string body_path;         // OBJ in the camera frame
  std::string data_path;         // JSON: joints plus contact vertex indices
  std::string person_mask_path;  // PGM
};

struct SceneManifest {
  int schema_version = 1;
  raster::Intrinsics intr;
  double init_pitch = 0.0;
  double init_roll = 0.0;
  double init_y_gp = 0.0;
  int init_frame = 0;  // frame whose person mask gates the silhouette term
  std::vector<ManifestObject> objects;
  std::vector<ManifestFrame> frames;

  void validate() const;
};

SceneManifest load_manifest(const std::string& path);
void save_manifest(const SceneManifest& manifest, const std::string& path);

struct GroundTruthObject {
  std::string id;
  hsi::Category category = hsi::Category::Table;
  std::string mesh_path;
  geom::PoseParams pose;
};

struct GroundTruth {
  int schema_version = 1;
  double pitch = 0.0;
  double roll = 0.0;
  double y_gp = 0.0;
  std::vector<GroundTruthObject> objects;
  std::vector<int> teleport_frames;  // frames the generator corrupted on purpose
};

GroundTruth load_ground_truth(const std::string& path);
void save_ground_truth(const GroundTruth& gt, const std::string& path);

/// A fully loaded and validated run: every referenced file read, meshes
/// watertight-checked, masks matched against the intrinsics, contact indices
/// range-checked. Precomputation fills the trailing section.
struct RunContext {
  RunConfig config;
  SceneManifest manifest;
  raster::Intrinsics intr;

  std::vector<geom::TriMesh> canonical;
  std::vector<raster::MaskImage> object_masks;
  std::vector<hsi::ContactRegions> regions;
  std::vector<body::BodyFrame> frames;
  std::vector<raster::MaskImage> person_masks;

  std::optional<GroundTruth> gt;
  std::vector<geom::TriMesh> gt_canonical;

  // filled by precompute()
  bool precomputed = false;
  std::vector<int> retained;  // indices into frames, ascending
  hsi::DepthRangeMaps depth_maps;
  std::vector<raster::MaskImage> dilated_masks;
  std::vector<raster::MaskImage> ignore_masks;

  std::string cache_dir() const;
  std::vector<body::BodyFrame> retained_frames() const;
};

RunContext load_run(const std::string& config_path);

/// Outlier filtering, trajectory smoothing, depth-range accumulation over the
/// retained frames, and mask dilation. Results are cached on disk keyed by a
/// content hash of the inputs; a warm cache reloads bitwise-identical data.
void precompute(RunContext& ctx);

/// Camera-dependent products built once pitch/roll/y_gp are refined: the
/// world-frame body SDF accumulated over retained frames, and the contact
/// assignment against the currently posed objects. Cached like precompute().
struct WorldStage {
  sdf::SdfVolume body_sdf;
  hsi::ContactAssignment assignment;
  std::vector<std::vector<geom::Vec3>> contact_points;  // world frame, per object
};

WorldStage build_world_stage(const RunContext& ctx, const optim::SceneParams& params);

struct PipelineResult {
  optim::SceneParams initial;
  optim::SceneParams params;
  std::vector<std::string> stage_names;
  std::vector<optim::StageResult> stage_results;
  std::vector<geom::Vec3> body_offsets;  // per retained frame, world frame
  metrics::SceneReport report;
  bool aborted = false;
  std::string aborted_stage;
};

/// Runs the configured stages in order, refines the per-frame body placement,
/// evaluates against ground truth when present, and writes layout, traces,
/// report, and posed meshes under config.output_dir. A stage abort stops the
/// run but keeps everything written so far.
PipelineResult run_pipeline(RunContext& ctx);

/// Writes layout.json describing the final parameters.
void save_layout(const RunContext& ctx, const optim::SceneParams& params,
                 const std::string& path);
optim::SceneParams load_layout(const std::string& path, size_t expected_objects);

struct SynthSpec {
  uint64_t seed = 1;
  int object_count = 4;  // clamped to [1, 5]
  int frame_count = 60;
  double room_half = 2.2;          // objects placed within +-room_half meters
  double perturb_translation = 0.2;
  double perturb_yaw = 0.2618;     // 15 degrees
  double perturb_scale = 0.1;      // relative
  double camera_pitch_range = 0.1396;  // 8 degrees
  double camera_roll_range = 0.1396;
  double ground_offset_range = 0.1;  // initial y_gp error, meters
  int teleport_count = 0;
  int image_width = 320;
  int image_height = 240;
  double focal = 300.0;
  int sdf_resolution = 128;

  void validate() const;
};

/// Deterministically writes a complete fixture under `out_dir`: canonical
/// meshes, ground-truth-rendered masks, a scripted walk-and-sit body
/// trajectory with labeled contacts, a manifest with perturbed initial poses,
/// a ground-truth record, and a ready-to-run config at <out_dir>/run.json.
/// The generator re-rolls from a sub-seed (at most 100 tries) until ground
/// truth objects are overlap-free and satisfy the constructed-consistency
/// checks (zero depth, collision, and ground penetration; contact < 1 cm).
void synth_generate(const SynthSpec& spec, const std::string& out_dir);

int cli_main(int argc, char** argv);

}  // namespace roomfit::pipeline
