#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "roomfit/parallel.hpp"
#include "roomfit/pipeline/pipeline.hpp"

namespace roomfit::pipeline {

namespace fs = std::filesystem;

namespace {

std::vector<optim::StageConfig> stage_schedule(const RunConfig& config) {
  if (!config.stages.empty()) return config.stages;
  return {optim::default_stage_config(optim::StageId::SceneInit),
          optim::default_stage_config(optim::StageId::CamGround),
          optim::default_stage_config(optim::StageId::FullHsi)};
}

optim::SceneParams initial_params(const RunContext& ctx) {
  optim::SceneParams params;
  params.pitch = ctx.manifest.init_pitch;
  params.roll = ctx.manifest.init_roll;
  params.y_gp = ctx.manifest.init_y_gp;
  for (const auto& obj : ctx.manifest.objects) params.objects.push_back(obj.init_pose);
  return params;
}

std::vector<geom::TriMesh> posed_objects(const RunContext& ctx,
                                         const optim::SceneParams& params) {
  std::vector<geom::TriMesh> posed;
  posed.reserve(ctx.canonical.size());
  for (size_t i = 0; i < ctx.canonical.size(); ++i)
    posed.push_back(geom::apply_pose(ctx.canonical[i], params.objects[i]));
  return posed;
}

metrics::ScenePlacement placement_of(const std::vector<geom::TriMesh>& canonical,
                                     const std::vector<geom::PoseParams>& poses,
                                     const std::vector<hsi::Category>& categories, double pitch,
                                     double roll, double y_gp) {
  metrics::ScenePlacement placement;
  placement.canonical = canonical;
  placement.poses = poses;
  placement.categories = categories;
  placement.pitch = pitch;
  placement.roll = roll;
  placement.y_gp = y_gp;
  return placement;
}

}  // namespace

PipelineResult run_pipeline(RunContext& ctx) {
  set_thread_count(ctx.config.threads);
  if (!ctx.precomputed) precompute(ctx);
  const std::string out = ctx.config.output_dir;
  fs::create_directories(out);

  PipelineResult result;
  result.initial = initial_params(ctx);
  optim::SceneParams params = result.initial;

  optim::EvalContext ectx;
  ectx.intr = ctx.intr;
  ectx.canonical = ctx.canonical;
  for (const auto& mesh : ctx.canonical) ectx.canonical_bounds.push_back(mesh.bounds());
  ectx.regions = ctx.regions;
  for (const auto& obj : ctx.manifest.objects) ectx.init_scales.push_back(obj.init_pose.scale);
  ectx.object_masks = ctx.object_masks;
  ectx.ignore_masks = ctx.ignore_masks;
  for (const auto& obj : ctx.manifest.objects) ectx.detected_boxes.push_back(obj.detected_box);
  ectx.contact_points.assign(ctx.canonical.size(), {});

  const std::vector<body::BodyFrame> retained = ctx.retained_frames();
  ectx.frames = &retained;

  WorldStage world;
  bool world_built = false;

  for (const optim::StageConfig& stage : stage_schedule(ctx.config)) {
    ectx.cam_rotation = geom::Mat3::rot_x(params.pitch) * geom::Mat3::rot_z(params.roll);
    if (stage.id == optim::StageId::FullHsi) {
      if (!world_built) {
        world = build_world_stage(ctx, params);
        world_built = true;
      }
      ectx.depth_maps = ctx.depth_maps;
      ectx.body_sdf = &world.body_sdf;
      ectx.contact_points = world.contact_points;
    }

    optim::LossEvaluator eval(ectx, stage);
    optim::StageResult stage_result = optim::run_stage(eval, optim::pack_params(params));
    params = optim::unpack_params(eval.layout(), stage_result.best_params);

    const std::string name = optim::to_string(stage.id);
    optim::write_trace_csv(out + "/trace_" + name + ".csv", stage_result.trace);
    result.stage_names.push_back(name);
    result.stage_results.push_back(std::move(stage_result));

    if (result.stage_results.back().aborted) {
      result.aborted = true;
      result.aborted_stage = name;
      break;
    }
  }

  result.params = params;
  save_layout(ctx, params, out + "/layout.json");
  const std::vector<geom::TriMesh> posed = posed_objects(ctx, params);
  for (size_t i = 0; i < posed.size(); ++i)
    geom::save_obj(posed[i], out + "/posed_" + ctx.manifest.objects[i].id + ".obj");
  if (result.aborted) return result;

  if (!world_built) world = build_world_stage(ctx, params);
  const geom::Mat3 rotation = geom::Mat3::rot_x(params.pitch) * geom::Mat3::rot_z(params.roll);
  const geom::Mat3 cam_to_world = rotation.transposed();

  std::vector<body::BodyFrame> world_frames = retained;
  for (auto& frame : world_frames) {
    for (auto& v : frame.mesh.vertices) v = cam_to_world * v;
    for (auto& j : frame.joints) j = cam_to_world * j;
  }
  result.body_offsets =
      body::refine_body_placement(world_frames, posed, ctx.regions, world.assignment);

  // The report sees the refined bodies: each camera-frame vertex shifts by
  // the frame's world-space offset rotated back into the camera.
  std::vector<body::BodyFrame> report_frames = retained;
  for (size_t k = 0; k < report_frames.size(); ++k) {
    const geom::Vec3 shift = rotation * result.body_offsets[k];
    for (auto& v : report_frames[k].mesh.vertices) v += shift;
    for (auto& j : report_frames[k].joints) j += shift;
  }

  std::vector<hsi::Category> categories;
  for (const auto& obj : ctx.manifest.objects) categories.push_back(obj.category);
  const metrics::ScenePlacement estimate = placement_of(
      ctx.canonical, params.objects, categories, params.pitch, params.roll, params.y_gp);

  if (ctx.gt) {
    std::vector<geom::PoseParams> gt_poses;
    std::vector<hsi::Category> gt_categories;
    for (const auto& obj : ctx.gt->objects) {
      gt_poses.push_back(obj.pose);
      gt_categories.push_back(obj.category);
    }
    const metrics::ScenePlacement truth = placement_of(ctx.gt_canonical, gt_poses, gt_categories,
                                                       ctx.gt->pitch, ctx.gt->roll, ctx.gt->y_gp);
    result.report = metrics::evaluate(ctx.intr, estimate, truth, report_frames);
  } else {
    result.report = metrics::evaluate(estimate, report_frames);
  }

  std::ofstream json_out(out + "/report.json", std::ios::binary);
  if (!json_out) throw std::runtime_error("pipeline: cannot write '" + out + "/report.json'");
  json_out << result.report.to_json();
  std::ofstream csv_out(out + "/report.csv", std::ios::binary);
  if (!csv_out) throw std::runtime_error("pipeline: cannot write '" + out + "/report.csv'");
  csv_out << result.report.to_csv();
  return result;
}

}  // namespace roomfit::pipeline
