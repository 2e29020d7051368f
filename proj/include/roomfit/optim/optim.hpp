#pragma once

#include <functional>
#include <string>
#include <vector>

#include "roomfit/body/body.hpp"
#include "roomfit/geom/pose.hpp"
#include "roomfit/hsi/hsi.hpp"
#include "roomfit/raster/rasterizer.hpp"
#include "roomfit/sdf/sdf.hpp"

namespace roomfit::optim {

/// Flat parameter order: per object [log sx, log sy, log sz, yaw, tx, ty, tz],
/// then [pitch, roll, y_gp]. Scales travel in log space so any real vector
/// decodes to a valid (positive-scale) layout.
struct ParamLayout {
  int object_count = 0;

  int size() const { return 7 * object_count + 3; }
  int scale_offset(int obj) const { return 7 * obj; }
  int yaw_offset(int obj) const { return 7 * obj + 3; }
  int translation_offset(int obj) const { return 7 * obj + 4; }
  int pitch_offset() const { return 7 * object_count; }
  int roll_offset() const { return 7 * object_count + 1; }
  int ground_offset() const { return 7 * object_count + 2; }
  /// Object owning parameter i, or -1 for the camera/ground tail.
  int owner(int i) const { return i < 7 * object_count ? i / 7 : -1; }
};

struct SceneParams {
  std::vector<geom::PoseParams> objects;
  double pitch = 0.0;
  double roll = 0.0;
  double y_gp = 0.0;
};

std::vector<double> pack_params(const SceneParams& scene);
SceneParams unpack_params(const ParamLayout& layout, const std::vector<double>& packed);

enum class StageId { SceneInit, CamGround, FullHsi };

const char* to_string(StageId id);
StageId stage_from_string(const std::string& name);

/// Term weights and schedule for one optimization stage. Disabled terms carry
/// weight zero; `feet` only drives the camera/ground stage.
struct StageConfig {
  StageId id = StageId::FullHsi;
  hsi::HsiWeights weights;
  double feet_weight = 0.0;
  int iterations = 3000;
  double step = 0.002;

  void validate() const;
};

/// The canonical three-stage schedule: scene-init fits objects to image
/// evidence (silhouette + box + scale), cam-ground fits pitch/roll/height to
/// foot contacts, full-hsi runs every term.
StageConfig default_stage_config(StageId id);

/// 1 where the stage moves the parameter: object parameters for scene-init
/// and full-hsi, the camera/ground tail for cam-ground.
std::vector<uint8_t> active_mask(const ParamLayout& layout, StageId id);

/// Everything the loss needs that stays fixed across one stage. Pointers and
/// images are borrowed; the caller keeps them alive.
struct EvalContext {
  raster::Intrinsics intr;
  geom::Mat3 cam_rotation = geom::Mat3::identity();

  std::vector<geom::TriMesh> canonical;
  std::vector<geom::Aabb> canonical_bounds;
  std::vector<hsi::ContactRegions> regions;
  std::vector<geom::Vec3> init_scales;

  std::vector<raster::MaskImage> object_masks;
  std::vector<raster::MaskImage> ignore_masks;
  std::vector<hsi::PixelBox> detected_boxes;

  hsi::DepthRangeMaps depth_maps;                        // full-hsi only
  const sdf::SdfVolume* body_sdf = nullptr;              // full-hsi only
  std::vector<std::vector<geom::Vec3>> contact_points;   // world frame, per object
  const std::vector<body::BodyFrame>* frames = nullptr;  // cam-ground only

  void validate(const StageConfig& cfg) const;
};

struct TermBreakdown {
  hsi::HsiTerms terms;
  double feet = 0.0;
  double total = 0.0;
};

/// Stage loss with per-object caching: a probe that moves one object's
/// parameters re-renders that object alone and reuses every other object's
/// cached accumulators, which keeps a finite-difference sweep near O(1) per
/// coordinate instead of O(N).
class LossEvaluator {
 public:
  LossEvaluator(const EvalContext& ctx, const StageConfig& cfg);

  const ParamLayout& layout() const { return layout_; }
  const StageConfig& config() const { return cfg_; }

  /// Full evaluation; refreshes the cache used by probes. Throws
  /// std::runtime_error naming the first non-finite term.
  TermBreakdown evaluate(const std::vector<double>& params);

  /// Loss with only `moved_param`'s owner recomputed against the cache from
  /// the last evaluate(). Safe to call concurrently.
  double probe(const std::vector<double>& params, int moved_param) const;

  /// Central differences over the stage's active parameters; inactive
  /// coordinates stay zero. `step_scale` shrinks every probe step (the
  /// Richardson check runs at 1.0 and 0.5). Calls evaluate() first, so the
  /// cache always matches `params`.
  std::vector<double> gradient(const std::vector<double>& params, double step_scale = 1.0);

  /// Probe step per coordinate: 1e-4 in log-scale, 1e-3 rad for angles,
  /// 1e-3 m for translations and ground height.
  double probe_step(int param) const;

  /// Breakdown from the most recent evaluate()/gradient() call.
  const TermBreakdown& last_breakdown() const { return last_; }

 private:
  struct ObjectAccums {
    hsi::TermAccum occ_sil, depth, collision, contact;
    double bbox_sum = 0.0;
    double scale_norm = 0.0;
  };

  ObjectAccums evaluate_object(const SceneParams& scene, int obj) const;
  TermBreakdown combine(const SceneParams& scene, const std::vector<ObjectAccums>& accums) const;

  const EvalContext& ctx_;
  StageConfig cfg_;
  ParamLayout layout_;
  std::vector<uint8_t> active_;
  std::vector<ObjectAccums> cache_;
  TermBreakdown last_;
  // fixed occ-sil pieces per object: float target, valid count, and total
  // target mass; a probe only rasterizes a window and reconstructs the
  // full-image sum from these
  std::vector<raster::Image<float>> target_float_;
  std::vector<int64_t> occ_count_;
  std::vector<double> occ_target_sq_;
};

/// Central differences of an arbitrary scalar function; probes run in
/// parallel into private slots. `f(p, coord)` receives which coordinate
/// moved. Non-finite probe values zero that coordinate with a warning.
std::vector<double> central_differences(
    const std::function<double(const std::vector<double>&, int)>& f,
    const std::vector<double>& params, const std::vector<double>& steps,
    const std::vector<uint8_t>& active);

struct AdamState {
  std::vector<double> m, v;
  int64_t t = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  explicit AdamState(size_t n) : m(n, 0.0), v(n, 0.0) {}
};

/// One biased-moment-corrected update, in place. Zero-gradient coordinates
/// are left bitwise untouched.
void adam_step(AdamState& state, std::vector<double>& params, const std::vector<double>& grad,
               double step);

struct TraceRow {
  int iteration = 0;
  double total = 0.0;
  hsi::HsiTerms terms;
  double feet = 0.0;
};

struct StageResult {
  std::vector<double> best_params;
  TermBreakdown best;
  std::vector<TraceRow> trace;
  bool aborted = false;
};

/// Masked Adam loop returning the best iterate seen. Aborts (keeping the
/// trace) when the loss exceeds 1e6 times its initial value.
StageResult run_stage(LossEvaluator& eval, std::vector<double> params);

void write_trace_csv(const std::string& path, const std::vector<TraceRow>& trace);

}  // namespace roomfit::optim
