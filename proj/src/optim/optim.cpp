#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>
#include <stdexcept>

#include "roomfit/optim/optim.hpp"
#include "roomfit/parallel.hpp"

namespace roomfit::optim {

std::vector<double> pack_params(const SceneParams& scene) {
  std::vector<double> packed;
  packed.reserve(7 * scene.objects.size() + 3);
  for (const auto& p : scene.objects) {
    for (double s : {p.scale.x, p.scale.y, p.scale.z}) {
      if (!(s > 0.0)) throw std::invalid_argument("pack_params: scales must be positive");
      packed.push_back(std::log(s));
    }
    packed.push_back(p.yaw);
    packed.push_back(p.translation.x);
    packed.push_back(p.translation.y);
    packed.push_back(p.translation.z);
  }
  packed.push_back(scene.pitch);
  packed.push_back(scene.roll);
  packed.push_back(scene.y_gp);
  return packed;
}

SceneParams unpack_params(const ParamLayout& layout, const std::vector<double>& packed) {
  if (static_cast<int>(packed.size()) != layout.size())
    throw std::invalid_argument("unpack_params: vector size does not match the layout");
  SceneParams scene;
  scene.objects.resize(layout.object_count);
  for (int i = 0; i < layout.object_count; ++i) {
    auto& p = scene.objects[i];
    const int s = layout.scale_offset(i);
    p.scale = {std::exp(packed[s]), std::exp(packed[s + 1]), std::exp(packed[s + 2])};
    p.yaw = packed[layout.yaw_offset(i)];
    const int t = layout.translation_offset(i);
    p.translation = {packed[t], packed[t + 1], packed[t + 2]};
  }
  scene.pitch = packed[layout.pitch_offset()];
  scene.roll = packed[layout.roll_offset()];
  scene.y_gp = packed[layout.ground_offset()];
  return scene;
}

const char* to_string(StageId id) {
  switch (id) {
    case StageId::SceneInit: return "scene-init";
    case StageId::CamGround: return "cam-ground";
    default: return "full-hsi";
  }
}

StageId stage_from_string(const std::string& name) {
  if (name == "scene-init") return StageId::SceneInit;
  if (name == "cam-ground") return StageId::CamGround;
  if (name == "full-hsi") return StageId::FullHsi;
  throw std::invalid_argument("unknown stage: " + name);
}

void StageConfig::validate() const {
  if (iterations <= 0) throw std::invalid_argument("stage config: iterations must be positive");
  if (!(step > 0.0)) throw std::invalid_argument("stage config: step must be positive");
  for (double w : {weights.bbox, weights.occ_sil, weights.scale, weights.depth, weights.collision,
                   weights.contact, feet_weight})
    if (!(w >= 0.0)) throw std::invalid_argument("stage config: weights must be non-negative");
}

StageConfig default_stage_config(StageId id) {
  StageConfig cfg;
  cfg.id = id;
  switch (id) {
    case StageId::SceneInit:
      // image-evidence pre-fit: silhouette plus box and scale anchors
      cfg.weights = hsi::HsiWeights{};
      cfg.weights.occ_sil = 1.0;
      cfg.weights.depth = 0.0;
      cfg.weights.collision = 0.0;
      cfg.weights.contact = 0.0;
      cfg.iterations = 500;
      break;
    case StageId::CamGround:
      cfg.weights = hsi::HsiWeights{};
      cfg.weights.bbox = cfg.weights.occ_sil = cfg.weights.scale = 0.0;
      cfg.weights.depth = cfg.weights.collision = cfg.weights.contact = 0.0;
      cfg.feet_weight = 1.0;
      cfg.iterations = 300;
      break;
    case StageId::FullHsi:
      cfg.weights = hsi::HsiWeights{};
      cfg.iterations = 3000;
      break;
  }
  return cfg;
}

std::vector<uint8_t> active_mask(const ParamLayout& layout, StageId id) {
  std::vector<uint8_t> mask(layout.size(), 0);
  if (id == StageId::CamGround) {
    mask[layout.pitch_offset()] = 1;
    mask[layout.roll_offset()] = 1;
    mask[layout.ground_offset()] = 1;
  } else {
    std::fill(mask.begin(), mask.begin() + 7 * layout.object_count, 1);
  }
  return mask;
}

std::vector<double> central_differences(
    const std::function<double(const std::vector<double>&, int)>& f,
    const std::vector<double>& params, const std::vector<double>& steps,
    const std::vector<uint8_t>& active) {
  if (steps.size() != params.size() || active.size() != params.size())
    throw std::invalid_argument("central_differences: steps/active size mismatch");

  std::vector<int> coords;
  for (size_t i = 0; i < active.size(); ++i)
    if (active[i]) coords.push_back(static_cast<int>(i));

  std::vector<double> values(2 * coords.size(), 0.0);
  parallel_for(static_cast<int64_t>(values.size()), [&](int64_t task) {
    const int coord = coords[task / 2];
    const double sign = (task % 2 == 0) ? 1.0 : -1.0;
    std::vector<double> probe = params;
    probe[coord] += sign * steps[coord];
    values[task] = f(probe, coord);
  });

  std::vector<double> grad(params.size(), 0.0);
  for (size_t k = 0; k < coords.size(); ++k) {
    const int coord = coords[k];
    const double hi = values[2 * k];
    const double lo = values[2 * k + 1];
    if (!std::isfinite(hi) || !std::isfinite(lo)) {
      std::cerr << "warning: non-finite probe at parameter " << coord
                << ", derivative set to 0\n";
      continue;
    }
    grad[coord] = (hi - lo) / (2.0 * steps[coord]);
  }
  return grad;
}

void adam_step(AdamState& state, std::vector<double>& params, const std::vector<double>& grad,
               double step) {
  if (state.m.size() != params.size() || grad.size() != params.size())
    throw std::invalid_argument("adam_step: state/gradient size mismatch");
  state.t += 1;
  const double bias1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double bias2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  for (size_t i = 0; i < params.size(); ++i) {
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grad[i];
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grad[i] * grad[i];
    const double m_hat = state.m[i] / bias1;
    const double v_hat = state.v[i] / bias2;
    params[i] -= step * m_hat / (std::sqrt(v_hat) + state.epsilon);
  }
}

StageResult run_stage(LossEvaluator& eval, std::vector<double> params) {
  const StageConfig& cfg = eval.config();
  StageResult result;
  result.trace.reserve(cfg.iterations);
  AdamState adam(params.size());

  double initial = 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (int it = 0; it < cfg.iterations; ++it) {
    const std::vector<double> grad = eval.gradient(params);
    const TermBreakdown bd = eval.last_breakdown();
    result.trace.push_back({it, bd.total, bd.terms, bd.feet});
    if (it == 0) initial = bd.total;
    if (bd.total < best) {
      best = bd.total;
      result.best_params = params;
      result.best = bd;
    }
    if (it > 0 && bd.total > 1e6 * std::max(std::abs(initial), 1e-12)) {
      result.aborted = true;
      break;
    }
    adam_step(adam, params, grad, cfg.step);
  }
  return result;
}

void write_trace_csv(const std::string& path, const std::vector<TraceRow>& trace) {
  std::FILE* out = std::fopen(path.c_str(), "wb");
  if (!out) throw std::runtime_error("cannot write trace: " + path);
  std::fputs("iteration,total,bbox,occ_sil,scale,depth,collision,contact,feet\n", out);
  for (const auto& row : trace)
    std::fprintf(out, "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", row.iteration,
                 row.total, row.terms.bbox, row.terms.occ_sil, row.terms.scale, row.terms.depth,
                 row.terms.collision, row.terms.contact, row.feet);
  std::fclose(out);
}

}  // namespace roomfit::optim
