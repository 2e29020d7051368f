#include "roomfit/body/body.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <iostream>
#include <memory>
#include <stdexcept>

#include "roomfit/geom/bvh.hpp"
#include "roomfit/geom/nn.hpp"
#include "roomfit/geom/pose.hpp"
#include "roomfit/parallel.hpp"

namespace roomfit::body {

namespace {

bool finite(const geom::Vec3& v) {
  return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}

void check_contact_indices(const std::vector<int>& idx, size_t n_verts, const char* label) {
  for (int i : idx)
    if (i < 0 || static_cast<size_t>(i) >= n_verts)
      throw std::invalid_argument(std::string("body frame: ") + label +
                                  " contact index out of range");
}

}  // namespace

void BodyFrame::validate() const {
  check_contact_indices(feet_contacts, mesh.vertices.size(), "feet");
  check_contact_indices(body_contacts, mesh.vertices.size(), "body");
  for (const auto& j : joints)
    if (!finite(j)) throw std::invalid_argument("body frame: non-finite joint");
  if (!joints_observed.empty() && joints_observed.size() != joints.size())
    throw std::invalid_argument("body frame: joint/observation size mismatch");
}

void TrajectoryFilterConfig::validate() const {
  if (!(tau_pelvis > 0.0) || !(tau_local > 0.0))
    throw std::invalid_argument("trajectory filter: thresholds must be positive");
}

double geman_mcclure(double residual, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("geman_mcclure: sigma must be positive");
  const double r2 = residual * residual;
  const double s2 = sigma * sigma;
  return s2 * r2 / (r2 + s2);
}

double geman_mcclure(std::span<const double> residual, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("geman_mcclure: sigma must be positive");
  double sum = 0.0;
  for (double r : residual) sum += geman_mcclure(r, sigma);
  return sum;
}

double feet_loss(double pitch, double roll, double y_gp, const std::vector<BodyFrame>& frames,
                 double sigma) {
  const geom::Mat3 to_world = (geom::Mat3::rot_x(pitch) * geom::Mat3::rot_z(roll)).transposed();
  double sum = 0.0;
  int64_t count = 0;
  for (const auto& frame : frames) {
    for (int idx : frame.feet_contacts) {
      const geom::Vec3 p = to_world * frame.mesh.vertices[idx];
      sum += geman_mcclure(p.y - y_gp, sigma);
      ++count;
    }
  }
  if (count == 0) throw std::invalid_argument("feet_loss: no foot contacts in any frame");
  return sum / static_cast<double>(count);
}

namespace {

size_t uniform_joint_count(const std::vector<std::vector<geom::Vec3>>& joints) {
  const size_t k = joints.empty() ? 0 : joints.front().size();
  for (const auto& frame : joints)
    if (frame.size() != k)
      throw std::invalid_argument("joint trajectories: frames disagree on joint count");
  return k;
}

}  // namespace

SmoothnessTerms smoothness_terms(const std::vector<std::vector<geom::Vec3>>& joints,
                                 const raster::Intrinsics& intr) {
  SmoothnessTerms terms;
  const size_t t_count = joints.size();
  if (t_count < 3) {
    std::cerr << "warning: smoothness needs at least 3 frames, got " << t_count << "\n";
    return terms;
  }
  const size_t k_count = uniform_joint_count(joints);
  constexpr double kSigmaSpatial = 0.1;
  constexpr double kSigmaProjected = 100.0;
  for (size_t t = 1; t + 1 < t_count; ++t) {
    for (size_t k = 0; k < k_count; ++k) {
      const geom::Vec3 d = joints[t - 1][k] + joints[t + 1][k] - joints[t][k] * 2.0;
      terms.spatial += geman_mcclure(d.norm(), kSigmaSpatial);

      const auto a = raster::project_camera_point(intr, joints[t - 1][k]);
      const auto b = raster::project_camera_point(intr, joints[t][k]);
      const auto c = raster::project_camera_point(intr, joints[t + 1][k]);
      if (a.valid && b.valid && c.valid) {
        const double du = a.u + c.u - 2.0 * b.u;
        const double dv = a.v + c.v - 2.0 * b.v;
        terms.projected += geman_mcclure(std::hypot(du, dv), kSigmaProjected);
      }
    }
  }
  return terms;
}

double smoothness_loss(const std::vector<std::vector<geom::Vec3>>& joints,
                       const raster::Intrinsics& intr) {
  return smoothness_terms(joints, intr).total();
}

void smooth_trajectories(std::vector<BodyFrame>& frames, double lambda) {
  if (lambda < 0.0) throw std::invalid_argument("smooth_trajectories: lambda must be >= 0");
  for (auto& f : frames)
    if (f.joints_observed.empty()) f.joints_observed = f.joints;

  const int t_count = static_cast<int>(frames.size());
  if (t_count < 3) {
    for (auto& f : frames) f.joints = f.joints_observed;
    return;
  }
  std::vector<std::vector<geom::Vec3>> observed;
  observed.reserve(frames.size());
  for (const auto& f : frames) observed.push_back(f.joints_observed);
  const int k_count = static_cast<int>(uniform_joint_count(observed));

  // (I + lambda D^T D) x = x_obs, with D the second-difference operator. One
  // factorization serves every joint and coordinate as a multi-column solve.
  Eigen::SparseMatrix<double> system(t_count, t_count);
  {
    std::vector<Eigen::Triplet<double>> entries;
    for (int t = 0; t < t_count; ++t) entries.emplace_back(t, t, 1.0);
    for (int i = 0; i + 2 < t_count; ++i) {
      const int cols[3] = {i, i + 1, i + 2};
      const double coef[3] = {1.0, -2.0, 1.0};
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
          entries.emplace_back(cols[a], cols[b], lambda * coef[a] * coef[b]);
    }
    system.setFromTriplets(entries.begin(), entries.end());
  }
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(system);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("smooth_trajectories: factorization failed");

  Eigen::MatrixXd rhs(t_count, 3 * k_count);
  for (int t = 0; t < t_count; ++t)
    for (int k = 0; k < k_count; ++k) {
      const geom::Vec3& j = observed[t][k];
      rhs(t, 3 * k + 0) = j.x;
      rhs(t, 3 * k + 1) = j.y;
      rhs(t, 3 * k + 2) = j.z;
    }
  const Eigen::MatrixXd solution = solver.solve(rhs);

  for (int t = 0; t < t_count; ++t) {
    frames[t].joints.resize(k_count);
    for (int k = 0; k < k_count; ++k)
      frames[t].joints[k] = {solution(t, 3 * k + 0), solution(t, 3 * k + 1),
                             solution(t, 3 * k + 2)};
  }
}

std::vector<int> filter_outlier_frames(const std::vector<BodyFrame>& frames,
                                       const TrajectoryFilterConfig& config) {
  config.validate();
  const int t_count = static_cast<int>(frames.size());
  std::vector<int> retained;
  if (t_count < 3) {
    for (int t = 0; t < t_count; ++t) retained.push_back(t);
    return retained;
  }
  for (const auto& f : frames)
    if (f.joints.size() <= static_cast<size_t>(kPelvisJoint))
      throw std::invalid_argument("filter_outlier_frames: frame lacks a pelvis joint");

  retained.push_back(0);
  for (int t = 1; t + 1 < t_count; ++t) {
    const auto& prev = frames[t - 1].joints;
    const auto& cur = frames[t].joints;
    const auto& next = frames[t + 1].joints;
    const geom::Vec3 pelvis_acc =
        prev[kPelvisJoint] + next[kPelvisJoint] - cur[kPelvisJoint] * 2.0;
    if (pelvis_acc.norm() >= config.tau_pelvis) continue;

    // joint motion relative to the pelvis, so whole-body translation is
    // charged to the pelvis term only
    const size_t k_count = std::min({prev.size(), cur.size(), next.size()});
    double worst = 0.0;
    for (size_t k = 0; k < k_count; ++k) {
      const geom::Vec3 local_acc = (prev[k] - prev[kPelvisJoint]) + (next[k] - next[kPelvisJoint]) -
                                   (cur[k] - cur[kPelvisJoint]) * 2.0;
      worst = std::max(worst, local_acc.norm());
    }
    if (worst >= config.tau_local) continue;
    retained.push_back(t);
  }
  retained.push_back(t_count - 1);
  return retained;
}

namespace {

struct SceneIndex {
  std::vector<geom::TriBvh> surface;
  std::vector<geom::Aabb> bounds;
  std::vector<std::unique_ptr<geom::PointBvh>> region_points;
};

double placement_objective(const geom::Vec3& delta, const BodyFrame& frame,
                           const std::vector<int>& contact_object, const SceneIndex& scene) {
  double value = delta.dot(delta);
  for (const auto& v : frame.mesh.vertices) {
    const geom::Vec3 p = v + delta;
    for (size_t o = 0; o < scene.surface.size(); ++o) {
      if (!scene.bounds[o].contains(p)) continue;
      if (!scene.surface[o].inside(p)) continue;
      value += scene.surface[o].squared_distance(p);
    }
  }
  for (size_t c = 0; c < frame.body_contacts.size(); ++c) {
    const int o = contact_object[c];
    if (o < 0 || !scene.region_points[o]) continue;
    const geom::Vec3 p = frame.mesh.vertices[frame.body_contacts[c]] + delta;
    value += std::sqrt(scene.region_points[o]->nearest_squared(p, {1.0, 1.0, 1.0}));
  }
  return value;
}

}  // namespace

std::vector<geom::Vec3> refine_body_placement(const std::vector<BodyFrame>& frames,
                                              const std::vector<geom::TriMesh>& posed_objects,
                                              const std::vector<hsi::ContactRegions>& regions,
                                              const hsi::ContactAssignment& assignment,
                                              double max_shift) {
  if (regions.size() != posed_objects.size())
    throw std::invalid_argument("refine_body_placement: one region set per object required");
  if (assignment.object_of.size() != frames.size())
    throw std::invalid_argument("refine_body_placement: one assignment row per frame required");
  for (size_t t = 0; t < frames.size(); ++t)
    if (assignment.object_of[t].size() != frames[t].body_contacts.size())
      throw std::invalid_argument("refine_body_placement: assignment/contact count mismatch");
  if (!(max_shift > 0.0))
    throw std::invalid_argument("refine_body_placement: max_shift must be positive");

  SceneIndex scene;
  scene.surface.reserve(posed_objects.size());
  for (size_t o = 0; o < posed_objects.size(); ++o) {
    const auto& mesh = posed_objects[o];
    scene.surface.emplace_back(mesh);
    scene.bounds.push_back(mesh.bounds());
    std::vector<geom::Vec3> pts;
    for (int idx : regions[o].seat) pts.push_back(mesh.vertices[idx]);
    for (int idx : regions[o].back) pts.push_back(mesh.vertices[idx]);
    scene.region_points.push_back(pts.empty() ? nullptr
                                              : std::make_unique<geom::PointBvh>(pts));
  }

  std::vector<geom::Vec3> deltas(frames.size(), geom::Vec3{0, 0, 0});
  parallel_for(static_cast<int64_t>(frames.size()), [&](int64_t t) {
    const auto& contact_object = assignment.object_of[t];
    geom::Vec3 delta{0, 0, 0};
    double best = placement_objective(delta, frames[t], contact_object, scene);

    // compass search: the contact distances are non-differentiable at their
    // minima, so axis probes with a shrinking step are more reliable than
    // gradients here
    double step = max_shift / 4.0;
    while (step > 1e-6) {
      bool improved = false;
      for (int axis = 0; axis < 3; ++axis) {
        for (double sign : {1.0, -1.0}) {
          geom::Vec3 cand = delta;
          (axis == 0 ? cand.x : axis == 1 ? cand.y : cand.z) += sign * step;
          const double len = cand.norm();
          if (len > max_shift) cand = cand * (max_shift / len);
          const double value = placement_objective(cand, frames[t], contact_object, scene);
          if (value < best - 1e-15) {
            best = value;
            delta = cand;
            improved = true;
          }
        }
      }
      if (!improved) step *= 0.5;
    }
    deltas[t] = delta;
  });
  return deltas;
}

}  // namespace roomfit::body
