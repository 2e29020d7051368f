#include <algorithm>
#include <cmath>
#include <limits>

#include "doctest.h"
#include "roomfit/body/body.hpp"
#include "roomfit/geom/primitives.hpp"
#include "roomfit/rng.hpp"

using namespace roomfit;
using namespace roomfit::body;
using geom::Vec3;

namespace {

raster::Intrinsics test_intr() {
  raster::Intrinsics intr;
  intr.fx = 500.0;
  intr.fy = 500.0;
  intr.cx = 320.0;
  intr.cy = 240.0;
  intr.width = 640;
  intr.height = 480;
  return intr;
}

BodyFrame frame_with_feet(const std::vector<Vec3>& foot_positions) {
  BodyFrame f;
  f.mesh.vertices = foot_positions;
  for (size_t i = 0; i < foot_positions.size(); ++i)
    f.feet_contacts.push_back(static_cast<int>(i));
  return f;
}

std::vector<BodyFrame> joint_track(const std::vector<std::vector<Vec3>>& joints) {
  std::vector<BodyFrame> frames(joints.size());
  for (size_t t = 0; t < joints.size(); ++t) {
    frames[t].timestamp = static_cast<int>(t);
    frames[t].joints = joints[t];
  }
  return frames;
}

}  // namespace

TEST_SUITE("body") {

TEST_CASE("robustifier analytic values") {
  CHECK(geman_mcclure(0.0, 0.1) == 0.0);
  // r == sigma sits exactly halfway to the saturation value
  CHECK(geman_mcclure(0.1, 0.1) == doctest::Approx(0.005).epsilon(1e-12));
  CHECK(geman_mcclure(1e9, 0.1) == doctest::Approx(0.01).epsilon(1e-6));
  CHECK(geman_mcclure(-0.1, 0.1) == geman_mcclure(0.1, 0.1));

  SUBCASE("quadratic near zero") {
    for (double r : {1e-4, 5e-4, 1e-3}) {
      const double ratio = geman_mcclure(r, 0.1) / (r * r);
      CHECK(std::abs(ratio - 1.0) < 1e-3);
    }
  }

  SUBCASE("monotone in |r| and bounded") {
    double prev = -1.0;
    for (double r = 0.0; r < 2.0; r += 0.01) {
      const double v = geman_mcclure(r, 0.1);
      CHECK(v >= prev);
      CHECK(v <= 0.01);
      prev = v;
    }
  }

  SUBCASE("vector form sums components") {
    const double rs[3] = {0.1, 0.2, -0.1};
    const double expect = geman_mcclure(0.1, 0.1) + geman_mcclure(0.2, 0.1) +
                          geman_mcclure(-0.1, 0.1);
    CHECK(geman_mcclure(std::span<const double>(rs), 0.1) ==
          doctest::Approx(expect).epsilon(1e-15));
  }

  CHECK_THROWS_AS(geman_mcclure(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("feet loss hand cases") {
  SUBCASE("feet exactly on the ground plane: zero") {
    const auto f = frame_with_feet({{0.3, 1.2, 2.0}, {-0.4, 1.2, 3.0}});
    CHECK(feet_loss(0.0, 0.0, 1.2, {f}) == 0.0);
  }

  SUBCASE("one vertex 0.1 above the plane") {
    const auto f = frame_with_feet({{0.0, 1.3, 2.0}});
    CHECK(feet_loss(0.0, 0.0, 1.2, {f}) == doctest::Approx(0.005).epsilon(1e-12));
  }

  SUBCASE("mean over all foot vertices of all frames") {
    const auto a = frame_with_feet({{0.0, 1.3, 2.0}});
    const auto b = frame_with_feet({{0.5, 1.2, 2.5}, {0.7, 1.2, 2.5}});
    // one residual of 0.1 and two of zero
    CHECK(feet_loss(0.0, 0.0, 1.2, {a, b}) == doctest::Approx(0.005 / 3.0).epsilon(1e-12));
  }

  SUBCASE("rotation puts tilted feet back on the plane") {
    // feet on a plane tilted by pitch 0.1: applying the inverse camera
    // rotation must recover height y_gp exactly
    const double pitch = 0.1;
    const geom::Mat3 rot = geom::Mat3::rot_x(pitch);
    std::vector<Vec3> feet;
    Rng rng(91);
    for (int i = 0; i < 20; ++i) {
      const Vec3 world{rng.uniform(-1.0, 1.0), 0.8, rng.uniform(1.5, 4.0)};
      feet.push_back(rot * world);
    }
    const auto f = frame_with_feet(feet);
    CHECK(feet_loss(pitch, 0.0, 0.8, {f}) == doctest::Approx(0.0).epsilon(1e-18));
    CHECK(feet_loss(0.0, 0.0, 0.8, {f}) > 1e-4);
  }

  SUBCASE("frame permutation invariance") {
    const auto a = frame_with_feet({{0.0, 1.25, 2.0}});
    const auto b = frame_with_feet({{0.1, 1.31, 2.2}, {0.4, 1.18, 2.4}});
    const auto c = frame_with_feet({{-0.2, 1.22, 1.9}});
    CHECK(feet_loss(0.02, -0.01, 1.2, {a, b, c}) == feet_loss(0.02, -0.01, 1.2, {c, a, b}));
  }

  const BodyFrame empty;
  CHECK_THROWS_AS(feet_loss(0.0, 0.0, 0.0, {empty}), std::invalid_argument);
}

TEST_CASE("smoothness loss hand cases") {
  const auto intr = test_intr();

  SUBCASE("constant velocity: the spatial term vanishes") {
    std::vector<std::vector<Vec3>> joints;
    for (int t = 0; t < 6; ++t)
      joints.push_back({{0.1 * t, 0.2 - 0.05 * t, 2.0 + 0.3 * t}});
    const auto terms = smoothness_terms(joints, intr);
    CHECK(terms.spatial < 1e-18);
    // perspective division bends the projected track, so that term stays
    CHECK(terms.projected >= 0.0);
  }

  SUBCASE("single kink of magnitude 0.4") {
    const std::vector<std::vector<Vec3>> joints = {
        {{0.0, 0.0, 2.0}}, {{0.0, 0.2, 2.0}}, {{0.0, 0.0, 2.0}}};
    const auto terms = smoothness_terms(joints, intr);
    CHECK(terms.spatial == doctest::Approx(0.009412).epsilon(1e-4));
    CHECK(terms.projected > 0.0);
  }

  SUBCASE("motion along the optical ray leaves no projected residual") {
    const std::vector<std::vector<Vec3>> joints = {
        {{0.0, 0.0, 1.0}}, {{0.0, 0.0, 2.5}}, {{0.0, 0.0, 3.0}}};
    const auto terms = smoothness_terms(joints, intr);
    CHECK(terms.projected < 1e-9);
    CHECK(terms.spatial > 0.0);
  }

  SUBCASE("fewer than three frames: zero with a warning") {
    CHECK(smoothness_loss({{{0, 0, 2}}, {{0, 0, 2}}}, intr) == 0.0);
  }
}

TEST_CASE("trajectory smoothing") {
  SUBCASE("lambda zero returns the observations untouched") {
    auto frames = joint_track({{{0, 0, 2}}, {{0.5, 0.1, 2}}, {{0.2, 0.3, 2}}, {{0.9, 0.2, 2}}});
    const auto reference = frames;
    smooth_trajectories(frames, 0.0);
    for (size_t t = 0; t < frames.size(); ++t) {
      CHECK(frames[t].joints[0].x == doctest::Approx(reference[t].joints[0].x).epsilon(1e-14));
      CHECK(frames[t].joints[0].y == doctest::Approx(reference[t].joints[0].y).epsilon(1e-14));
    }
  }

  SUBCASE("huge lambda straightens the track to a least-squares line") {
    Rng rng(7);
    std::vector<std::vector<Vec3>> joints;
    for (int t = 0; t < 30; ++t)
      joints.push_back({{0.1 * t + rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2), 2.0}});
    auto frames = joint_track(joints);
    smooth_trajectories(frames, 1e12);
    // second differences collapse
    for (size_t t = 1; t + 1 < frames.size(); ++t) {
      const Vec3 acc =
          frames[t - 1].joints[0] + frames[t + 1].joints[0] - frames[t].joints[0] * 2.0;
      CHECK(acc.norm() < 1e-8);
    }
    // the line still tracks the data trend: slope near 0.1 per frame
    const double slope =
        (frames[29].joints[0].x - frames[0].joints[0].x) / 29.0;
    CHECK(slope == doctest::Approx(0.1).epsilon(0.2));
  }

  SUBCASE("noise on a sine track shrinks at least twofold") {
    Rng rng(23);
    std::vector<std::vector<Vec3>> clean, noisy;
    for (int t = 0; t < 120; ++t) {
      const Vec3 c{std::sin(0.05 * t), std::cos(0.05 * t), 2.0 + 0.01 * t};
      clean.push_back({c});
      noisy.push_back({c + Vec3{rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05),
                                rng.uniform(-0.05, 0.05)}});
    }
    auto frames = joint_track(noisy);
    smooth_trajectories(frames, 10.0);
    double err_in = 0.0, err_out = 0.0;
    for (int t = 0; t < 120; ++t) {
      err_in += (noisy[t][0] - clean[t][0]).squared_norm();
      err_out += (frames[t].joints[0] - clean[t][0]).squared_norm();
    }
    CHECK(std::sqrt(err_out) < 0.5 * std::sqrt(err_in));
  }

  SUBCASE("repeat application is a fixed point") {
    Rng rng(41);
    std::vector<std::vector<Vec3>> joints;
    for (int t = 0; t < 40; ++t)
      joints.push_back({{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), 2.0},
                        {rng.uniform(-1.0, 1.0), 0.5, 3.0}});
    auto frames = joint_track(joints);
    smooth_trajectories(frames, 10.0);
    const auto once = frames;
    smooth_trajectories(frames, 10.0);
    for (size_t t = 0; t < frames.size(); ++t)
      for (size_t k = 0; k < frames[t].joints.size(); ++k)
        CHECK((frames[t].joints[k] - once[t].joints[k]).norm() < 1e-8);
  }

  std::vector<BodyFrame> three(3);
  CHECK_THROWS_AS(smooth_trajectories(three, -1.0), std::invalid_argument);
}

TEST_CASE("outlier frame filter") {
  TrajectoryFilterConfig config;

  auto track = [](const std::vector<Vec3>& pelvis) {
    std::vector<std::vector<Vec3>> joints;
    for (const auto& p : pelvis) joints.push_back({p, p + Vec3{0.0, 0.5, 0.0}});
    return joint_track(joints);
  };

  SUBCASE("constant velocity keeps everything") {
    std::vector<Vec3> pelvis;
    for (int t = 0; t < 10; ++t) pelvis.push_back({0.02 * t, 1.0, 2.0});
    const auto kept = filter_outlier_frames(track(pelvis), config);
    CHECK(kept.size() == 10);
  }

  SUBCASE("a teleported frame is dropped") {
    std::vector<Vec3> pelvis;
    for (int t = 0; t < 10; ++t) pelvis.push_back({0.02 * t, 1.0, 2.0});
    pelvis[5].x += 1.0;
    const auto kept = filter_outlier_frames(track(pelvis), config);
    // the spike bends the second difference at frames 4, 5 and 6
    for (int t : {4, 5, 6}) CHECK(std::find(kept.begin(), kept.end(), t) == kept.end());
    for (int t : {0, 1, 2, 3, 7, 8, 9})
      CHECK(std::find(kept.begin(), kept.end(), t) != kept.end());
  }

  SUBCASE("a flailing joint is dropped even with a calm pelvis") {
    std::vector<Vec3> pelvis;
    for (int t = 0; t < 8; ++t) pelvis.push_back({0.01 * t, 1.0, 2.0});
    auto frames = track(pelvis);
    frames[3].joints[1].y += 0.5;
    const auto kept = filter_outlier_frames(frames, config);
    CHECK(std::find(kept.begin(), kept.end(), 3) == kept.end());
    CHECK(std::find(kept.begin(), kept.end(), 0) != kept.end());
  }

  SUBCASE("boundary frames always survive") {
    std::vector<Vec3> pelvis = {{0, 1, 2}, {5, 1, 2}, {0, 1, 2}, {5, 1, 2}, {0, 1, 2}};
    const auto kept = filter_outlier_frames(track(pelvis), config);
    CHECK(std::find(kept.begin(), kept.end(), 0) != kept.end());
    CHECK(std::find(kept.begin(), kept.end(), 4) != kept.end());
    CHECK(kept.size() == 2);
  }

  SUBCASE("loosening thresholds only adds frames") {
    Rng rng(77);
    std::vector<Vec3> pelvis;
    for (int t = 0; t < 40; ++t)
      pelvis.push_back({0.02 * t + rng.uniform(-0.05, 0.05), 1.0, rng.uniform(1.9, 2.1)});
    const auto frames = track(pelvis);
    const auto tight = filter_outlier_frames(frames, config);
    TrajectoryFilterConfig loose;
    loose.tau_pelvis = config.tau_pelvis * 4.0;
    loose.tau_local = config.tau_local * 4.0;
    const auto relaxed = filter_outlier_frames(frames, loose);
    for (int t : tight) CHECK(std::find(relaxed.begin(), relaxed.end(), t) != relaxed.end());
    TrajectoryFilterConfig infinite;
    infinite.tau_pelvis = std::numeric_limits<double>::infinity();
    infinite.tau_local = std::numeric_limits<double>::infinity();
    CHECK(filter_outlier_frames(frames, infinite).size() == frames.size());
  }

  TrajectoryFilterConfig bad;
  bad.tau_pelvis = 0.0;
  CHECK_THROWS_AS(filter_outlier_frames(track({{0, 0, 0}, {0, 0, 0}, {0, 0, 0}}), bad),
                  std::invalid_argument);
}

TEST_CASE("scene-conditioned body refinement") {
  // table whose top surface sits at y = 0.5
  const auto table = geom::make_box_grid({1.2, 0.5, 1.2}, 4, 2, 4);
  const auto regions = hsi::extract_contact_regions(table, hsi::Category::Table);
  REQUIRE_FALSE(regions.seat.empty());

  auto body_at = [](double y_offset) {
    BodyFrame f;
    f.mesh = geom::make_uv_sphere(0.15, 24, 12);
    for (auto& v : f.mesh.vertices) v = v + Vec3{0.0, 0.65 + y_offset, 0.0};
    // lowest vertex acts as the contact point
    int lowest = 0;
    for (size_t i = 0; i < f.mesh.vertices.size(); ++i)
      if (f.mesh.vertices[i].y < f.mesh.vertices[lowest].y) lowest = static_cast<int>(i);
    f.body_contacts = {lowest};
    return f;
  };
  auto assigned = [](size_t n_frames) {
    hsi::ContactAssignment a;
    a.object_of.assign(n_frames, {0});
    return a;
  };

  SUBCASE("already consistent: delta stays near zero") {
    const auto frames = std::vector<BodyFrame>{body_at(0.0)};
    const auto deltas = refine_body_placement(frames, {table}, {regions}, assigned(1));
    CHECK(deltas[0].norm() < 1e-3);
  }

  SUBCASE("hovering 5 cm above the seat: pulled down by 5 cm") {
    const auto frames = std::vector<BodyFrame>{body_at(0.05)};
    const auto deltas = refine_body_placement(frames, {table}, {regions}, assigned(1));
    CHECK(std::abs(deltas[0].y + 0.05) < 0.01);
  }

  SUBCASE("sunk 5 cm into the table: pushed up") {
    const auto frames = std::vector<BodyFrame>{body_at(-0.05)};
    const auto deltas = refine_body_placement(frames, {table}, {regions}, assigned(1));
    CHECK(deltas[0].y >= 0.04);
  }

  SUBCASE("the shift never exceeds the cap") {
    auto f = body_at(2.0);  // hopelessly far above
    const auto deltas = refine_body_placement({f}, {table}, {regions}, assigned(1), 0.3);
    CHECK(deltas[0].norm() <= 0.3 + 1e-9);
  }

  SUBCASE("mismatched assignment rows throw") {
    const auto frames = std::vector<BodyFrame>{body_at(0.0)};
    hsi::ContactAssignment bad;
    CHECK_THROWS_AS(refine_body_placement(frames, {table}, {regions}, bad),
                    std::invalid_argument);
  }
}

TEST_CASE("body frame validation") {
  BodyFrame f;
  f.mesh.vertices = {{0, 0, 0}, {1, 0, 0}};
  f.joints = {{0, 0, 0}};
  f.feet_contacts = {0, 1};
  CHECK_NOTHROW(f.validate());
  f.feet_contacts = {2};
  CHECK_THROWS_AS(f.validate(), std::invalid_argument);
  f.feet_contacts = {};
  f.joints = {{std::numeric_limits<double>::quiet_NaN(), 0, 0}};
  CHECK_THROWS_AS(f.validate(), std::invalid_argument);
  f.joints = {{0, 0, 0}};
  f.joints_observed = {{0, 0, 0}, {1, 1, 1}};
  CHECK_THROWS_AS(f.validate(), std::invalid_argument);
}

}  // TEST_SUITE
