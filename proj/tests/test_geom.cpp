#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "roomfit/geom/box.hpp"
#include "roomfit/geom/bvh.hpp"
#include "roomfit/geom/nn.hpp"
#include "roomfit/geom/pose.hpp"
#include "roomfit/geom/primitives.hpp"
#include "roomfit/rng.hpp"

using namespace roomfit;
using namespace roomfit::geom;

namespace {

double signed_volume(const TriMesh& m) {
  double v = 0.0;
  for (const auto& f : m.faces)
    v += m.vertices[f[0]].dot(m.vertices[f[1]].cross(m.vertices[f[2]])) / 6.0;
  return v;
}

}  // namespace

TEST_SUITE("geom") {

TEST_CASE("apply_pose transforms scale then yaw then translation") {
  TriMesh m;
  m.vertices = {{0.5, 0.0, 0.5}};
  m.faces = {};
  PoseParams p;
  p.scale = {2.0, 1.0, 1.0};
  p.yaw = kPi / 2.0;
  p.translation = {1.0, 0.0, 0.0};
  const Vec3 v = pose_point(p, m.vertices[0]);
  CHECK(v.x == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(v.y == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(v.z == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("apply_pose round trips through the inverse pose") {
  Rng rng(7);
  TriMesh m = make_box({0.8, 0.5, 1.2});
  PoseParams p;
  p.scale = {1.3, 0.7, 1.9};
  p.yaw = 2.1;
  p.translation = {0.4, -1.0, 2.5};
  TriMesh posed = apply_pose(m, p);

  // undo translation + yaw, then scale
  PoseParams unrot;
  unrot.yaw = -p.yaw;
  unrot.translation = {};
  for (Vec3& v : posed.vertices) v -= p.translation;
  pose_points(unrot, posed.vertices, posed.vertices);
  for (size_t i = 0; i < m.vertices.size(); ++i) {
    const Vec3 back = {posed.vertices[i].x / p.scale.x, posed.vertices[i].y / p.scale.y,
                       posed.vertices[i].z / p.scale.z};
    CHECK((back - m.vertices[i]).norm() < 1e-9);
  }
}

TEST_CASE("apply_pose wraps yaw and rejects non-positive scale") {
  TriMesh m = make_box({1, 1, 1});
  PoseParams a, b;
  a.yaw = 0.3;
  b.yaw = 0.3 + kTwoPi;
  const TriMesh ma = apply_pose(m, a), mb = apply_pose(m, b);
  for (size_t i = 0; i < ma.vertices.size(); ++i)
    CHECK((ma.vertices[i] - mb.vertices[i]).norm() < 1e-12);

  PoseParams bad;
  bad.scale = {1.0, 0.0, 1.0};
  CHECK_THROWS_AS(apply_pose(m, bad), std::invalid_argument);
  bad.scale = {-1.0, 1.0, 1.0};
  CHECK_THROWS_AS(apply_pose(m, bad), std::invalid_argument);
}

TEST_CASE("apply_pose recomputes unit normals") {
  TriMesh m = make_box({1, 2, 3});
  m.compute_vertex_normals();
  PoseParams p;
  p.scale = {2.0, 0.5, 1.0};
  p.yaw = 1.0;
  TriMesh posed = apply_pose(m, p);
  REQUIRE(posed.has_normals());
  for (const Vec3& n : posed.normals) CHECK(std::abs(n.norm() - 1.0) < 1e-6);
}

TEST_CASE("oriented_iou3d matches hand-computed overlaps") {
  OrientedBox a;
  a.center = {0, 0.5, 0};
  a.half = {0.5, 0.5, 0.5};

  SUBCASE("identical boxes") { CHECK(oriented_iou3d(a, a) == doctest::Approx(1.0)); }

  SUBCASE("unit cubes offset by half give one third") {
    OrientedBox b = a;
    b.center.x += 0.5;
    CHECK(oriented_iou3d(a, b) == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
    CHECK(oriented_iou3d(b, a) == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
  }

  SUBCASE("45 degree yaw gives exactly 1/sqrt(2)") {
    OrientedBox b = a;
    b.yaw = kPi / 4.0;
    CHECK(oriented_iou3d(a, b) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-9));
  }

  SUBCASE("disjoint and y-separated boxes give zero") {
    OrientedBox b = a;
    b.center = {5, 0.5, 0};
    CHECK(oriented_iou3d(a, b) == 0.0);
    b.center = {0, 5.0, 0};
    CHECK(oriented_iou3d(a, b) == 0.0);
  }
}

TEST_CASE("oriented_iou3d is symmetric and yaw-shift invariant") {
  Rng rng(11);
  for (int it = 0; it < 50; ++it) {
    OrientedBox a, b;
    a.center = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    a.half = {rng.uniform(0.2, 1), rng.uniform(0.2, 1), rng.uniform(0.2, 1)};
    a.yaw = rng.uniform(0, kTwoPi);
    b.center = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    b.half = {rng.uniform(0.2, 1), rng.uniform(0.2, 1), rng.uniform(0.2, 1)};
    b.yaw = rng.uniform(0, kTwoPi);
    const double ab = oriented_iou3d(a, b);
    CHECK(ab == doctest::Approx(oriented_iou3d(b, a)).epsilon(1e-9));
    CHECK(ab >= 0.0);
    CHECK(ab <= 1.0 + 1e-12);

    // rotating both boxes together about the origin preserves IoU
    const double shift = rng.uniform(0, kTwoPi);
    auto rotated = [&](OrientedBox box) {
      const double c = std::cos(shift), s = std::sin(shift);
      box.center = {c * box.center.x + s * box.center.z, box.center.y,
                    -s * box.center.x + c * box.center.z};
      box.yaw += shift;
      return box;
    };
    CHECK(oriented_iou3d(rotated(a), rotated(b)) == doctest::Approx(ab).epsilon(1e-7));
  }
}

TEST_CASE("pose_box carries the canonical bounds through the pose") {
  const TriMesh box = make_box({1.0, 2.0, 0.5});
  PoseParams p;
  p.scale = {2.0, 1.0, 4.0};
  p.yaw = kPi / 2.0;
  p.translation = {1.0, 0.5, 0.0};
  const OrientedBox ob = pose_box(box.bounds(), p);
  // canonical center (0,1,0) -> scaled (0,1,0) -> unchanged by yaw -> +t
  CHECK(ob.center.x == doctest::Approx(1.0));
  CHECK(ob.center.y == doctest::Approx(1.5));
  CHECK(ob.center.z == doctest::Approx(0.0));
  CHECK(ob.half.x == doctest::Approx(1.0));
  CHECK(ob.half.y == doctest::Approx(1.0));
  CHECK(ob.half.z == doctest::Approx(1.0));
  CHECK(ob.yaw == doctest::Approx(kPi / 2.0));

  // posed mesh vertices fall inside the posed box footprint
  const TriMesh posed = apply_pose(box, p);
  const auto corners = ob.corners();
  Aabb cb;
  for (const Vec3& c : corners) cb.expand(c);
  for (const Vec3& v : posed.vertices) CHECK(cb.contains(v));
}

TEST_CASE("point_to_surface agrees with the analytic sphere") {
  const TriMesh sphere = make_uv_sphere(2.0, 48, 32);
  const TriBvh bvh(sphere);

  // mesh vertices lie exactly on the surface
  CHECK(point_to_surface(sphere.vertices, bvh) < 1e-12);

  // center sits one radius away, up to faceting
  const Vec3 center{0, 0, 0};
  CHECK(point_to_surface(std::span<const Vec3>(&center, 1), bvh) ==
        doctest::Approx(2.0).epsilon(0.01));

  // random outside points: distance to faceted sphere within faceting error
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const Vec3 dir =
        Vec3{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)}.normalized();
    const double r = rng.uniform(2.2, 5.0);
    const Vec3 p = dir * r;
    CHECK(bvh.distance(p) == doctest::Approx(r - 2.0).epsilon(0.02));
  }
}

TEST_CASE("one_sided_chamfer matches hand values and axis filters") {
  const std::vector<Vec3> dst = {{1, 0, 0}, {5, 5, 5}};
  const std::vector<Vec3> src = {{0, 0, 0}};
  CHECK(one_sided_chamfer(src, dst) == doctest::Approx(1.0));

  const std::vector<Vec3> src2 = {{0, 2, 0}};
  const std::vector<Vec3> dst2 = {{7, 1, 0}};
  CHECK(one_sided_chamfer(src2, dst2, AxisFilter::YOnly) == doctest::Approx(1.0));
  CHECK(one_sided_chamfer(src2, dst2, AxisFilter::XZOnly) == doctest::Approx(7.0));

  CHECK(one_sided_chamfer({}, dst) == 0.0);
  CHECK_THROWS_AS(one_sided_chamfer(src, std::span<const Vec3>{}), std::invalid_argument);
}

TEST_CASE("one_sided_chamfer never grows when the target gains points") {
  Rng rng(21);
  std::vector<Vec3> src, small, big;
  for (int i = 0; i < 40; ++i)
    src.push_back({rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)});
  for (int i = 0; i < 30; ++i)
    small.push_back({rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)});
  big = small;
  for (int i = 0; i < 30; ++i)
    big.push_back({rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)});
  for (auto f : {AxisFilter::All, AxisFilter::YOnly, AxisFilter::XZOnly})
    CHECK(one_sided_chamfer(src, big, f) <= one_sided_chamfer(src, small, f) + 1e-12);
}

TEST_CASE("chamfer via PointBvh equals brute force") {
  Rng rng(5);
  std::vector<Vec3> src, dst;
  for (int i = 0; i < 64; ++i)
    src.push_back({rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3)});
  for (int i = 0; i < 100; ++i)
    dst.push_back({rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3)});
  for (auto f : {AxisFilter::All, AxisFilter::YOnly, AxisFilter::XZOnly}) {
    const Vec3 w = axis_weights(f);
    double brute = 0.0;
    for (const Vec3& s : src) {
      double best = std::numeric_limits<double>::infinity();
      for (const Vec3& d : dst) {
        const Vec3 r = d - s;
        best = std::min(best, w.x * r.x * r.x + w.y * r.y * r.y + w.z * r.z * r.z);
      }
      brute += std::sqrt(best);
    }
    brute /= src.size();
    CHECK(one_sided_chamfer(src, dst, f) == doctest::Approx(brute).epsilon(1e-12));
  }
}

TEST_CASE("validate_watertight flags boundaries and non-manifold edges") {
  TriMesh cube = make_box({1, 1, 1});
  CHECK(validate_watertight(cube).watertight());

  TriMesh open = cube;
  open.faces.pop_back();
  const auto rep = validate_watertight(open);
  CHECK(rep.boundary_edges.size() == 3);
  CHECK(rep.nonmanifold_edges.empty());

  TriMesh doubled = cube;
  doubled.faces.push_back(doubled.faces.front());
  const auto rep2 = validate_watertight(doubled);
  CHECK(rep2.nonmanifold_edges.size() == 3);
}

TEST_CASE("primitive generators produce watertight outward meshes") {
  struct Case {
    TriMesh mesh;
    double volume;
    const char* name;
  };
  const double r = 0.3, cl = 0.5;
  std::vector<Case> cases;
  cases.push_back({make_box({0.8, 0.4, 1.2}, 3), 0.8 * 0.4 * 1.2, "box"});
  cases.push_back({make_uv_sphere(1.0, 64, 48), 4.0 / 3.0 * kPi, "sphere"});
  cases.push_back({make_capsule({0, 0, 0}, {0, cl, 0}, r, 48, 24),
                   kPi * r * r * cl + 4.0 / 3.0 * kPi * r * r * r, "capsule"});
  cases.push_back({make_seat_prism(0.9, 0.8, 0.45, 1.0, 0.1),
                   0.9 * (0.8 * 0.45 + 0.1 * 0.55), "seat prism"});
  // odd segment counts exercise the shared-lattice welding
  cases.push_back({make_box_grid({1.3, 0.8, 0.7}, 3, 2, 5), 1.3 * 0.8 * 0.7, "box grid"});
  for (const auto& c : cases) {
    CAPTURE(c.name);
    c.mesh.validate();
    CHECK(validate_watertight(c.mesh).watertight());
    CHECK(signed_volume(c.mesh) > 0.0);
    // tessellated round shapes under-fill their analytic volume slightly
    CHECK(signed_volume(c.mesh) == doctest::Approx(c.volume).epsilon(0.02));
  }
}

TEST_CASE("obj io round trips exactly") {
  TriMesh m = make_seat_prism(0.9, 0.8, 0.45, 1.0, 0.1);
  m.vertices[0] = {1.0 / 3.0, -2.0e-7, 5.123456789012345};
  const auto path = (std::filesystem::temp_directory_path() / "roomfit_geom_rt.obj").string();
  save_obj(m, path);
  const TriMesh back = load_obj(path);
  REQUIRE(back.vertices.size() == m.vertices.size());
  REQUIRE(back.faces.size() == m.faces.size());
  for (size_t i = 0; i < m.vertices.size(); ++i) {
    CHECK(back.vertices[i].x == m.vertices[i].x);
    CHECK(back.vertices[i].y == m.vertices[i].y);
    CHECK(back.vertices[i].z == m.vertices[i].z);
  }
  CHECK(back.faces == m.faces);
  std::filesystem::remove(path);
}

TEST_CASE("load_obj rejects malformed input") {
  namespace fs = std::filesystem;
  const auto path = (fs::temp_directory_path() / "roomfit_geom_bad.obj").string();
  {
    std::FILE* f = std::fopen(path.c_str(), "w");
    std::fputs("v 0 0 0\nv 1 0 0\nf 1 2 9\n", f);
    std::fclose(f);
  }
  CHECK_THROWS(load_obj(path));
  fs::remove(path);
  CHECK_THROWS(load_obj("/nonexistent/roomfit.obj"));
}

TEST_CASE("winding number separates inside from outside on convex shapes") {
  const TriMesh sphere = make_uv_sphere(1.0, 32, 24);
  TriBvh bvh(sphere);
  Rng rng(13);
  int checked = 0;
  for (int i = 0; i < 10000; ++i) {
    const Vec3 p{rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5)};
    const double r = p.norm();
    if (std::abs(r - 1.0) < 0.05) continue;  // skip the faceting band
    ++checked;
    CHECK(bvh.inside(p) == (r < 1.0));
  }
  CHECK(checked > 5000);

  // signed distance flips sign with containment
  CHECK(bvh.signed_distance({0, 0, 0}) < 0.0);
  CHECK(bvh.signed_distance({2, 0, 0}) > 0.0);
  CHECK(bvh.signed_distance({2, 0, 0}) == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("fast winding stays close to the exact sum") {
  const TriMesh mesh = make_seat_prism(0.9, 0.8, 0.45, 1.0, 0.1);
  TriBvh fast(mesh);
  TriBvh exact(mesh);
  exact.set_winding_beta(0.0);
  Rng rng(17);
  for (int i = 0; i < 500; ++i) {
    const Vec3 p{rng.uniform(-1, 1), rng.uniform(-0.5, 1.5), rng.uniform(-1, 1)};
    CHECK(fast.winding_number(p) == doctest::Approx(exact.winding_number(p)).epsilon(0.02));
  }
}

}  // TEST_SUITE
