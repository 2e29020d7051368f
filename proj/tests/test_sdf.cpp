#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>

#include "doctest.h"
#include "roomfit/geom/primitives.hpp"
#include "roomfit/parallel.hpp"
#include "roomfit/rng.hpp"
#include "roomfit/sdf/sdf.hpp"

using namespace roomfit;
using namespace roomfit::sdf;
using geom::Vec3;

namespace {

geom::TriMesh sphere_at(const Vec3& center, double radius, int slices = 64, int stacks = 32) {
  geom::TriMesh m = geom::make_uv_sphere(radius, slices, stacks);
  for (auto& v : m.vertices) v = v + center;
  return m;
}

geom::TriMesh cube_at(const Vec3& base_center, const Vec3& extents) {
  geom::TriMesh m = geom::make_box(extents);
  for (auto& v : m.vertices) v = v + base_center;
  return m;
}

}  // namespace

TEST_SUITE("sdf") {

TEST_CASE("grid spans the padded union box") {
  // make_box is centered in xz with its base on y=0
  const auto cube = cube_at({0, 0, 0}, {1, 1, 1});

  SUBCASE("single cube, no padding: exact fit") {
    const GridSpec spec = grid_from_bodies({cube}, 9, 0.0);
    CHECK(spec.voxel == doctest::Approx(1.0 / 8));
    CHECK(spec.nx == 9);
    CHECK(spec.ny == 9);
    CHECK(spec.nz == 9);
    CHECK(spec.origin.x == doctest::Approx(-0.5));
    CHECK(spec.origin.y == doctest::Approx(0.0));
    CHECK(spec.max_corner().y == doctest::Approx(1.0));
  }

  SUBCASE("two separated cubes: grid covers both") {
    const auto far_cube = cube_at({5, 0, 0}, {1, 1, 1});
    const GridSpec spec = grid_from_bodies({cube, far_cube}, 33, 0.0);
    CHECK(spec.origin.x <= -0.5 + 1e-12);
    CHECK(spec.max_corner().x >= 5.5 - 1e-12);
    CHECK(spec.voxel == doctest::Approx(6.0 / 32));
  }

  SUBCASE("padding grows every extent by twice its value") {
    const GridSpec spec = grid_from_bodies({cube}, 15, 0.2);
    CHECK(spec.voxel == doctest::Approx(1.4 / 14));
    CHECK(spec.origin.x == doctest::Approx(-0.7));
    CHECK(spec.max_corner().x == doctest::Approx(0.7));
  }

  CHECK_THROWS_AS(grid_from_bodies({}, 16, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(grid_from_bodies({cube}, 1, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(grid_from_bodies({cube}, 16, -0.1), std::invalid_argument);
}

TEST_CASE("sphere volume matches the analytic signed distance") {
  const Vec3 center{0.2, 1.0, 3.0};
  const double r = 0.5;
  const auto sphere = sphere_at(center, r, 96, 48);
  const GridSpec spec = grid_from_bodies({sphere}, 48, 0.2);
  const SdfVolume vol = build_body_sdf(sphere, spec);
  const double diag = spec.diagonal();

  SUBCASE("hand-picked nodes") {
    // node nearest the sphere center
    const auto nearest = [&](double c, double o) {
      return static_cast<int>(std::lround((c - o) / spec.voxel));
    };
    const int ci = nearest(center.x, spec.origin.x);
    const int cj = nearest(center.y, spec.origin.y);
    const int ck = nearest(center.z, spec.origin.z);
    CHECK(std::abs(vol.at(ci, cj, ck) - (-r)) <= diag);

    const Vec3 corner = spec.node_position(0, 0, 0);
    const double expect = (corner - center).norm() - r;
    CHECK(std::abs(vol.at(0, 0, 0) - expect) <= diag);
  }

  SUBCASE("trilinear samples stay within two voxel diagonals of analytic") {
    Rng rng(101);
    const Vec3 lo = spec.origin;
    const Vec3 hi = spec.max_corner();
    for (int t = 0; t < 10000; ++t) {
      const Vec3 p{rng.uniform(lo.x, hi.x), rng.uniform(lo.y, hi.y), rng.uniform(lo.z, hi.z)};
      const double analytic = (p - center).norm() - r;
      CHECK(std::abs(vol.sample(p) - analytic) <= 2.0 * diag);
    }
  }
}

TEST_CASE("sign agrees with analytic containment away from the surface") {
  const auto box = cube_at({0.5, 0.2, 2.0}, {0.8, 0.6, 0.5});
  const geom::Aabb b = box.bounds();
  const GridSpec spec = grid_from_bodies({box}, 40, 0.15);
  const SdfVolume vol = build_body_sdf(box, spec);

  Rng rng(102);
  const Vec3 lo = spec.origin;
  const Vec3 hi = spec.max_corner();
  const auto inside_box = [&](const Vec3& p) {
    return p.x > b.min.x && p.x < b.max.x && p.y > b.min.y && p.y < b.max.y && p.z > b.min.z &&
           p.z < b.max.z;
  };
  const auto surface_distance = [&](const Vec3& p) {
    // for an axis-aligned box: inside -> min face distance, outside -> AABB distance
    if (inside_box(p)) {
      double m = hi.x;  // any large start
      m = std::min({p.x - b.min.x, b.max.x - p.x, p.y - b.min.y, b.max.y - p.y, p.z - b.min.z,
                    b.max.z - p.z});
      return m;
    }
    return std::sqrt(b.squared_distance(p));
  };
  int checked = 0;
  for (int t = 0; t < 10000; ++t) {
    const Vec3 p{rng.uniform(lo.x, hi.x), rng.uniform(lo.y, hi.y), rng.uniform(lo.z, hi.z)};
    if (surface_distance(p) <= spec.voxel) continue;  // skip the ambiguous shell
    ++checked;
    CHECK((vol.sample(p) < 0.0) == inside_box(p));
  }
  CHECK(checked > 7000);
}

TEST_CASE("non-watertight meshes are rejected with the failure counts") {
  auto open_mesh = geom::make_box({1, 1, 1});
  open_mesh.faces.pop_back();
  const GridSpec spec = grid_from_bodies({open_mesh}, 8, 0.1);
  CHECK_THROWS_WITH_AS(build_body_sdf(open_mesh, spec),
                       doctest::Contains("boundary"), std::invalid_argument);
}

TEST_CASE("min accumulation") {
  const auto a = sphere_at({0, 0, 0}, 0.4, 32, 16);
  const auto b = sphere_at({1.5, 0, 0}, 0.4, 32, 16);
  const GridSpec spec = grid_from_bodies({a, b}, 40, 0.1);
  const SdfVolume va = build_body_sdf(a, spec);
  const SdfVolume vb = build_body_sdf(b, spec);

  SUBCASE("single volume is unchanged") {
    const SdfVolume out = accumulate_min({va});
    CHECK(std::memcmp(out.field.data(), va.field.data(), va.field.size() * sizeof(float)) == 0);
  }

  SUBCASE("a far-positive volume is the identity") {
    SdfVolume far = va;
    std::fill(far.field.begin(), far.field.end(), float(kOutsideSdf));
    const SdfVolume out = accumulate_min({va, far});
    CHECK(std::memcmp(out.field.data(), va.field.data(), va.field.size() * sizeof(float)) == 0);
  }

  SUBCASE("disjoint spheres carve a union: both centers negative") {
    const SdfVolume out = accumulate_min({va, vb});
    CHECK(out.sample({0, 0, 0}) < 0.0);
    CHECK(out.sample({1.5, 0, 0}) < 0.0);
    CHECK(out.sample({0.75, 0, 0}) > 0.0);
    // never above either input anywhere
    for (size_t i = 0; i < out.field.size(); ++i) {
      CHECK(out.field[i] <= va.field[i]);
      CHECK(out.field[i] <= vb.field[i]);
    }
  }

  SUBCASE("commutative, associative, idempotent") {
    const SdfVolume ab = accumulate_min({va, vb});
    const SdfVolume ba = accumulate_min({vb, va});
    CHECK(std::memcmp(ab.field.data(), ba.field.data(), ab.field.size() * sizeof(float)) == 0);
    const SdfVolume aab = accumulate_min({va, va, vb});
    CHECK(std::memcmp(ab.field.data(), aab.field.data(), ab.field.size() * sizeof(float)) == 0);
  }

  SUBCASE("streaming min_into equals the list form") {
    SdfVolume acc = va;
    min_into(acc, vb);
    const SdfVolume out = accumulate_min({va, vb});
    CHECK(std::memcmp(acc.field.data(), out.field.data(), acc.field.size() * sizeof(float)) == 0);
  }

  SUBCASE("mismatched specs are rejected") {
    SdfVolume other = va;
    other.spec.voxel *= 2.0;
    CHECK_THROWS_AS(accumulate_min({va, other}), std::invalid_argument);
  }
}

TEST_CASE("sampling semantics") {
  const auto sphere = sphere_at({0, 0, 0}, 0.5, 48, 24);
  const GridSpec spec = grid_from_bodies({sphere}, 24, 0.2);
  const SdfVolume vol = build_body_sdf(sphere, spec);

  // exact node
  const Vec3 node = spec.node_position(3, 4, 5);
  CHECK(vol.sample(node) == doctest::Approx(double(vol.at(3, 4, 5))).epsilon(1e-12));

  // midpoint along x between two nodes
  const Vec3 mid = node + Vec3{spec.voxel * 0.5, 0, 0};
  const double mean = 0.5 * (double(vol.at(3, 4, 5)) + double(vol.at(4, 4, 5)));
  CHECK(vol.sample(mid) == doctest::Approx(mean).epsilon(1e-9));

  // outside
  CHECK(vol.sample(spec.origin - Vec3{1, 0, 0}) == kOutsideSdf);
  CHECK(vol.sample(spec.max_corner() + Vec3{0, 0, 0.01}) == kOutsideSdf);
}

TEST_CASE("volume build is byte-identical across thread counts") {
  const auto sphere = sphere_at({0.1, -0.2, 1.0}, 0.45, 48, 24);
  const GridSpec spec = grid_from_bodies({sphere}, 32, 0.1);
  set_thread_count(1);
  const SdfVolume v1 = build_body_sdf(sphere, spec);
  set_thread_count(8);
  const SdfVolume v8 = build_body_sdf(sphere, spec);
  set_thread_count(0);
  CHECK(std::memcmp(v1.field.data(), v8.field.data(), v1.field.size() * sizeof(float)) == 0);
}

TEST_CASE("raw dump round trips bitwise") {
  const auto sphere = sphere_at({0, 0.3, 0}, 0.3, 32, 16);
  const GridSpec spec = grid_from_bodies({sphere}, 16, 0.1);
  const SdfVolume vol = build_body_sdf(sphere, spec);
  const auto base = (std::filesystem::temp_directory_path() / "roomfit_test_volume").string();
  save_volume(vol, base);
  const SdfVolume loaded = load_volume(base);
  CHECK(loaded.spec == vol.spec);
  CHECK(std::memcmp(loaded.field.data(), vol.field.data(), vol.field.size() * sizeof(float)) == 0);
  std::remove((base + ".raw").c_str());
  std::remove((base + ".json").c_str());
}

}  // TEST_SUITE
