#include <cmath>
#include <cstring>

#include "doctest.h"
#include "roomfit/geom/pose.hpp"
#include "roomfit/geom/primitives.hpp"
#include "roomfit/hsi/hsi.hpp"
#include "roomfit/raster/edt.hpp"
#include "roomfit/rng.hpp"

using namespace roomfit;
using namespace roomfit::hsi;
using geom::Vec3;
using raster::DepthMap;
using raster::Intrinsics;
using raster::MaskImage;

namespace {

Intrinsics test_intr() {
  Intrinsics intr;
  intr.fx = 300.0;
  intr.fy = 300.0;
  intr.cx = 160.0;
  intr.cy = 120.0;
  intr.width = 320;
  intr.height = 240;
  return intr;
}

geom::TriMesh quad_at(double half_x, double half_y, double z) {
  geom::TriMesh m;
  m.vertices = {{-half_x, -half_y, z}, {half_x, -half_y, z}, {half_x, half_y, z},
                {-half_x, half_y, z}};
  m.faces = {{0, 1, 2}, {0, 2, 3}};
  return m;
}

geom::TriMesh sphere_at(const Vec3& c, double r, int slices = 96, int stacks = 48) {
  geom::TriMesh m = geom::make_uv_sphere(r, slices, stacks);
  for (auto& v : m.vertices) v = v + c;
  return m;
}

MaskImage rect_mask(const Intrinsics& intr, int x0, int y0, int x1, int y1) {
  MaskImage m(intr.width, intr.height);
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) m.at(x, y) = 1;
  return m;
}

}  // namespace

TEST_SUITE("hsi") {

TEST_CASE("depth range maps follow the visibility split") {
  const Intrinsics intr = test_intr();
  // body quad at z=2 covering the image center, 60 px half-width
  const auto body = quad_at(0.4, 0.4, 2.0);
  const MaskImage body_sil = raster::render_silhouette(body.vertices, body.faces, intr);
  const MaskImage object_mask = rect_mask(intr, 140, 100, 220, 180);

  SUBCASE("person fully visible: only near bounds appear") {
    const auto ranges = frame_depth_ranges(intr, body, body_sil, {object_mask});
    REQUIRE(ranges.near.size() == 1);
    bool any_near = false;
    for (int y = 0; y < intr.height; ++y)
      for (int x = 0; x < intr.width; ++x) {
        const float nb = ranges.near[0].at(x, y);
        const float fb = ranges.far[0].at(x, y);
        CHECK(fb == std::numeric_limits<float>::infinity());
        const bool overlap = object_mask.at(x, y) && body_sil.at(x, y);
        if (overlap) {
          any_near = true;
          CHECK(nb == doctest::Approx(2.0));  // quad back depth
        } else {
          CHECK(nb == -std::numeric_limits<float>::infinity());
        }
      }
    CHECK(any_near);
  }

  SUBCASE("body pixels missing from the person mask become far bounds") {
    MaskImage person = body_sil;
    // carve out the object window: the object occludes the person there
    for (int y = 100; y < 180; ++y)
      for (int x = 140; x < 220; ++x) person.at(x, y) = 0;
    const auto ranges = frame_depth_ranges(intr, body, person, {object_mask});
    bool any_far = false;
    for (int y = 0; y < intr.height; ++y)
      for (int x = 0; x < intr.width; ++x) {
        const bool occluded = object_mask.at(x, y) && body_sil.at(x, y) && !person.at(x, y);
        if (occluded) {
          any_far = true;
          CHECK(ranges.far[0].at(x, y) == doctest::Approx(2.0));  // quad front depth
          CHECK(ranges.near[0].at(x, y) == -std::numeric_limits<float>::infinity());
        }
      }
    CHECK(any_far);
  }
}

TEST_CASE("sphere body yields its back depth as the near bound") {
  const Intrinsics intr = test_intr();
  const auto body = sphere_at({0, 0, 3}, 1.0);
  const MaskImage sil = raster::render_silhouette(body.vertices, body.faces, intr);
  const MaskImage object_mask = rect_mask(intr, 150, 110, 171, 131);
  const auto ranges = frame_depth_ranges(intr, body, sil, {object_mask});
  CHECK(ranges.near[0].at(160, 120) == doctest::Approx(4.0).epsilon(0.005));
}

TEST_CASE("depth range accumulation keeps the tightest bounds") {
  const Intrinsics intr = test_intr();
  auto make_frame = [&](float near_v, float far_v) {
    FrameDepthRanges f;
    f.near.emplace_back(intr.width, intr.height, near_v);
    f.far.emplace_back(intr.width, intr.height, far_v);
    return f;
  };
  const auto a = make_frame(2.0f, 5.0f);
  const auto b = make_frame(3.0f, 4.0f);

  SUBCASE("single frame is unchanged") {
    const auto acc = accumulate_depth_ranges({a});
    CHECK(acc.near[0].at(7, 7) == 2.0f);
    CHECK(acc.far[0].at(7, 7) == 5.0f);
  }

  SUBCASE("near takes the max, far the min") {
    const auto acc = accumulate_depth_ranges({a, b});
    CHECK(acc.near[0].at(0, 0) == 3.0f);
    CHECK(acc.far[0].at(0, 0) == 4.0f);
  }

  SUBCASE("accumulation is permutation-invariant bitwise") {
    const auto c = make_frame(2.5f, 4.5f);
    const auto abc = accumulate_depth_ranges({a, b, c});
    const auto cba = accumulate_depth_ranges({c, b, a});
    const auto bac = accumulate_depth_ranges({b, a, c});
    for (const auto* other : {&cba, &bac}) {
      CHECK(std::memcmp(abc.near[0].data(), other->near[0].data(),
                        abc.near[0].size() * sizeof(float)) == 0);
      CHECK(std::memcmp(abc.far[0].data(), other->far[0].data(),
                        abc.far[0].size() * sizeof(float)) == 0);
    }
  }

  SUBCASE("bounds tighten monotonically as frames append") {
    DepthRangeMaps acc;
    accumulate_into(acc, a);
    const float near_before = acc.near[0].at(3, 3);
    const float far_before = acc.far[0].at(3, 3);
    accumulate_into(acc, b);
    CHECK(acc.near[0].at(3, 3) >= near_before);
    CHECK(acc.far[0].at(3, 3) <= far_before);
  }
}

TEST_CASE("depth order loss hand cases") {
  const Intrinsics intr = test_intr();
  const geom::Mat3 eye = geom::Mat3::identity();
  const auto object = quad_at(0.3, 0.3, 5.0);
  const MaskImage mask = raster::render_silhouette(object.vertices, object.faces, intr);

  DepthRangeMaps maps;
  maps.near.emplace_back(intr.width, intr.height, -std::numeric_limits<float>::infinity());
  maps.far.emplace_back(intr.width, intr.height, std::numeric_limits<float>::infinity());

  SUBCASE("inside the window: zero") {
    maps.far[0].fill(6.0f);
    maps.near[0].fill(1.0f);
    CHECK(depth_order_loss(intr, eye, {object}, maps, {mask}) == 0.0);
  }

  SUBCASE("one unit beyond the far bound: mean exactly one") {
    maps.far[0].fill(4.0f);
    CHECK(depth_order_loss(intr, eye, {object}, maps, {mask}) == doctest::Approx(1.0).epsilon(1e-6));
  }

  SUBCASE("one unit inside the near bound: mean exactly one") {
    const auto close_obj = quad_at(0.3, 0.3, 2.0);
    const MaskImage m2 = raster::render_silhouette(close_obj.vertices, close_obj.faces, intr);
    maps.near[0].fill(3.0f);
    CHECK(depth_order_loss(intr, eye, {close_obj}, maps, {m2}) == doctest::Approx(1.0).epsilon(1e-6));
  }

  SUBCASE("pixels with only sentinel bounds do not contribute") {
    // leave both maps at sentinels: loss must be exactly zero
    CHECK(depth_order_loss(intr, eye, {object}, maps, {mask}) == 0.0);
  }
}

TEST_CASE("collision loss hand cases") {
  const Vec3 center{0, 0, 3};
  const auto body = sphere_at(center, 0.5, 96, 48);
  const auto spec = sdf::grid_from_bodies({body}, 64, 0.2);
  const auto sdf_vol = sdf::build_body_sdf(body, spec);

  SUBCASE("objects fully outside: zero") {
    geom::TriMesh far_obj = geom::make_box({0.5, 0.5, 0.5}, 2);
    for (auto& v : far_obj.vertices) v = v + Vec3{3, 0, 3};
    CHECK(collision_loss({far_obj}, sdf_vol) == 0.0);
  }

  SUBCASE("one vertex at the body center scores 0.25/N") {
    geom::TriMesh probe = geom::make_box({0.2, 0.2, 0.2}, 2);
    for (auto& v : probe.vertices) v = v + Vec3{5, 0, 3};  // far away
    probe.vertices.push_back(center);                      // stray vertex, faces untouched
    const double n = double(probe.vertices.size());
    CHECK(collision_loss({probe}, sdf_vol) == doctest::Approx(0.25 / n).epsilon(0.02));
  }

  SUBCASE("doubling the penetration quadruples the contribution") {
    // box body gives an exactly linear interior SDF away from corners
    const auto slab = geom::make_box_grid({2.0, 1.0, 2.0}, 8, 4, 8);
    const auto slab_spec = sdf::grid_from_bodies({slab}, 81, 0.0);
    const auto slab_sdf = sdf::build_body_sdf(slab, slab_spec);
    geom::TriMesh a;
    a.vertices = {{0, 0.9, 0}};  // 0.1 below the top face
    geom::TriMesh b;
    b.vertices = {{0, 0.8, 0}};  // 0.2 below
    const double la = collision_loss({a}, slab_sdf);
    const double lb = collision_loss({b}, slab_sdf);
    CHECK(lb == doctest::Approx(4.0 * la).epsilon(1e-3));
  }
}

TEST_CASE("contact regions by category") {
  SUBCASE("box as table: interior top nodes only") {
    const auto table = geom::make_box_grid({1.2, 0.7, 0.8}, 4, 2, 4);
    const auto regions = extract_contact_regions(table, Category::Table);
    CHECK(regions.back.empty());
    CHECK(regions.seat.size() == 9);  // 3x3 interior nodes of a 4x4 top grid
    for (int idx : regions.seat) CHECK(table.vertices[idx].y == doctest::Approx(0.7));
  }

  SUBCASE("bed keeps the top surface too") {
    const auto bed = geom::make_box_grid({1.8, 0.5, 2.0}, 6, 2, 6);
    const auto regions = extract_contact_regions(bed, Category::Bed);
    CHECK(regions.back.empty());
    CHECK(regions.seat.size() >= 25);  // interior lattice plus any qualifying rim nodes
    for (int idx : regions.seat) CHECK(bed.vertices[idx].y == doctest::Approx(0.5));
  }

  SUBCASE("composite chair: seat plate on top, backrest inner face behind") {
    // seat slab with a backrest slab rising at the -z edge
    geom::TriMesh chair = geom::make_box_grid({0.9, 0.45, 0.9}, 4, 2, 4);
    geom::TriMesh backrest = geom::make_box_grid({0.9, 0.55, 0.12}, 4, 3, 2);
    for (auto& v : backrest.vertices) v = v + Vec3{0, 0.45, -0.39};
    const size_t seat_verts = chair.vertices.size();
    geom::append_mesh(chair, backrest);

    const auto regions = extract_contact_regions(chair, Category::Chair);
    CHECK_FALSE(regions.seat.empty());
    CHECK_FALSE(regions.back.empty());
    for (int idx : regions.seat) {
      CHECK(static_cast<size_t>(idx) < seat_verts);  // below the 60% cutoff
      CHECK(chair.vertices[idx].y == doctest::Approx(0.45));
    }
    // forward-facing surfaces join the back set wherever they appear: the
    // backrest inner face and the front face of the seat slab both qualify
    int backrest_nodes = 0;
    int seat_front_nodes = 0;
    for (int idx : regions.back) {
      if (static_cast<size_t>(idx) >= seat_verts) {
        CHECK(chair.vertices[idx].z == doctest::Approx(-0.33));
        ++backrest_nodes;
      } else {
        CHECK(chair.vertices[idx].z == doctest::Approx(0.45));
        ++seat_front_nodes;
      }
    }
    CHECK(backrest_nodes >= 6);  // the interior lattice at minimum
    CHECK(seat_front_nodes == 3);
  }

  CHECK_THROWS_AS(category_from_string("lamp"), std::invalid_argument);
  CHECK(category_from_string("Sofa") == Category::Sofa);
}

TEST_CASE("contact assignment follows masks, radius, and ties") {
  const Intrinsics intr = test_intr();
  const geom::Mat3 eye = geom::Mat3::identity();

  // two tables side by side, world == camera frame
  auto left = geom::make_box_grid({0.8, 0.5, 0.8}, 2, 2, 2);
  for (auto& v : left.vertices) v = v + Vec3{-0.6, -0.2, 3.0};
  auto right = geom::make_box_grid({0.8, 0.5, 0.8}, 2, 2, 2);
  for (auto& v : right.vertices) v = v + Vec3{0.6, -0.2, 3.0};

  std::vector<MaskImage> masks;
  masks.push_back(raster::dilate(raster::render_silhouette(left.vertices, left.faces, intr), 25.0));
  masks.push_back(
      raster::dilate(raster::render_silhouette(right.vertices, right.faces, intr), 25.0));

  // one frame, three probes: above the left table, well in front of it, and
  // in the gap where the dilated masks overlap
  const std::vector<std::vector<Vec3>> verts = {
      {{-0.6, 0.35, 3.0}, {-0.6, 0.0, 2.0}, {0.01, 0.1, 3.0}}};
  const auto assignment = assign_contacts(intr, verts, eye, masks, {left, right}, 0.5);
  REQUIRE(assignment.object_of.size() == 1);
  REQUIRE(assignment.object_of[0].size() == 3);
  CHECK(assignment.object_of[0][0] == 0);   // inside left mask, 0.05 above the top
  CHECK(assignment.object_of[0][1] == -1);  // projects into the mask but 0.6 in front
  CHECK(assignment.object_of[0][2] == 1);   // both masks cover it; right surface is nearer

  const auto grouped = group_contact_points(assignment, verts, eye, 2);
  CHECK(grouped[0].size() == 1);
  CHECK(grouped[1].size() == 1);
  CHECK(assignment.assigned_count() == 2);
}

TEST_CASE("contact loss hand cases") {
  const auto table = geom::make_box_grid({1.0, 0.5, 1.0}, 4, 2, 4);
  const auto regions = extract_contact_regions(table, Category::Table);
  REQUIRE_FALSE(regions.seat.empty());

  SUBCASE("points on the seat surface: zero") {
    std::vector<Vec3> pts;
    for (int idx : regions.seat) pts.push_back(table.vertices[idx]);
    CHECK(contact_loss({pts}, {table}, {regions}) == doctest::Approx(0.0));
  }

  SUBCASE("points hovering 0.1 above: y-gap exactly 0.1") {
    std::vector<Vec3> pts;
    for (int idx : regions.seat) pts.push_back(table.vertices[idx] + Vec3{0, 0.1, 0});
    CHECK(contact_loss({pts}, {table}, {regions}) == doctest::Approx(0.1).epsilon(1e-12));
  }

  SUBCASE("translation equivariance") {
    std::vector<Vec3> pts = {{0.1, 0.62, 0.05}, {-0.2, 0.7, -0.1}};
    const double base = contact_loss({pts}, {table}, {regions});
    const Vec3 shift{0.7, -0.3, 1.1};
    geom::TriMesh moved = table;
    for (auto& v : moved.vertices) v = v + shift;
    std::vector<Vec3> moved_pts = pts;
    for (auto& p : moved_pts) p = p + shift;
    const double shifted = contact_loss({moved_pts}, {moved}, {regions});
    CHECK(std::abs(shifted - base) < 1e-9);
  }

  SUBCASE("no assignments anywhere: zero") {
    CHECK(contact_loss({{}}, {table}, {regions}) == 0.0);
  }

  SUBCASE("chair adds an xz term toward the backrest") {
    geom::TriMesh chair = geom::make_box_grid({0.9, 0.45, 0.9}, 4, 2, 4);
    geom::TriMesh backrest = geom::make_box_grid({0.9, 0.55, 0.12}, 4, 3, 2);
    for (auto& v : backrest.vertices) v = v + Vec3{0, 0.45, -0.39};
    geom::append_mesh(chair, backrest);
    const auto chair_regions = extract_contact_regions(chair, Category::Chair);
    REQUIRE_FALSE(chair_regions.back.empty());

    // one point resting on the seat, 0.2 in front of the backrest inner face
    const std::vector<Vec3> pts = {{0.0, 0.45, -0.13}};
    const double loss = contact_loss({pts}, {chair}, {chair_regions});
    CHECK(loss == doctest::Approx(0.2).epsilon(1e-9));
  }
}

TEST_CASE("bbox loss hand cases") {
  const Intrinsics intr = test_intr();
  const geom::Mat3 eye = geom::Mat3::identity();
  const geom::Aabb canonical{{-0.5, 0.0, -0.5}, {0.5, 1.0, 0.5}};
  geom::PoseParams pose;
  pose.translation = {0, -0.5, 3};
  const geom::OrientedBox box = geom::pose_box(canonical, pose);
  const auto projected = project_box(intr, eye, box);
  REQUIRE(projected.has_value());

  SUBCASE("projection against itself: zero") {
    CHECK(bbox_loss({projected}, {*projected}, intr.width) == 0.0);
  }

  SUBCASE("ten pixels of x offset cost 10/width") {
    PixelBox detected = *projected;
    detected.x_min += 10.0;
    CHECK(bbox_loss({projected}, {detected}, intr.width) == doctest::Approx(10.0 / 320));
  }

  SUBCASE("per-object errors add up") {
    PixelBox detected = *projected;
    detected.width += 10.0;
    CHECK(bbox_loss({projected, projected}, {detected, detected}, intr.width) ==
          doctest::Approx(2.0 * 10.0 / 320));
  }

  SUBCASE("boxes fully behind the camera are skipped") {
    geom::PoseParams behind;
    behind.translation = {0, 0, -4};
    const auto none = project_box(intr, eye, geom::pose_box(canonical, behind));
    CHECK_FALSE(none.has_value());
    CHECK(bbox_loss({none}, {*projected}, intr.width) == 0.0);
  }
}

TEST_CASE("scale loss hand cases") {
  const std::vector<Vec3> init = {{1, 1, 1}, {2, 1, 0.5}};
  CHECK(scale_loss(init, init) == 0.0);
  CHECK(scale_loss({{1.1, 1, 1}, {2, 1, 0.5}}, init) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(scale_loss({{1.1, 1.1, 1.1}, {2, 1, 0.5}}, init) ==
        doctest::Approx(std::sqrt(3.0) * 0.1).epsilon(1e-12));
}

TEST_CASE("total loss is the exact weighted sum") {
  Rng rng(303);
  const HsiWeights w;
  for (int t = 0; t < 50; ++t) {
    HsiTerms terms;
    terms.bbox = rng.uniform();
    terms.occ_sil = rng.uniform();
    terms.scale = rng.uniform();
    terms.depth = rng.uniform();
    terms.collision = rng.uniform();
    terms.contact = rng.uniform();
    const double expect = 1000.0 * terms.bbox + 0.3 * terms.occ_sil + 1000.0 * terms.scale +
                          8.0 * terms.depth + 1000.0 * terms.collision + 1e5 * terms.contact;
    const double got = total_loss(terms, w);
    CHECK(std::abs(got - expect) <= 1e-12 * std::abs(expect));
  }
}

}  // TEST_SUITE
