#include "roomfit/geom/box.hpp"

#include <vector>

namespace roomfit::geom {

namespace {

struct P2 {
  double x = 0.0, z = 0.0;
};

double cross2(const P2& o, const P2& a, const P2& b) {
  return (a.x - o.x) * (b.z - o.z) - (a.z - o.z) * (b.x - o.x);
}

double polygon_area(const std::vector<P2>& poly) {
  double a = 0.0;
  for (size_t i = 0; i < poly.size(); ++i) {
    const P2& p = poly[i];
    const P2& q = poly[(i + 1) % poly.size()];
    a += p.x * q.z - q.x * p.z;
  }
  return 0.5 * a;
}

std::array<P2, 4> footprint(const OrientedBox& b) {
  const double c = std::cos(b.yaw), s = std::sin(b.yaw);
  const P2 ax{c * b.half.x, -s * b.half.x};
  const P2 az{s * b.half.z, c * b.half.z};
  const P2 ctr{b.center.x, b.center.z};
  return {P2{ctr.x + ax.x + az.x, ctr.z + ax.z + az.z},
          P2{ctr.x - ax.x + az.x, ctr.z - ax.z + az.z},
          P2{ctr.x - ax.x - az.x, ctr.z - ax.z - az.z},
          P2{ctr.x + ax.x - az.x, ctr.z + ax.z - az.z}};
}

// Sutherland-Hodgman: clip `poly` against the half-plane left of a->b.
std::vector<P2> clip_halfplane(const std::vector<P2>& poly, const P2& a, const P2& b) {
  std::vector<P2> out;
  out.reserve(poly.size() + 1);
  for (size_t i = 0; i < poly.size(); ++i) {
    const P2& cur = poly[i];
    const P2& nxt = poly[(i + 1) % poly.size()];
    const double dc = cross2(a, b, cur);
    const double dn = cross2(a, b, nxt);
    if (dc >= 0.0) out.push_back(cur);
    if ((dc > 0.0 && dn < 0.0) || (dc < 0.0 && dn > 0.0)) {
      const double t = dc / (dc - dn);
      out.push_back({cur.x + t * (nxt.x - cur.x), cur.z + t * (nxt.z - cur.z)});
    }
  }
  return out;
}

double footprint_intersection_area(const OrientedBox& a, const OrientedBox& b) {
  auto fa = footprint(a);
  auto fb = footprint(b);
  std::vector<P2> poly(fa.begin(), fa.end());
  // ensure the clip polygon is counter-clockwise
  std::vector<P2> clipper(fb.begin(), fb.end());
  if (polygon_area(clipper) < 0.0) std::reverse(clipper.begin(), clipper.end());
  if (polygon_area(poly) < 0.0) std::reverse(poly.begin(), poly.end());
  for (size_t i = 0; i < clipper.size() && !poly.empty(); ++i)
    poly = clip_halfplane(poly, clipper[i], clipper[(i + 1) % clipper.size()]);
  if (poly.size() < 3) return 0.0;
  return std::abs(polygon_area(poly));
}

}  // namespace

std::array<Vec3, 8> OrientedBox::corners() const {
  const double c = std::cos(yaw), s = std::sin(yaw);
  const Vec3 ax = Vec3{c, 0.0, -s} * half.x;
  const Vec3 ay = Vec3{0.0, 1.0, 0.0} * half.y;
  const Vec3 az = Vec3{s, 0.0, c} * half.z;
  std::array<Vec3, 8> out;
  int k = 0;
  for (int i : {-1, 1})
    for (int j : {-1, 1})
      for (int l : {-1, 1})
        out[k++] = center + ax * double(i) + ay * double(j) + az * double(l);
  return out;
}

OrientedBox pose_box(const Aabb& canonical, const PoseParams& p) {
  OrientedBox b;
  const Vec3 c = canonical.center().cwise(p.scale);
  const double cy = std::cos(p.yaw), sy = std::sin(p.yaw);
  b.center = Vec3{cy * c.x + sy * c.z, c.y, -sy * c.x + cy * c.z} + p.translation;
  b.half = (canonical.extent() * 0.5).cwise(p.scale);
  b.yaw = wrap_angle(p.yaw);
  return b;
}

double oriented_iou3d(const OrientedBox& a, const OrientedBox& b) {
  const double ylo = std::max(a.center.y - a.half.y, b.center.y - b.half.y);
  const double yhi = std::min(a.center.y + a.half.y, b.center.y + b.half.y);
  const double dy = yhi - ylo;
  if (dy <= 0.0) return 0.0;
  const double inter = footprint_intersection_area(a, b) * dy;
  const double uni = a.volume() + b.volume() - inter;
  if (uni <= 0.0) return 0.0;
  return inter / uni;
}

}  // namespace roomfit::geom
