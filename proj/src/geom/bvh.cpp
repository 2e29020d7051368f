#include "roomfit/geom/bvh.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace roomfit::geom {

Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  // Ericson, Real-Time Collision Detection, 5.1.5
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;

  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return b;

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + ab * (d1 / (d1 - d3));

  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return c;

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + ac * (d2 / (d2 - d6));

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0)
    return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));

  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

TriBvh::TriBvh(const TriMesh& mesh, int leaf_size) {
  if (mesh.faces.empty()) throw std::invalid_argument("TriBvh: empty mesh");
  const size_t n = mesh.faces.size();
  std::vector<Vec3> ta(n), tb(n), tc(n);
  for (size_t i = 0; i < n; ++i) {
    ta[i] = mesh.vertices[mesh.faces[i][0]];
    tb[i] = mesh.vertices[mesh.faces[i][1]];
    tc[i] = mesh.vertices[mesh.faces[i][2]];
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  a_.resize(n);
  b_.resize(n);
  c_.resize(n);
  nodes_.reserve(2 * n / std::max(1, leaf_size) + 2);
  build(order, 0, static_cast<int>(n), std::max(1, leaf_size), ta, tb, tc);
}

int TriBvh::build(std::vector<int>& order, int begin, int end, int leaf_size,
                  const std::vector<Vec3>& src_a, const std::vector<Vec3>& src_b,
                  const std::vector<Vec3>& src_c) {
  const int idx = static_cast<int>(nodes_.size());
  nodes_.emplace_back();

  Aabb box;
  Vec3 dipole{}, centroid{};
  double area_sum = 0.0;
  for (int i = begin; i < end; ++i) {
    const int t = order[i];
    const Vec3 &ta = src_a[t], &tb = src_b[t], &tc = src_c[t];
    box.expand(ta);
    box.expand(tb);
    box.expand(tc);
    const Vec3 an = (tb - ta).cross(tc - ta) * 0.5;
    const double area = an.norm();
    dipole += an;
    centroid += (ta + tb + tc) * (area / 3.0);
    area_sum += area;
  }
  Node& node = nodes_[idx];
  node.box = box;
  node.dipole = dipole;
  node.centroid = area_sum > 1e-30 ? centroid / area_sum : box.center();
  // radius bounds all geometry in the node as seen from the centroid
  double r2 = 0.0;
  for (int cx : {0, 1})
    for (int cy : {0, 1})
      for (int cz : {0, 1}) {
        const Vec3 corner{cx ? box.max.x : box.min.x, cy ? box.max.y : box.min.y,
                          cz ? box.max.z : box.min.z};
        r2 = std::max(r2, (corner - node.centroid).squared_norm());
      }
  node.radius = std::sqrt(r2);

  if (end - begin <= leaf_size) {
    node.begin = begin;
    node.end = end;
    for (int i = begin; i < end; ++i) {
      a_[i] = src_a[order[i]];
      b_[i] = src_b[order[i]];
      c_[i] = src_c[order[i]];
    }
    return idx;
  }

  const Vec3 ext = box.extent();
  const int axis = ext.x >= ext.y ? (ext.x >= ext.z ? 0 : 2) : (ext.y >= ext.z ? 1 : 2);
  const int mid = (begin + end) / 2;
  std::nth_element(order.begin() + begin, order.begin() + mid, order.begin() + end,
                   [&](int lhs, int rhs) {
                     const auto center = [&](int t) {
                       return src_a[t][axis] + src_b[t][axis] + src_c[t][axis];
                     };
                     return center(lhs) < center(rhs);
                   });
  const int l = build(order, begin, mid, leaf_size, src_a, src_b, src_c);
  const int r = build(order, mid, end, leaf_size, src_a, src_b, src_c);
  nodes_[idx].left = l;
  nodes_[idx].right = r;
  return idx;
}

void TriBvh::query_distance(int ni, const Vec3& p, double& best) const {
  const Node& node = nodes_[ni];
  if (node.left < 0) {
    for (int i = node.begin; i < node.end; ++i) {
      const Vec3 q = closest_point_on_triangle(p, a_[i], b_[i], c_[i]);
      best = std::min(best, (q - p).squared_norm());
    }
    return;
  }
  const double dl = nodes_[node.left].box.squared_distance(p);
  const double dr = nodes_[node.right].box.squared_distance(p);
  const int first = dl <= dr ? node.left : node.right;
  const int second = dl <= dr ? node.right : node.left;
  const double dfirst = std::min(dl, dr), dsecond = std::max(dl, dr);
  if (dfirst < best) query_distance(first, p, best);
  if (dsecond < best) query_distance(second, p, best);
}

double TriBvh::squared_distance(const Vec3& p) const {
  return squared_distance(p, std::numeric_limits<double>::infinity());
}

double TriBvh::squared_distance(const Vec3& p, double upper_sq) const {
  double best = upper_sq;
  query_distance(0, p, best);
  return best;
}

namespace {

// Van Oosterom & Strackee solid angle of triangle abc seen from the origin.
double solid_angle(const Vec3& a, const Vec3& b, const Vec3& c) {
  const double la = a.norm(), lb = b.norm(), lc = c.norm();
  const double det = a.dot(b.cross(c));
  const double denom = la * lb * lc + a.dot(b) * lc + b.dot(c) * la + c.dot(a) * lb;
  return 2.0 * std::atan2(det, denom);
}

}  // namespace

double TriBvh::winding(int ni, const Vec3& p) const {
  const Node& node = nodes_[ni];
  const Vec3 d = node.centroid - p;
  const double dist2 = d.squared_norm();
  if (beta_ > 0.0 && node.left >= 0 && dist2 > beta_ * beta_ * node.radius * node.radius) {
    const double dist = std::sqrt(dist2);
    return node.dipole.dot(d) / (4.0 * kPi * dist2 * dist);
  }
  if (node.left < 0) {
    double w = 0.0;
    for (int i = node.begin; i < node.end; ++i)
      w += solid_angle(a_[i] - p, b_[i] - p, c_[i] - p);
    return w / (4.0 * kPi);
  }
  return winding(node.left, p) + winding(node.right, p);
}

double TriBvh::winding_number(const Vec3& p) const { return winding(0, p); }

double TriBvh::signed_distance(const Vec3& p) const {
  const double d = distance(p);
  return inside(p) ? -d : d;
}

double point_to_surface(std::span<const Vec3> points, const TriBvh& bvh) {
  if (points.empty()) return 0.0;
  double sum = 0.0;
  for (const Vec3& p : points) sum += bvh.distance(p);
  return sum / static_cast<double>(points.size());
}

double point_to_surface(std::span<const Vec3> points, const TriMesh& mesh) {
  const TriBvh bvh(mesh);
  return point_to_surface(points, bvh);
}

}  // namespace roomfit::geom
