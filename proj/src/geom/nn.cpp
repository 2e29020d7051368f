#include "roomfit/geom/nn.hpp"

#include <algorithm>
#include <stdexcept>

namespace roomfit::geom {

namespace {

double weighted_sq(const Vec3& d, const Vec3& w) {
  return w.x * d.x * d.x + w.y * d.y * d.y + w.z * d.z * d.z;
}

double box_weighted_sq(const Aabb& b, const Vec3& p, const Vec3& w) {
  const double dx = std::max({b.min.x - p.x, 0.0, p.x - b.max.x});
  const double dy = std::max({b.min.y - p.y, 0.0, p.y - b.max.y});
  const double dz = std::max({b.min.z - p.z, 0.0, p.z - b.max.z});
  return w.x * dx * dx + w.y * dy * dy + w.z * dz * dz;
}

}  // namespace

PointBvh::PointBvh(std::span<const Vec3> points, int leaf_size)
    : pts_(points.begin(), points.end()) {
  if (pts_.empty()) throw std::invalid_argument("PointBvh: empty point set");
  nodes_.reserve(2 * pts_.size() / std::max(1, leaf_size) + 2);
  build(0, static_cast<int>(pts_.size()), std::max(1, leaf_size));
}

int PointBvh::build(int begin, int end, int leaf_size) {
  const int idx = static_cast<int>(nodes_.size());
  nodes_.emplace_back();
  Aabb box;
  for (int i = begin; i < end; ++i) box.expand(pts_[i]);
  nodes_[idx].box = box;
  if (end - begin <= leaf_size) {
    nodes_[idx].begin = begin;
    nodes_[idx].end = end;
    return idx;
  }
  const Vec3 ext = box.extent();
  const int axis = ext.x >= ext.y ? (ext.x >= ext.z ? 0 : 2) : (ext.y >= ext.z ? 1 : 2);
  const int mid = (begin + end) / 2;
  std::nth_element(pts_.begin() + begin, pts_.begin() + mid, pts_.begin() + end,
                   [axis](const Vec3& a, const Vec3& b) { return a[axis] < b[axis]; });
  const int l = build(begin, mid, leaf_size);
  const int r = build(mid, end, leaf_size);
  nodes_[idx].left = l;
  nodes_[idx].right = r;
  return idx;
}

void PointBvh::query(int ni, const Vec3& q, const Vec3& w, double& best) const {
  const Node& node = nodes_[ni];
  if (node.left < 0) {
    for (int i = node.begin; i < node.end; ++i)
      best = std::min(best, weighted_sq(pts_[i] - q, w));
    return;
  }
  const double dl = box_weighted_sq(nodes_[node.left].box, q, w);
  const double dr = box_weighted_sq(nodes_[node.right].box, q, w);
  const int first = dl <= dr ? node.left : node.right;
  const int second = dl <= dr ? node.right : node.left;
  if (std::min(dl, dr) < best) query(first, q, w, best);
  if (std::max(dl, dr) < best) query(second, q, w, best);
}

double PointBvh::nearest_squared(const Vec3& q, const Vec3& w) const {
  double best = std::numeric_limits<double>::infinity();
  query(0, q, w, best);
  return best;
}

double one_sided_chamfer(std::span<const Vec3> source, const PointBvh& target,
                         AxisFilter filter) {
  if (source.empty()) return 0.0;
  const Vec3 w = axis_weights(filter);
  double sum = 0.0;
  for (const Vec3& s : source) sum += std::sqrt(target.nearest_squared(s, w));
  return sum / static_cast<double>(source.size());
}

double one_sided_chamfer(std::span<const Vec3> source, std::span<const Vec3> target,
                         AxisFilter filter) {
  if (target.empty()) throw std::invalid_argument("one_sided_chamfer: empty target set");
  if (source.empty()) return 0.0;
  const PointBvh bvh(target);
  return one_sided_chamfer(source, bvh, filter);
}

}  // namespace roomfit::geom
