#include <algorithm>
#include <array>
#include <cmath>

#include "roomfit/kernels/kernels.hpp"
#include "roomfit/parallel.hpp"
#include "roomfit/raster/rasterizer.hpp"

namespace roomfit::raster {

namespace {

struct ScreenVert {
  double u, v, invz;
};

// Projected triangle ready for scanning, ordered so area2 > 0.
struct SetupTri {
  ScreenVert p0, p1, p2;
  double inv_area2;
  int x0, x1, y0, y1;  // half-open pixel bounds, already clipped to the roi
  bool tl0, tl1, tl2;  // boundary pixels count only on top or left edges
};

double cross2(const ScreenVert& a, const ScreenVert& b, double px, double py) {
  return (b.u - a.u) * (py - a.v) - (b.v - a.v) * (px - a.u);
}

bool top_left(const ScreenVert& a, const ScreenVert& b) {
  const double dx = b.u - a.u;
  const double dy = b.v - a.v;
  return (dy == 0.0 && dx > 0.0) || dy < 0.0;
}

ScreenVert project(const Intrinsics& intr, const geom::Vec3& p) {
  return {intr.fx * p.x / p.z + intr.cx, intr.fy * p.y / p.z + intr.cy, 1.0 / p.z};
}

// Clips one camera-space triangle against z >= kNearClip; the result is a
// convex polygon with at most 4 vertices.
int clip_near(const std::array<geom::Vec3, 3>& in, std::array<geom::Vec3, 4>& out) {
  int count = 0;
  for (int i = 0; i < 3; ++i) {
    const geom::Vec3& a = in[i];
    const geom::Vec3& b = in[(i + 1) % 3];
    const bool a_in = a.z >= kNearClip;
    const bool b_in = b.z >= kNearClip;
    if (a_in) out[count++] = a;
    if (a_in != b_in) {
      const double t = (kNearClip - a.z) / (b.z - a.z);
      out[count++] = a + (b - a) * t;
    }
  }
  return count;
}

bool setup_triangle(const ScreenVert& a, const ScreenVert& b, const ScreenVert& c, const Roi& roi,
                    SetupTri& tri) {
  ScreenVert p0 = a, p1 = b, p2 = c;
  double area2 = (p1.u - p0.u) * (p2.v - p0.v) - (p1.v - p0.v) * (p2.u - p0.u);
  if (area2 < 0.0) {
    std::swap(p1, p2);
    area2 = -area2;
  }
  if (area2 == 0.0) return false;

  const double umin = std::min({p0.u, p1.u, p2.u});
  const double umax = std::max({p0.u, p1.u, p2.u});
  const double vmin = std::min({p0.v, p1.v, p2.v});
  const double vmax = std::max({p0.v, p1.v, p2.v});
  // pixel x has its center at x + 0.5
  tri.x0 = std::max(roi.x0, static_cast<int>(std::ceil(umin - 0.5)));
  tri.x1 = std::min(roi.x1, static_cast<int>(std::floor(umax - 0.5)) + 1);
  tri.y0 = std::max(roi.y0, static_cast<int>(std::ceil(vmin - 0.5)));
  tri.y1 = std::min(roi.y1, static_cast<int>(std::floor(vmax - 0.5)) + 1);
  if (tri.x0 >= tri.x1 || tri.y0 >= tri.y1) return false;

  tri.p0 = p0;
  tri.p1 = p1;
  tri.p2 = p2;
  tri.inv_area2 = 1.0 / area2;
  tri.tl0 = top_left(p1, p2);
  tri.tl1 = top_left(p2, p0);
  tri.tl2 = top_left(p0, p1);
  return true;
}

template <DepthPass kPass>
void scan_rows(const SetupTri& t, int row_begin, int row_end, DepthMap& target) {
  const int y0 = std::max(t.y0, row_begin);
  const int y1 = std::min(t.y1, row_end);
  // per-pixel steps of each edge function
  const double a0 = t.p1.v - t.p2.v;
  const double a1 = t.p2.v - t.p0.v;
  const double a2 = t.p0.v - t.p1.v;
  for (int y = y0; y < y1; ++y) {
    const double px = t.x0 + 0.5;
    const double py = y + 0.5;
    double w0 = cross2(t.p1, t.p2, px, py);
    double w1 = cross2(t.p2, t.p0, px, py);
    double w2 = cross2(t.p0, t.p1, px, py);
    float* row = target.row(y);
    for (int x = t.x0; x < t.x1; ++x, w0 += a0, w1 += a1, w2 += a2) {
      const bool in0 = w0 > 0.0 || (w0 == 0.0 && t.tl0);
      const bool in1 = w1 > 0.0 || (w1 == 0.0 && t.tl1);
      const bool in2 = w2 > 0.0 || (w2 == 0.0 && t.tl2);
      if (!(in0 && in1 && in2)) continue;
      const double invz = (w0 * t.p0.invz + w1 * t.p1.invz + w2 * t.p2.invz) * t.inv_area2;
      const float z = static_cast<float>(1.0 / invz);
      float& cur = row[x];
      if constexpr (kPass == DepthPass::Front) {
        if (z < cur) cur = z;
      } else {
        if (cur == kEmptyDepth || z > cur) cur = z;
      }
    }
  }
}

}  // namespace

Roi Roi::clipped(int image_width, int image_height) const {
  Roi r;
  r.x0 = std::max(x0, 0);
  r.y0 = std::max(y0, 0);
  r.x1 = std::min(x1, image_width);
  r.y1 = std::min(y1, image_height);
  return r;
}

void render_depth_into(const std::vector<geom::Vec3>& cam_verts,
                       const std::vector<std::array<int, 3>>& faces, const Intrinsics& intr,
                       DepthPass pass, DepthMap& target, const Roi& roi) {
  intr.validate();
  if (!target.same_size(intr.width, intr.height))
    throw std::invalid_argument("render: target size does not match intrinsics");
  const Roi clip = roi.clipped(intr.width, intr.height);
  if (clip.empty()) return;

  std::vector<SetupTri> tris;
  tris.reserve(faces.size());
  std::array<geom::Vec3, 4> poly;
  for (const auto& f : faces) {
    const std::array<geom::Vec3, 3> corners{cam_verts[f[0]], cam_verts[f[1]], cam_verts[f[2]]};
    const int n = clip_near(corners, poly);
    for (int k = 2; k < n; ++k) {
      const ScreenVert a = project(intr, poly[0]);
      const ScreenVert b = project(intr, poly[k - 1]);
      const ScreenVert c = project(intr, poly[k]);
      SetupTri tri;
      if (setup_triangle(a, b, c, clip, tri)) tris.push_back(tri);
    }
  }
  if (tris.empty()) return;

  // Rows are partitioned into contiguous bands, so every pixel is written by
  // exactly one worker; the per-pixel result is a min/max over the same
  // fragment set regardless of the partition.
  const int64_t rows = clip.y1 - clip.y0;
  parallel_for_chunks(rows, [&](int64_t begin, int64_t end) {
    const int rb = clip.y0 + static_cast<int>(begin);
    const int re = clip.y0 + static_cast<int>(end);
    for (const SetupTri& t : tris) {
      if (t.y1 <= rb || t.y0 >= re) continue;
      if (pass == DepthPass::Front)
        scan_rows<DepthPass::Front>(t, rb, re, target);
      else
        scan_rows<DepthPass::Back>(t, rb, re, target);
    }
  });
}

DepthMap render_depth(const std::vector<geom::Vec3>& cam_verts,
                      const std::vector<std::array<int, 3>>& faces, const Intrinsics& intr,
                      DepthPass pass) {
  DepthMap map = make_depth_map(intr.width, intr.height);
  render_depth_into(cam_verts, faces, intr, pass, map, Roi::full(intr));
  return map;
}

MaskImage silhouette_from_depth(const DepthMap& depth) {
  MaskImage mask(depth.width(), depth.height());
  const float* src = depth.data();
  uint8_t* dst = mask.data();
  for (size_t i = 0; i < depth.size(); ++i) dst[i] = std::isfinite(src[i]) ? 1 : 0;
  return mask;
}

MaskImage render_silhouette(const std::vector<geom::Vec3>& cam_verts,
                            const std::vector<std::array<int, 3>>& faces, const Intrinsics& intr) {
  return silhouette_from_depth(render_depth(cam_verts, faces, intr, DepthPass::Front));
}

Image<float> to_float(const MaskImage& mask) {
  Image<float> out(mask.width(), mask.height());
  const uint8_t* src = mask.data();
  float* dst = out.data();
  for (size_t i = 0; i < mask.size(); ++i) dst[i] = src[i] ? 1.0f : 0.0f;
  return out;
}

double occ_sil_loss(const Image<float>& rendered, const Image<float>& target,
                    const MaskImage& ignore) {
  if (!rendered.same_size(target) || !rendered.same_size(ignore))
    throw std::invalid_argument("occ_sil_loss: image sizes differ");
  const auto acc = kernels::masked_sq_diff(rendered.data(), target.data(), ignore.data(),
                                           rendered.size());
  return acc.count > 0 ? acc.sum / static_cast<double>(acc.count) : 0.0;
}

double occ_sil_loss(const MaskImage& rendered, const MaskImage& target, const MaskImage& ignore) {
  return occ_sil_loss(to_float(rendered), to_float(target), ignore);
}

}  // namespace roomfit::raster
