#pragma once

#include <vector>

#include "roomfit/geom/mesh.hpp"
#include "roomfit/raster/camera.hpp"
#include "roomfit/raster/image.hpp"

namespace roomfit::raster {

/// Half-open pixel rectangle [x0, x1) x [y0, y1).
struct Roi {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;

  int width() const { return x1 - x0; }
  int height() const { return y1 - y0; }
  bool empty() const { return x1 <= x0 || y1 <= y0; }

  Roi clipped(int image_width, int image_height) const;
  static Roi full(const Intrinsics& intr) { return Roi{0, 0, intr.width, intr.height}; }
};

/// Front keeps the nearest fragment per pixel, back the farthest. Both use
/// +inf for uncovered pixels, so passes can accumulate several meshes into
/// one map in any order.
enum class DepthPass { Front, Back };

/// Z-buffers camera-space triangles into `target`, which must match the
/// intrinsics' image size. Triangles are clipped against z = kNearClip and
/// sampled at pixel centers with a half-open top-left fill rule; depth is
/// perspective-correct. Only pixels inside `roi` are touched.
void render_depth_into(const std::vector<geom::Vec3>& cam_verts,
                       const std::vector<std::array<int, 3>>& faces, const Intrinsics& intr,
                       DepthPass pass, DepthMap& target, const Roi& roi);

DepthMap render_depth(const std::vector<geom::Vec3>& cam_verts,
                      const std::vector<std::array<int, 3>>& faces, const Intrinsics& intr,
                      DepthPass pass);

/// Pixel = 1 wherever the depth is finite.
MaskImage silhouette_from_depth(const DepthMap& depth);

MaskImage render_silhouette(const std::vector<geom::Vec3>& cam_verts,
                            const std::vector<std::array<int, 3>>& faces, const Intrinsics& intr);

Image<float> to_float(const MaskImage& mask);

/// Mean squared difference between a rendered coverage image and a target
/// mask, skipping pixels set in `ignore`. No valid pixels -> 0.
double occ_sil_loss(const Image<float>& rendered, const Image<float>& target,
                    const MaskImage& ignore);
double occ_sil_loss(const MaskImage& rendered, const MaskImage& target, const MaskImage& ignore);

}  // namespace roomfit::raster
