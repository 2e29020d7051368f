#pragma once

#include "roomfit/raster/image.hpp"

namespace roomfit::raster {

/// Squared Euclidean distance (in px^2) from every pixel to the nearest set
/// pixel, measured between pixel centers. All-zero mask -> +inf everywhere.
Image<float> squared_distance_to_set(const MaskImage& mask);

/// Pixels within `radius_px` of a set pixel.
MaskImage dilate(const MaskImage& mask, double radius_px);

/// Sigmoid of the signed center-to-center distance to the mask boundary,
/// approaching 1 inside and 0 outside. Thresholding at 0.5 recovers the
/// hard mask exactly.
Image<float> soft_silhouette(const MaskImage& hard, double temperature_px);

}  // namespace roomfit::raster
