#include <cmath>
#include <vector>

#include "roomfit/parallel.hpp"
#include "roomfit/raster/edt.hpp"

namespace roomfit::raster {

namespace {

constexpr float kInf = std::numeric_limits<float>::infinity();

// One-dimensional squared distance transform by lower envelope of parabolas.
// Entries with f = +inf contribute no parabola.
void dt1d(const float* f, float* d, int n, std::vector<int>& v, std::vector<double>& z) {
  v.resize(static_cast<size_t>(n));
  z.resize(static_cast<size_t>(n) + 1);
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[q] == kInf) continue;
    double s = 0.0;
    while (k >= 0) {
      s = ((f[q] + double(q) * q) - (f[v[k]] + double(v[k]) * v[k])) / (2.0 * (q - v[k]));
      if (s > z[k]) break;
      --k;
    }
    ++k;
    v[k] = q;
    z[k] = k == 0 ? -kInf : s;
    z[k + 1] = kInf;
  }
  if (k < 0) {
    for (int q = 0; q < n; ++q) d[q] = kInf;
    return;
  }
  int j = 0;
  for (int q = 0; q < n; ++q) {
    while (z[j + 1] < q) ++j;
    const double dq = q - v[j];
    d[q] = static_cast<float>(dq * dq + f[v[j]]);
  }
}

}  // namespace

Image<float> squared_distance_to_set(const MaskImage& mask) {
  const int w = mask.width();
  const int h = mask.height();
  Image<float> dist(w, h);

  // columns first, on the 0 / +inf indicator
  parallel_for_chunks(w, [&](int64_t begin, int64_t end) {
    std::vector<float> f(static_cast<size_t>(h)), d(static_cast<size_t>(h));
    std::vector<int> v;
    std::vector<double> z;
    for (int64_t x = begin; x < end; ++x) {
      for (int y = 0; y < h; ++y) f[y] = mask.at(static_cast<int>(x), y) ? 0.0f : kInf;
      dt1d(f.data(), d.data(), h, v, z);
      for (int y = 0; y < h; ++y) dist.at(static_cast<int>(x), y) = d[y];
    }
  });

  parallel_for_chunks(h, [&](int64_t begin, int64_t end) {
    std::vector<float> d(static_cast<size_t>(w));
    std::vector<int> v;
    std::vector<double> z;
    for (int64_t y = begin; y < end; ++y) {
      float* row = dist.row(static_cast<int>(y));
      dt1d(row, d.data(), w, v, z);
      for (int x = 0; x < w; ++x) row[x] = d[x];
    }
  });
  return dist;
}

MaskImage dilate(const MaskImage& mask, double radius_px) {
  const Image<float> d2 = squared_distance_to_set(mask);
  const double r2 = radius_px * radius_px;
  MaskImage out(mask.width(), mask.height());
  const float* src = d2.data();
  uint8_t* dst = out.data();
  for (size_t i = 0; i < out.size(); ++i) dst[i] = double(src[i]) <= r2 ? 1 : 0;
  return out;
}

Image<float> soft_silhouette(const MaskImage& hard, double temperature_px) {
  if (temperature_px <= 0.0) throw std::invalid_argument("soft_silhouette: temperature must be positive");
  MaskImage inverse(hard.width(), hard.height());
  for (size_t i = 0; i < hard.size(); ++i) inverse.data()[i] = hard.data()[i] ? 0 : 1;
  const Image<float> to_set = squared_distance_to_set(hard);
  const Image<float> to_complement = squared_distance_to_set(inverse);

  Image<float> soft(hard.width(), hard.height());
  for (size_t i = 0; i < soft.size(); ++i) {
    const double signed_dist =
        std::sqrt(double(to_set.data()[i])) - std::sqrt(double(to_complement.data()[i]));
    soft.data()[i] = static_cast<float>(1.0 / (1.0 + std::exp(signed_dist / temperature_px)));
  }
  return soft;
}

}  // namespace roomfit::raster
