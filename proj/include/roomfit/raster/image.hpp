#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace roomfit::raster {

template <typename T>
class Image {
 public:
  Image() = default;
  Image(int width, int height, T fill = T{})
      : width_(width), height_(height), data_(static_cast<size_t>(width) * height, fill) {
    if (width <= 0 || height <= 0) throw std::invalid_argument("image: size must be positive");
  }

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return data_.empty(); }
  size_t size() const { return data_.size(); }

  T& at(int x, int y) { return data_[static_cast<size_t>(y) * width_ + x]; }
  const T& at(int x, int y) const { return data_[static_cast<size_t>(y) * width_ + x]; }

  T* row(int y) { return data_.data() + static_cast<size_t>(y) * width_; }
  const T* row(int y) const { return data_.data() + static_cast<size_t>(y) * width_; }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }

  void fill(T value) { data_.assign(data_.size(), value); }

  bool same_size(int w, int h) const { return width_ == w && height_ == h; }

  template <typename U>
  bool same_size(const Image<U>& other) const {
    return same_size(other.width(), other.height());
  }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

/// Depth in meters; +inf marks pixels no geometry covers.
using DepthMap = Image<float>;
/// Binary coverage; values are strictly 0 or 1 in memory.
using MaskImage = Image<uint8_t>;

inline constexpr float kEmptyDepth = std::numeric_limits<float>::infinity();

inline DepthMap make_depth_map(int width, int height) { return DepthMap(width, height, kEmptyDepth); }

/// Binary PGM (P5, maxval 255). Set pixels are written as 255; on load any
/// sample >= 128 reads back as 1.
void save_pgm(const std::string& path, const MaskImage& mask);
MaskImage load_pgm(const std::string& path);

/// Grayscale PFM (Pf header, 32-bit floats, negative scale = little endian,
/// rows stored bottom to top). Infinities pass through unchanged.
void save_pfm(const std::string& path, const DepthMap& depth);
DepthMap load_pfm(const std::string& path);

}  // namespace roomfit::raster
