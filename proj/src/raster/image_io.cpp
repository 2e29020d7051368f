#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "roomfit/raster/image.hpp"

namespace roomfit::raster {

namespace {

// Reads one whitespace-delimited token, skipping '#' comment lines.
std::string next_token(std::istream& in) {
  std::string tok;
  while (in >> tok) {
    if (tok[0] != '#') return tok;
    std::string rest;
    std::getline(in, rest);
  }
  throw std::runtime_error("image: truncated header");
}

int parse_int(const std::string& tok, const char* what) {
  size_t pos = 0;
  int value = 0;
  try {
    value = std::stoi(tok, &pos);
  } catch (const std::exception&) {
    throw std::runtime_error(std::string("image: bad ") + what + " '" + tok + "'");
  }
  if (pos != tok.size()) throw std::runtime_error(std::string("image: bad ") + what + " '" + tok + "'");
  return value;
}

}  // namespace

void save_pgm(const std::string& path, const MaskImage& mask) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("image: cannot open '" + path + "' for writing");
  out << "P5\n" << mask.width() << " " << mask.height() << "\n255\n";
  std::vector<uint8_t> row(static_cast<size_t>(mask.width()));
  for (int y = 0; y < mask.height(); ++y) {
    const uint8_t* src = mask.row(y);
    for (int x = 0; x < mask.width(); ++x) row[x] = src[x] ? 255 : 0;
    out.write(reinterpret_cast<const char*>(row.data()), row.size());
  }
  if (!out) throw std::runtime_error("image: write failed for '" + path + "'");
}

MaskImage load_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("image: cannot open '" + path + "'");
  if (next_token(in) != "P5") throw std::runtime_error("image: '" + path + "' is not binary PGM");
  const int width = parse_int(next_token(in), "width");
  const int height = parse_int(next_token(in), "height");
  const int maxval = parse_int(next_token(in), "maxval");
  if (width <= 0 || height <= 0) throw std::runtime_error("image: bad dimensions in '" + path + "'");
  if (maxval <= 0 || maxval > 255) throw std::runtime_error("image: unsupported maxval in '" + path + "'");
  in.get();  // single whitespace byte before raster data
  MaskImage mask(width, height);
  std::vector<uint8_t> row(static_cast<size_t>(width));
  for (int y = 0; y < height; ++y) {
    in.read(reinterpret_cast<char*>(row.data()), row.size());
    if (!in) throw std::runtime_error("image: truncated raster in '" + path + "'");
    uint8_t* dst = mask.row(y);
    for (int x = 0; x < width; ++x) dst[x] = row[x] >= 128 ? 1 : 0;
  }
  return mask;
}

void save_pfm(const std::string& path, const DepthMap& depth) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("image: cannot open '" + path + "' for writing");
  out << "Pf\n" << depth.width() << " " << depth.height() << "\n-1.0\n";
  std::vector<char> row(static_cast<size_t>(depth.width()) * 4);
  for (int y = depth.height() - 1; y >= 0; --y) {  // PFM rows run bottom to top
    const float* src = depth.row(y);
    for (int x = 0; x < depth.width(); ++x) {
      const uint32_t bits = std::bit_cast<uint32_t>(src[x]);
      row[4 * x + 0] = static_cast<char>(bits & 0xff);
      row[4 * x + 1] = static_cast<char>((bits >> 8) & 0xff);
      row[4 * x + 2] = static_cast<char>((bits >> 16) & 0xff);
      row[4 * x + 3] = static_cast<char>((bits >> 24) & 0xff);
    }
    out.write(row.data(), row.size());
  }
  if (!out) throw std::runtime_error("image: write failed for '" + path + "'");
}

DepthMap load_pfm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("image: cannot open '" + path + "'");
  if (next_token(in) != "Pf") throw std::runtime_error("image: '" + path + "' is not grayscale PFM");
  const int width = parse_int(next_token(in), "width");
  const int height = parse_int(next_token(in), "height");
  const double scale = std::stod(next_token(in));
  if (width <= 0 || height <= 0) throw std::runtime_error("image: bad dimensions in '" + path + "'");
  const bool little_endian = scale < 0.0;
  in.get();
  DepthMap depth(width, height);
  std::vector<char> row(static_cast<size_t>(width) * 4);
  for (int y = height - 1; y >= 0; --y) {
    in.read(row.data(), row.size());
    if (!in) throw std::runtime_error("image: truncated raster in '" + path + "'");
    float* dst = depth.row(y);
    for (int x = 0; x < width; ++x) {
      const auto b = [&](int k) { return static_cast<uint32_t>(static_cast<uint8_t>(row[4 * x + k])); };
      const uint32_t bits = little_endian ? (b(0) | b(1) << 8 | b(2) << 16 | b(3) << 24)
                                          : (b(3) | b(2) << 8 | b(1) << 16 | b(0) << 24);
      dst[x] = std::bit_cast<float>(bits);
    }
  }
  return depth;
}

}  // namespace roomfit::raster
