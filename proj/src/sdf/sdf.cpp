#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "roomfit/geom/bvh.hpp"
#include "roomfit/kernels/kernels.hpp"
#include "roomfit/parallel.hpp"
#include "roomfit/sdf/sdf.hpp"

namespace roomfit::sdf {

using geom::Vec3;

double SdfVolume::sample(const Vec3& p) const {
  const double lx = (p.x - spec.origin.x) / spec.voxel;
  const double ly = (p.y - spec.origin.y) / spec.voxel;
  const double lz = (p.z - spec.origin.z) / spec.voxel;
  if (lx < 0.0 || ly < 0.0 || lz < 0.0 || lx > spec.nx - 1 || ly > spec.ny - 1 ||
      lz > spec.nz - 1)
    return kOutsideSdf;
  const int i = std::min(static_cast<int>(lx), spec.nx - 2);
  const int j = std::min(static_cast<int>(ly), spec.ny - 2);
  const int k = std::min(static_cast<int>(lz), spec.nz - 2);
  const double fx = lx - i, fy = ly - j, fz = lz - k;
  const double c000 = at(i, j, k), c100 = at(i + 1, j, k);
  const double c010 = at(i, j + 1, k), c110 = at(i + 1, j + 1, k);
  const double c001 = at(i, j, k + 1), c101 = at(i + 1, j, k + 1);
  const double c011 = at(i, j + 1, k + 1), c111 = at(i + 1, j + 1, k + 1);
  const double c00 = c000 + (c100 - c000) * fx;
  const double c10 = c010 + (c110 - c010) * fx;
  const double c01 = c001 + (c101 - c001) * fx;
  const double c11 = c011 + (c111 - c011) * fx;
  const double c0 = c00 + (c10 - c00) * fy;
  const double c1 = c01 + (c11 - c01) * fy;
  return c0 + (c1 - c0) * fz;
}

GridSpec grid_from_bodies(const std::vector<geom::TriMesh>& bodies, int resolution,
                          double padding) {
  if (bodies.empty()) throw std::invalid_argument("sdf: need at least one body");
  if (resolution < 2) throw std::invalid_argument("sdf: resolution must be >= 2");
  if (padding < 0.0) throw std::invalid_argument("sdf: padding must be non-negative");

  geom::Aabb box;
  for (const auto& body : bodies) box.expand(body.bounds());
  box.pad(padding);

  const Vec3 extent = box.extent();
  const double longest = std::max({extent.x, extent.y, extent.z});
  if (longest <= 0.0) throw std::invalid_argument("sdf: bodies have zero extent");

  GridSpec spec;
  spec.voxel = longest / (resolution - 1);
  const auto nodes_for = [&](double e) {
    return std::max(2, static_cast<int>(std::ceil(e / spec.voxel - 1e-9)) + 1);
  };
  spec.nx = nodes_for(extent.x);
  spec.ny = nodes_for(extent.y);
  spec.nz = nodes_for(extent.z);
  // center the whole-voxel rounding slack
  spec.origin = box.min - Vec3{(spec.nx - 1) * spec.voxel - extent.x,
                               (spec.ny - 1) * spec.voxel - extent.y,
                               (spec.nz - 1) * spec.voxel - extent.z} *
                              0.5;
  return spec;
}

SdfVolume build_body_sdf(const geom::TriMesh& mesh, const GridSpec& spec) {
  const auto report = geom::validate_watertight(mesh);
  if (!report.watertight())
    throw std::invalid_argument("sdf: mesh is not watertight (" +
                                std::to_string(report.boundary_edges.size()) + " boundary, " +
                                std::to_string(report.nonmanifold_edges.size()) +
                                " non-manifold edges)");

  const geom::TriBvh bvh(mesh);
  const geom::Aabb body_box = mesh.bounds();

  SdfVolume volume;
  volume.spec = spec;
  volume.field.resize(spec.node_count());

  parallel_for_chunks(spec.nz, [&](int64_t begin, int64_t end) {
    for (int k = static_cast<int>(begin); k < static_cast<int>(end); ++k) {
      for (int j = 0; j < spec.ny; ++j) {
        // distance changes by at most one voxel per step along the row, which
        // gives the next query a tight exact-pruning bound
        double prev = std::numeric_limits<double>::infinity();
        for (int i = 0; i < spec.nx; ++i) {
          const Vec3 p = spec.node_position(i, j, k);
          const double upper =
              std::isfinite(prev) ? (prev + spec.voxel) * (prev + spec.voxel)
                                  : std::numeric_limits<double>::infinity();
          const double dist = std::sqrt(bvh.squared_distance(p, upper));
          prev = dist;
          const bool inside = body_box.contains(p) && bvh.inside(p);
          volume.at(i, j, k) = static_cast<float>(inside ? -dist : dist);
        }
      }
    }
  });
  return volume;
}

void min_into(SdfVolume& acc, const SdfVolume& v) {
  if (!(acc.spec == v.spec)) throw std::invalid_argument("sdf: grid specs differ");
  kernels::min_inplace(acc.field.data(), v.field.data(), acc.field.size());
}

SdfVolume accumulate_min(const std::vector<SdfVolume>& volumes) {
  if (volumes.empty()) throw std::invalid_argument("sdf: nothing to accumulate");
  SdfVolume out = volumes.front();
  for (size_t i = 1; i < volumes.size(); ++i) min_into(out, volumes[i]);
  return out;
}

SdfVolume accumulate_body_sdf(const std::vector<geom::TriMesh>& bodies, int resolution,
                              double padding) {
  const GridSpec spec = grid_from_bodies(bodies, resolution, padding);
  SdfVolume out;
  out.spec = spec;
  out.field.assign(spec.node_count(), static_cast<float>(kOutsideSdf));

  for (const geom::TriMesh& body : bodies) {
    geom::Aabb box = body.bounds();
    box.pad(padding);
    const auto node_below = [&](double c, double o, int n) {
      return std::clamp(static_cast<int>(std::floor((c - o) / spec.voxel)), 0, n - 1);
    };
    const auto node_above = [&](double c, double o, int n) {
      return std::clamp(static_cast<int>(std::ceil((c - o) / spec.voxel)), 0, n - 1);
    };
    const int i0 = node_below(box.min.x, spec.origin.x, spec.nx);
    const int j0 = node_below(box.min.y, spec.origin.y, spec.ny);
    const int k0 = node_below(box.min.z, spec.origin.z, spec.nz);
    const int i1 = node_above(box.max.x, spec.origin.x, spec.nx);
    const int j1 = node_above(box.max.y, spec.origin.y, spec.ny);
    const int k1 = node_above(box.max.z, spec.origin.z, spec.nz);

    GridSpec window;
    window.origin = spec.node_position(i0, j0, k0);
    window.voxel = spec.voxel;
    window.nx = i1 - i0 + 1;
    window.ny = j1 - j0 + 1;
    window.nz = k1 - k0 + 1;
    const SdfVolume local = build_body_sdf(body, window);
    for (int k = 0; k < window.nz; ++k)
      for (int j = 0; j < window.ny; ++j)
        for (int i = 0; i < window.nx; ++i) {
          float& node = out.at(i0 + i, j0 + j, k0 + k);
          node = std::min(node, local.at(i, j, k));
        }
  }
  return out;
}

void save_volume(const SdfVolume& volume, const std::string& base_path) {
  {
    std::ofstream raw(base_path + ".raw", std::ios::binary);
    if (!raw) throw std::runtime_error("sdf: cannot write '" + base_path + ".raw'");
    for (const float v : volume.field) {
      const uint32_t bits = std::bit_cast<uint32_t>(v);
      const char bytes[4] = {static_cast<char>(bits & 0xff), static_cast<char>((bits >> 8) & 0xff),
                             static_cast<char>((bits >> 16) & 0xff),
                             static_cast<char>((bits >> 24) & 0xff)};
      raw.write(bytes, 4);
    }
  }
  nlohmann::ordered_json meta;
  meta["schema"] = "sdf-volume-v1";
  meta["origin"] = {volume.spec.origin.x, volume.spec.origin.y, volume.spec.origin.z};
  meta["voxel"] = volume.spec.voxel;
  meta["nodes"] = {volume.spec.nx, volume.spec.ny, volume.spec.nz};
  std::ofstream side(base_path + ".json");
  if (!side) throw std::runtime_error("sdf: cannot write '" + base_path + ".json'");
  side << meta.dump(2) << "\n";
}

SdfVolume load_volume(const std::string& base_path) {
  std::ifstream side(base_path + ".json");
  if (!side) throw std::runtime_error("sdf: cannot open '" + base_path + ".json'");
  nlohmann::json meta = nlohmann::json::parse(side);
  if (meta.value("schema", "") != "sdf-volume-v1")
    throw std::runtime_error("sdf: unrecognized sidecar schema in '" + base_path + ".json'");

  SdfVolume volume;
  volume.spec.origin = {meta["origin"][0], meta["origin"][1], meta["origin"][2]};
  volume.spec.voxel = meta["voxel"];
  volume.spec.nx = meta["nodes"][0];
  volume.spec.ny = meta["nodes"][1];
  volume.spec.nz = meta["nodes"][2];

  std::ifstream raw(base_path + ".raw", std::ios::binary);
  if (!raw) throw std::runtime_error("sdf: cannot open '" + base_path + ".raw'");
  volume.field.resize(volume.spec.node_count());
  for (float& v : volume.field) {
    char bytes[4];
    raw.read(bytes, 4);
    if (!raw) throw std::runtime_error("sdf: truncated raw volume '" + base_path + ".raw'");
    const auto b = [&](int k) { return static_cast<uint32_t>(static_cast<uint8_t>(bytes[k])); };
    v = std::bit_cast<float>(b(0) | b(1) << 8 | b(2) << 16 | b(3) << 24);
  }
  return volume;
}

}  // namespace roomfit::sdf
