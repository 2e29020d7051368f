#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "roomfit/geom/bvh.hpp"
#include "roomfit/hsi/hsi.hpp"

namespace roomfit::hsi {

using geom::Vec3;

Category category_from_string(const std::string& name) {
  std::string s = name;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "chair") return Category::Chair;
  if (s == "sofa") return Category::Sofa;
  if (s == "bed") return Category::Bed;
  if (s == "table") return Category::Table;
  throw std::invalid_argument("contacts: unknown category '" + name + "'");
}

const char* to_string(Category c) {
  switch (c) {
    case Category::Chair: return "chair";
    case Category::Sofa: return "sofa";
    case Category::Bed: return "bed";
    default: return "table";
  }
}

ContactRegions extract_contact_regions(const geom::TriMesh& canonical, Category category) {
  geom::TriMesh scratch;
  const std::vector<Vec3>* normals = &canonical.normals;
  if (!canonical.has_normals()) {
    scratch = canonical;
    scratch.compute_vertex_normals();
    normals = &scratch.normals;
  }

  const geom::Aabb box = canonical.bounds();
  const double cutoff_y = box.min.y + 0.6 * (box.max.y - box.min.y);
  const bool seated = category == Category::Chair || category == Category::Sofa;
  const double cos_limit = std::cos(geom::deg2rad(30.0));

  ContactRegions regions;
  for (size_t v = 0; v < canonical.vertices.size(); ++v) {
    const Vec3& n = (*normals)[v];
    const double y = canonical.vertices[v].y;
    if (n.y >= cos_limit) {
      // seats live on the lower part of chairs and sofas; beds and tables
      // contribute their top surface instead
      const bool in_band = seated ? y <= cutoff_y : y >= cutoff_y;
      if (in_band) regions.seat.push_back(static_cast<int>(v));
    } else if (seated && n.z >= cos_limit) {
      regions.back.push_back(static_cast<int>(v));
    }
  }
  return regions;
}

ContactAssignment assign_contacts(const raster::Intrinsics& intr,
                                  const std::vector<std::vector<Vec3>>& contact_verts_cam,
                                  const geom::Mat3& cam_rotation,
                                  const std::vector<raster::MaskImage>& dilated_masks,
                                  const std::vector<geom::TriMesh>& posed_objects,
                                  double radius) {
  if (dilated_masks.size() != posed_objects.size())
    throw std::invalid_argument("contacts: mask/object count mismatch");
  const geom::Mat3 cam_to_world = cam_rotation.transposed();

  std::vector<geom::TriBvh> surfaces;
  std::vector<geom::Aabb> boxes;
  surfaces.reserve(posed_objects.size());
  for (const auto& obj : posed_objects) {
    surfaces.emplace_back(obj);
    boxes.push_back(obj.bounds());
  }
  const double radius_sq = radius * radius;

  ContactAssignment out;
  out.object_of.resize(contact_verts_cam.size());
  for (size_t f = 0; f < contact_verts_cam.size(); ++f) {
    out.object_of[f].assign(contact_verts_cam[f].size(), -1);
    for (size_t v = 0; v < contact_verts_cam[f].size(); ++v) {
      const Vec3& p_cam = contact_verts_cam[f][v];
      const auto proj = raster::project_camera_point(intr, p_cam);
      if (!proj.valid) continue;
      const int px = static_cast<int>(std::floor(proj.u));
      const int py = static_cast<int>(std::floor(proj.v));
      if (px < 0 || py < 0 || px >= intr.width || py >= intr.height) continue;

      const Vec3 p_world = cam_to_world * p_cam;
      int best = -1;
      double best_p2s = std::numeric_limits<double>::infinity();
      for (size_t i = 0; i < posed_objects.size(); ++i) {
        if (!dilated_masks[i].at(px, py)) continue;
        if (boxes[i].squared_distance(p_world) >= radius_sq) continue;
        const double p2s = surfaces[i].squared_distance(p_world);
        if (p2s < best_p2s) {
          best_p2s = p2s;
          best = static_cast<int>(i);
        }
      }
      out.object_of[f][v] = best;
    }
  }
  return out;
}

std::vector<std::vector<Vec3>> group_contact_points(
    const ContactAssignment& assignment, const std::vector<std::vector<Vec3>>& contact_verts_cam,
    const geom::Mat3& cam_rotation, size_t object_count) {
  if (assignment.object_of.size() != contact_verts_cam.size())
    throw std::invalid_argument("contacts: assignment/frame count mismatch");
  const geom::Mat3 cam_to_world = cam_rotation.transposed();
  std::vector<std::vector<Vec3>> grouped(object_count);
  for (size_t f = 0; f < contact_verts_cam.size(); ++f) {
    for (size_t v = 0; v < contact_verts_cam[f].size(); ++v) {
      const int obj = assignment.object_of[f][v];
      if (obj < 0) continue;
      grouped[static_cast<size_t>(obj)].push_back(cam_to_world * contact_verts_cam[f][v]);
    }
  }
  return grouped;
}

}  // namespace roomfit::hsi
