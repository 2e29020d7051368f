#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "roomfit/geom/mesh.hpp"

namespace roomfit::geom {

namespace {

// "7", "7/2", "7//3", "7/2/3"; negative indices count from the end
int parse_face_index(const std::string& tok, int vertex_count) {
  const size_t slash = tok.find('/');
  const std::string head = slash == std::string::npos ? tok : tok.substr(0, slash);
  int idx = 0;
  try {
    idx = std::stoi(head);
  } catch (const std::exception&) {
    throw std::runtime_error("obj: bad face index '" + tok + "'");
  }
  if (idx < 0) idx = vertex_count + idx + 1;
  if (idx < 1 || idx > vertex_count)
    throw std::runtime_error("obj: face index out of range '" + tok + "'");
  return idx - 1;
}

}  // namespace

TriMesh load_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("obj: cannot open " + path);

  TriMesh mesh;
  std::string line;
  while (std::getline(in, line)) {
    if (line.size() >= 2 && line[0] == 'v' && (line[1] == ' ' || line[1] == '\t')) {
      std::istringstream ls(line.substr(2));
      Vec3 v;
      if (!(ls >> v.x >> v.y >> v.z))
        throw std::runtime_error("obj: malformed vertex in " + path);
      mesh.vertices.push_back(v);
    } else if (line.size() >= 2 && line[0] == 'f' && (line[1] == ' ' || line[1] == '\t')) {
      std::istringstream ls(line.substr(2));
      std::vector<int> poly;
      std::string tok;
      while (ls >> tok)
        poly.push_back(parse_face_index(tok, static_cast<int>(mesh.vertices.size())));
      if (poly.size() < 3)
        throw std::runtime_error("obj: face with fewer than 3 vertices in " + path);
      for (size_t k = 2; k < poly.size(); ++k)
        mesh.faces.push_back({poly[0], poly[k - 1], poly[k]});
    }
    // vn/vt/usemtl/o/g/s/# are ignored
  }
  mesh.validate();
  return mesh;
}

void save_obj(const TriMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("obj: cannot write " + path);
  char buf[128];
  for (const Vec3& v : mesh.vertices) {
    std::snprintf(buf, sizeof(buf), "v %.17g %.17g %.17g\n", v.x, v.y, v.z);
    out << buf;
  }
  for (const auto& f : mesh.faces)
    out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  if (!out) throw std::runtime_error("obj: write failed for " + path);
}

}  // namespace roomfit::geom
