#include "roomfit/geom/primitives.hpp"

#include <map>

namespace roomfit::geom {

namespace {

// Welds vertices by exact coordinates. Generators below compute shared lattice
// points with identical arithmetic, so bitwise equality is sufficient.
struct Welder {
  std::map<std::array<double, 3>, int> index;
  TriMesh& mesh;
  explicit Welder(TriMesh& m) : mesh(m) {}
  int add(const Vec3& p) {
    auto [it, inserted] =
        index.try_emplace({p.x, p.y, p.z}, static_cast<int>(mesh.vertices.size()));
    if (inserted) mesh.vertices.push_back(p);
    return it->second;
  }
};

void add_quad(TriMesh& m, int a, int b, int c, int d) {
  m.faces.push_back({a, b, c});
  m.faces.push_back({a, c, d});
}

}  // namespace

TriMesh make_box(const Vec3& e, int top_segments) {
  const int n = std::max(1, top_segments);
  TriMesh m;
  Welder w(m);
  const double hx = e.x / 2.0, hz = e.z / 2.0;
  const Vec3 sx{e.x / n, 0, 0}, sy{0, e.y, 0}, sz{0, 0, e.z / n};

  // du x dv points outward for every face
  auto face = [&](const Vec3& o, const Vec3& du, const Vec3& dv, int nu, int nv) {
    for (int i = 0; i < nu; ++i)
      for (int j = 0; j < nv; ++j) {
        const int a = w.add(o + du * double(i) + dv * double(j));
        const int b = w.add(o + du * double(i + 1) + dv * double(j));
        const int c = w.add(o + du * double(i + 1) + dv * double(j + 1));
        const int d = w.add(o + du * double(i) + dv * double(j + 1));
        add_quad(m, a, b, c, d);
      }
  };

  face({-hx, e.y, -hz}, sz, sx, n, n);  // top
  face({-hx, 0, -hz}, sx, sz, n, n);    // bottom
  face({hx, 0, -hz}, sy, sz, 1, n);     // +x
  face({-hx, 0, -hz}, sz, sy, n, 1);    // -x
  face({-hx, 0, hz}, sx, sy, n, 1);     // +z
  face({-hx, 0, -hz}, sy, sx, 1, n);    // -z
  return m;
}

TriMesh make_box_grid(const Vec3& e, int sx, int sy, int sz) {
  const int nx = std::max(1, sx), ny = std::max(1, sy), nz = std::max(1, sz);
  // shared lattice coordinates so adjacent faces weld bitwise
  std::vector<double> X(nx + 1), Y(ny + 1), Z(nz + 1);
  for (int i = 0; i <= nx; ++i) X[i] = -e.x / 2.0 + e.x * double(i) / nx;
  for (int j = 0; j <= ny; ++j) Y[j] = e.y * double(j) / ny;
  for (int k = 0; k <= nz; ++k) Z[k] = -e.z / 2.0 + e.z * double(k) / nz;

  TriMesh m;
  Welder w(m);
  // du x dv points outward for every face
  auto face = [&](auto&& point, int nu, int nv) {
    for (int u = 0; u < nu; ++u)
      for (int v = 0; v < nv; ++v) {
        const int a = w.add(point(u, v));
        const int b = w.add(point(u + 1, v));
        const int c = w.add(point(u + 1, v + 1));
        const int d = w.add(point(u, v + 1));
        add_quad(m, a, b, c, d);
      }
  };
  face([&](int k, int i) { return Vec3{X[i], Y[ny], Z[k]}; }, nz, nx);  // top
  face([&](int i, int k) { return Vec3{X[i], Y[0], Z[k]}; }, nx, nz);   // bottom
  face([&](int j, int k) { return Vec3{X[nx], Y[j], Z[k]}; }, ny, nz);  // +x
  face([&](int k, int j) { return Vec3{X[0], Y[j], Z[k]}; }, nz, ny);   // -x
  face([&](int i, int j) { return Vec3{X[i], Y[j], Z[nz]}; }, nx, ny);  // +z
  face([&](int j, int i) { return Vec3{X[i], Y[j], Z[0]}; }, ny, nx);   // -z
  return m;
}

TriMesh make_uv_sphere(double radius, int slices, int stacks) {
  TriMesh m;
  const int ns = std::max(3, slices), nt = std::max(2, stacks);
  const int north = 0, south = 1;
  m.vertices.push_back({0, radius, 0});
  m.vertices.push_back({0, -radius, 0});
  auto ring_vertex = [&](int i, int j) {
    return 2 + (i - 1) * ns + (j % ns);
  };
  for (int i = 1; i < nt; ++i) {
    const double theta = kPi * i / nt;
    for (int j = 0; j < ns; ++j) {
      const double phi = kTwoPi * j / ns;
      m.vertices.push_back({radius * std::sin(theta) * std::cos(phi),
                            radius * std::cos(theta),
                            radius * std::sin(theta) * std::sin(phi)});
    }
  }
  for (int j = 0; j < ns; ++j) {
    m.faces.push_back({north, ring_vertex(1, j + 1), ring_vertex(1, j)});
    m.faces.push_back({south, ring_vertex(nt - 1, j), ring_vertex(nt - 1, j + 1)});
  }
  for (int i = 1; i < nt - 1; ++i)
    for (int j = 0; j < ns; ++j)
      add_quad(m, ring_vertex(i, j), ring_vertex(i, j + 1),
               ring_vertex(i + 1, j + 1), ring_vertex(i + 1, j));
  return m;
}

TriMesh make_capsule(const Vec3& a, const Vec3& b, double radius, int slices, int stacks) {
  const int ns = std::max(3, slices), nt = std::max(1, stacks);
  const double h = (b - a).norm();

  // rings of a +y capsule from y=0 to y=h, bottom to top
  struct Ring {
    double y, rho;
  };
  std::vector<Ring> rings;
  for (int i = 1; i <= nt; ++i) {
    const double lam = (kPi / 2.0) * i / nt;
    rings.push_back({-radius * std::cos(lam), radius * std::sin(lam)});
  }
  for (int i = 0; i < nt; ++i) {
    const double lam = (kPi / 2.0) * i / nt;
    rings.push_back({h + radius * std::sin(lam), radius * std::cos(lam)});
  }

  const Vec3 u = h > 0 ? (b - a) / h : Vec3{0, 1, 0};
  const Vec3 helper = std::abs(u.y) < 0.9 ? Vec3{0, 1, 0} : Vec3{1, 0, 0};
  const Vec3 p = helper.cross(u).normalized();
  const Vec3 q = p.cross(u);
  auto place = [&](double x, double y, double z) { return a + p * x + u * y + q * z; };

  TriMesh m;
  m.vertices.push_back(place(0, -radius, 0));      // south pole
  m.vertices.push_back(place(0, h + radius, 0));   // north pole
  const int south = 0, north = 1;
  const int nr = static_cast<int>(rings.size());
  for (const Ring& r : rings)
    for (int j = 0; j < ns; ++j) {
      const double phi = kTwoPi * j / ns;
      m.vertices.push_back(place(r.rho * std::cos(phi), r.y, r.rho * std::sin(phi)));
    }
  auto rv = [&](int i, int j) { return 2 + i * ns + (j % ns); };
  for (int j = 0; j < ns; ++j) {
    m.faces.push_back({south, rv(0, j), rv(0, j + 1)});
    m.faces.push_back({north, rv(nr - 1, j + 1), rv(nr - 1, j)});
  }
  for (int i = 0; i + 1 < nr; ++i)
    for (int j = 0; j < ns; ++j)
      add_quad(m, rv(i + 1, j), rv(i + 1, j + 1), rv(i, j + 1), rv(i, j));
  return m;
}

TriMesh make_seat_prism(double width, double depth, double seat_height,
                        double total_height, double thickness) {
  const double d2 = depth / 2.0, hx = width / 2.0;
  // L cross-section in (z, y), counter-clockwise; solid below the seat,
  // back slab rises on the +z side
  // the seat faces +z: the backrest sits at -z so its inner surface carries
  // +z normals, matching the contact-region convention
  const std::array<std::array<double, 2>, 6> outline = {{
      {d2, 0.0},
      {d2, seat_height},
      {-d2 + thickness, seat_height},
      {-d2 + thickness, total_height},
      {-d2, total_height},
      {-d2, 0.0},
  }};
  const std::array<std::array<int, 3>, 4> cap_tris = {{{0, 1, 2}, {0, 2, 5}, {2, 3, 5}, {3, 4, 5}}};

  TriMesh m;
  Welder w(m);
  auto at = [&](double x, int k) { return Vec3{x, outline[k][1], outline[k][0]}; };

  for (const auto& t : cap_tris) {
    // CCW in (z, y) faces -x; mirror the order for the +x cap
    m.faces.push_back({w.add(at(-hx, t[0])), w.add(at(-hx, t[1])), w.add(at(-hx, t[2]))});
    m.faces.push_back({w.add(at(hx, t[0])), w.add(at(hx, t[2])), w.add(at(hx, t[1]))});
  }
  for (int k = 0; k < 6; ++k) {
    const int kn = (k + 1) % 6;
    add_quad(m, w.add(at(-hx, k)), w.add(at(hx, k)), w.add(at(hx, kn)), w.add(at(-hx, kn)));
  }
  return m;
}

void append_mesh(TriMesh& dst, const TriMesh& src) {
  const int base = static_cast<int>(dst.vertices.size());
  dst.vertices.insert(dst.vertices.end(), src.vertices.begin(), src.vertices.end());
  for (const auto& f : src.faces)
    dst.faces.push_back({f[0] + base, f[1] + base, f[2] + base});
  dst.normals.clear();
}

}  // namespace roomfit::geom
