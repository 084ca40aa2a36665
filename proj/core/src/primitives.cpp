#include "scenesmith/asset_library.hpp"

#include <cmath>
#include <map>
#include <numbers>

namespace scenesmith {

namespace {

constexpr std::array<std::string_view, 5> kKindNames = {"box", "cylinder", "sphere", "plane", "wedge"};

// Procedural solids are convex, so winding is fixed by comparing each face
// normal with the direction from an interior point to the face centroid.
void orient_outward(Mesh& m, const Vec3& inside = Vec3::Zero()) {
  for (auto& f : m.faces) {
    const Vec3& a = m.vertices[f[0]];
    const Vec3& b = m.vertices[f[1]];
    const Vec3& c = m.vertices[f[2]];
    if ((b - a).cross(c - a).dot((a + b + c) / 3.0 - inside) < 0) std::swap(f[1], f[2]);
  }
}

Mesh make_box(const Vec3& h) {
  Mesh m;
  for (int i = 0; i < 8; ++i) {
    Vec3 s((i & 1) ? 1 : -1, (i & 2) ? 1 : -1, (i & 4) ? 1 : -1);
    m.vertices.push_back(s.cwiseProduct(h));
    m.normals.push_back(s.normalized());
  }
  m.faces = {{0, 2, 3}, {0, 3, 1}, {4, 5, 7}, {4, 7, 6}, {0, 1, 5}, {0, 5, 4},
             {2, 6, 7}, {2, 7, 3}, {0, 4, 6}, {0, 6, 2}, {1, 3, 7}, {1, 7, 5}};
  return m;
}

Mesh make_cylinder(const Vec3& h, int n) {
  Mesh m;
  const auto un = static_cast<std::uint32_t>(n);
  for (int z = 0; z < 2; ++z) {
    for (int i = 0; i < n; ++i) {
      const double a = 2.0 * std::numbers::pi * i / n;
      m.vertices.emplace_back(h.x() * std::cos(a), h.y() * std::sin(a), z ? h.z() : -h.z());
    }
  }
  m.vertices.emplace_back(0, 0, -h.z());
  m.vertices.emplace_back(0, 0, h.z());
  for (std::uint32_t i = 0; i < un; ++i) {
    const std::uint32_t j = (i + 1) % un;
    m.faces.push_back({i, j, un + j});
    m.faces.push_back({i, un + j, un + i});
    m.faces.push_back({2 * un, j, i});
    m.faces.push_back({2 * un + 1, un + i, un + j});
  }
  orient_outward(m);
  recompute_normals(m);
  return m;
}

Mesh make_sphere(const Vec3& h, int slices) {
  const int stacks = slices / 2;
  Mesh m;
  m.vertices.emplace_back(0, 0, h.z());
  for (int k = 1; k < stacks; ++k) {
    const double theta = std::numbers::pi * k / stacks;
    for (int j = 0; j < slices; ++j) {
      const double phi = 2.0 * std::numbers::pi * j / slices;
      m.vertices.emplace_back(h.x() * std::sin(theta) * std::cos(phi), h.y() * std::sin(theta) * std::sin(phi),
                              h.z() * std::cos(theta));
    }
  }
  m.vertices.emplace_back(0, 0, -h.z());
  const auto ring = [&](int k, int j) {
    return static_cast<std::uint32_t>(1 + (k - 1) * slices + (j % slices));
  };
  const auto south = static_cast<std::uint32_t>(m.vertices.size() - 1);
  for (int j = 0; j < slices; ++j) {
    m.faces.push_back({0, ring(1, j), ring(1, j + 1)});
    for (int k = 1; k + 1 < stacks; ++k) {
      m.faces.push_back({ring(k, j), ring(k + 1, j), ring(k + 1, j + 1)});
      m.faces.push_back({ring(k, j), ring(k + 1, j + 1), ring(k, j + 1)});
    }
    m.faces.push_back({south, ring(stacks - 1, j + 1), ring(stacks - 1, j)});
  }
  orient_outward(m);
  // Ellipsoid gradient direction.
  for (const auto& v : m.vertices) {
    m.normals.push_back(v.cwiseQuotient(h.cwiseProduct(h)).normalized());
  }
  return m;
}

Mesh make_wedge(const Vec3& h) {
  Mesh m;
  for (int y = 0; y < 2; ++y) {
    const double yy = y ? h.y() : -h.y();
    m.vertices.emplace_back(-h.x(), yy, -h.z());
    m.vertices.emplace_back(h.x(), yy, -h.z());
    m.vertices.emplace_back(-h.x(), yy, h.z());
  }
  m.faces = {{0, 1, 2}, {3, 5, 4}, {0, 3, 4}, {0, 4, 1}, {0, 2, 5}, {0, 5, 3}, {1, 4, 5}, {1, 5, 2}};
  orient_outward(m, Vec3(-h.x() / 3, 0, -h.z() / 3));
  recompute_normals(m);
  return m;
}

Mesh make_plane(const Vec3& h) {
  Mesh m;
  m.vertices = {{-h.x(), -h.y(), 0}, {h.x(), -h.y(), 0}, {h.x(), h.y(), 0}, {-h.x(), h.y(), 0}};
  m.normals.assign(4, Vec3::UnitZ());
  m.faces = {{0, 1, 2}, {0, 2, 3}};
  return m;
}

}  // namespace

std::optional<PrimitiveKind> primitive_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == s) return static_cast<PrimitiveKind>(i);
  }
  return std::nullopt;
}

std::string_view to_string(PrimitiveKind k) { return kKindNames[static_cast<std::size_t>(k)]; }

Mesh make_primitive(PrimitiveKind kind, const Vec3& extents, int segments) {
  const bool flat = kind == PrimitiveKind::kPlane;
  if (!all_finite(extents) || extents.x() <= 0 || extents.y() <= 0 || (!flat && extents.z() <= 0)) {
    throw LibraryError("NonPositiveExtents", "primitive extents must be positive");
  }
  const bool round = kind == PrimitiveKind::kCylinder || kind == PrimitiveKind::kSphere;
  if (round && (segments < 4 || segments % 4 != 0)) {
    throw LibraryError("InvalidSegments", "segments must be a positive multiple of 4", std::to_string(segments));
  }
  const Vec3 half = extents / 2.0;
  switch (kind) {
    case PrimitiveKind::kBox: return make_box(half);
    case PrimitiveKind::kCylinder: return make_cylinder(half, segments);
    case PrimitiveKind::kSphere: return make_sphere(half, segments);
    case PrimitiveKind::kPlane: return make_plane(half);
    case PrimitiveKind::kWedge: return make_wedge(half);
  }
  throw LibraryError("InvalidPrimitive", "unknown primitive kind");
}

Mesh fit_to_extents(const Mesh& mesh, const Vec3& extents) {
  const Aabb box = mesh_bounds(mesh);
  const Vec3 size = box.size();
  Vec3 scale;
  for (int i = 0; i < 3; ++i) scale[i] = size[i] > 0 ? extents[i] / size[i] : 1.0;
  const Mat3 linear = scale.asDiagonal();
  return transformed(mesh, linear, -(linear * box.center()));
}

CatalogEntry catalog_lookup(std::string_view object_type) {
  using K = PrimitiveKind;
  static const std::map<std::string, CatalogEntry, std::less<>> kCatalog = {
      {"table", {K::kBox, {1.2, 0.8, 0.75}, "itu_wood"}},
      {"desk", {K::kBox, {1.4, 0.7, 0.75}, "itu_wood"}},
      {"chair", {K::kBox, {0.5, 0.5, 0.9}, "itu_wood"}},
      {"stool", {K::kCylinder, {0.4, 0.4, 0.65}, "itu_wood"}},
      {"nightstand", {K::kBox, {0.5, 0.4, 0.55}, "itu_wood"}},
      {"lamp", {K::kCylinder, {0.3, 0.3, 0.5}, "itu_metal"}},
      {"bowl", {K::kCylinder, {0.15, 0.15, 0.07}, "itu_glass"}},
      {"cup", {K::kCylinder, {0.08, 0.08, 0.1}, "itu_glass"}},
      {"vase", {K::kCylinder, {0.25, 0.25, 0.4}, "itu_glass"}},
      {"plant", {K::kCylinder, {0.5, 0.5, 1.2}, "itu_chipboard"}},
      {"sofa", {K::kBox, {2.0, 0.9, 0.85}, "itu_chipboard"}},
      {"couch", {K::kBox, {2.0, 0.9, 0.85}, "itu_chipboard"}},
      {"bed", {K::kBox, {2.0, 1.6, 0.6}, "itu_wood"}},
      {"cabinet", {K::kBox, {1.0, 0.5, 1.8}, "itu_metal"}},
      {"shelf", {K::kBox, {1.0, 0.35, 1.8}, "itu_wood"}},
      {"bookshelf", {K::kBox, {1.0, 0.35, 2.0}, "itu_wood"}},
      {"wardrobe", {K::kBox, {1.2, 0.6, 2.0}, "itu_wood"}},
      {"counter", {K::kBox, {2.5, 0.8, 1.1}, "itu_marble"}},
      {"monitor", {K::kBox, {0.6, 0.2, 0.45}, "itu_metal"}},
      {"tv", {K::kBox, {1.2, 0.1, 0.7}, "itu_metal"}},
      {"whiteboard", {K::kBox, {2.0, 0.05, 1.2}, "itu_plasterboard"}},
      {"window", {K::kBox, {1.5, 0.05, 1.2}, "itu_glass"}},
      {"door", {K::kBox, {0.9, 0.05, 2.1}, "itu_wood"}},
      {"pillar", {K::kBox, {0.5, 0.5, 3.0}, "itu_concrete"}},
      {"column", {K::kCylinder, {0.5, 0.5, 3.0}, "itu_concrete"}},
      {"wall", {K::kBox, {3.0, 0.15, 3.0}, "itu_plasterboard"}},
      {"partition", {K::kBox, {2.0, 0.1, 2.0}, "itu_plasterboard"}},
      {"box", {K::kBox, {0.5, 0.5, 0.5}, "itu_chipboard"}},
      {"crate", {K::kBox, {0.6, 0.6, 0.6}, "itu_wood"}},
      {"ball", {K::kSphere, {0.3, 0.3, 0.3}, "itu_chipboard"}},
      {"globe", {K::kSphere, {0.4, 0.4, 0.4}, "itu_glass"}},
      {"ramp", {K::kWedge, {1.0, 1.0, 0.5}, "itu_concrete"}},
      {"rug", {K::kPlane, {2.0, 1.5, 0.0}, "itu_chipboard"}},
      {"mat", {K::kPlane, {1.0, 0.6, 0.0}, "itu_chipboard"}},
      {"router", {K::kBox, {0.25, 0.15, 0.05}, "itu_metal"}},
      {"server_rack", {K::kBox, {0.6, 1.0, 2.0}, "itu_metal"}},
      {"workbench", {K::kBox, {1.8, 0.8, 0.9}, "itu_metal"}},
      {"reception_desk", {K::kBox, {3.0, 0.9, 1.1}, "itu_wood"}},
      {"coffee_table", {K::kBox, {1.0, 0.6, 0.45}, "itu_wood"}},
      {"armchair", {K::kBox, {0.9, 0.85, 0.9}, "itu_chipboard"}},
      {"bench", {K::kBox, {1.6, 0.45, 0.45}, "itu_wood"}},
      {"trash_can", {K::kCylinder, {0.35, 0.35, 0.6}, "itu_metal"}},
      {"kiosk", {K::kBox, {0.6, 0.6, 1.5}, "itu_metal"}},
  };
  if (auto it = kCatalog.find(object_type); it != kCatalog.end()) return it->second;
  return {PrimitiveKind::kBox, Vec3::Constant(0.5), "itu_concrete"};
}

}  // namespace scenesmith
