#include "scenesmith/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace scenesmith {

void validate_mesh(const Mesh& mesh) {
  const auto n = mesh.vertices.size();
  if (mesh.normals.size() != n) throw GeometryError("InvalidMesh", "normal count differs from vertex count");
  for (std::size_t i = 0; i < n; ++i) {
    if (!all_finite(mesh.vertices[i])) throw GeometryError("InvalidMesh", "non-finite vertex", std::to_string(i));
    if (std::abs(mesh.normals[i].norm() - 1.0) > 1e-4) {
      throw GeometryError("InvalidMesh", "normal is not unit length", std::to_string(i));
    }
  }
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    for (auto idx : mesh.faces[f]) {
      if (idx >= n) throw GeometryError("InvalidMesh", "face index out of range", std::to_string(f));
    }
    const auto& [a, b, c] = mesh.faces[f];
    if ((mesh.vertices[b] - mesh.vertices[a]).cross(mesh.vertices[c] - mesh.vertices[a]).norm() <= 0.0) {
      throw GeometryError("InvalidMesh", "zero-area face", std::to_string(f));
    }
  }
}

Aabb mesh_bounds(const Mesh& mesh) {
  Aabb box;
  for (const auto& v : mesh.vertices) box.expand(v);
  return box;
}

double mesh_volume(const Mesh& mesh) {
  double six_v = 0;
  for (const auto& [a, b, c] : mesh.faces) {
    six_v += mesh.vertices[a].dot(mesh.vertices[b].cross(mesh.vertices[c]));
  }
  return six_v / 6.0;
}

bool is_closed(const Mesh& mesh) {
  if (mesh.faces.empty()) return false;
  std::map<std::pair<std::uint32_t, std::uint32_t>, int> edges;
  for (const auto& f : mesh.faces) {
    for (int e = 0; e < 3; ++e) {
      auto u = f[e], v = f[(e + 1) % 3];
      ++edges[{std::min(u, v), std::max(u, v)}];
    }
  }
  return std::all_of(edges.begin(), edges.end(), [](const auto& kv) { return kv.second == 2; });
}

Vec3 face_normal(const Mesh& mesh, std::size_t face) {
  const auto& [a, b, c] = mesh.faces[face];
  return (mesh.vertices[b] - mesh.vertices[a]).cross(mesh.vertices[c] - mesh.vertices[a]).normalized();
}

void recompute_normals(Mesh& mesh) {
  mesh.normals.assign(mesh.vertices.size(), Vec3::Zero());
  for (const auto& [a, b, c] : mesh.faces) {
    Vec3 n = (mesh.vertices[b] - mesh.vertices[a]).cross(mesh.vertices[c] - mesh.vertices[a]);
    mesh.normals[a] += n;
    mesh.normals[b] += n;
    mesh.normals[c] += n;
  }
  for (auto& n : mesh.normals) {
    double len = n.norm();
    n = len > 0 ? Vec3(n / len) : Vec3::UnitZ();
  }
}

Mesh transformed(const Mesh& mesh, const Mat3& linear, const Vec3& translation) {
  Mesh out;
  out.faces = mesh.faces;
  out.vertices.reserve(mesh.vertices.size());
  for (const auto& v : mesh.vertices) out.vertices.push_back(linear * v + translation);
  const Mat3 normal_m = linear.inverse().transpose();
  out.normals.reserve(mesh.normals.size());
  for (const auto& n : mesh.normals) {
    Vec3 m = normal_m * n;
    double len = m.norm();
    out.normals.push_back(len > 0 ? Vec3(m / len) : n);
  }
  if (linear.determinant() < 0) {
    for (auto& f : out.faces) std::swap(f[1], f[2]);
  }
  return out;
}

std::optional<double> intersect_triangle(const Vec3& origin, const Vec3& dir, const Vec3& a, const Vec3& b,
                                         const Vec3& c, double t_min, double t_max) {
  const Vec3 e1 = b - a;
  const Vec3 e2 = c - a;
  const Vec3 p = dir.cross(e2);
  const double det = e1.dot(p);
  if (det == 0.0) return std::nullopt;
  const double inv = 1.0 / det;
  const Vec3 s = origin - a;
  const double u = s.dot(p) * inv;
  if (u < 0.0 || u > 1.0) return std::nullopt;
  const Vec3 q = s.cross(e1);
  const double v = dir.dot(q) * inv;
  if (v < 0.0 || u + v > 1.0) return std::nullopt;
  const double t = e2.dot(q) * inv;
  if (t <= t_min || t > t_max) return std::nullopt;
  return t;
}

Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  // Voronoi-region walk over vertices, edges, then the face interior.
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0 && d2 <= 0) return a;
  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0 && d4 <= d3) return b;
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0 && d1 >= 0 && d3 <= 0) return a + ab * (d1 / (d1 - d3));
  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0 && d5 <= d6) return c;
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0 && d2 >= 0 && d6 <= 0) return a + ac * (d2 / (d2 - d6));
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

namespace {

// Entry distance of the ray into the box, or nullopt if it misses within t_max.
std::optional<double> ray_box(const Aabb& box, const Vec3& origin, const Vec3& dir, double t_max) {
  double t0 = 0.0, t1 = t_max;
  for (int i = 0; i < 3; ++i) {
    if (dir[i] == 0.0) {
      if (origin[i] < box.min[i] || origin[i] > box.max[i]) return std::nullopt;
      continue;
    }
    const double inv = 1.0 / dir[i];
    double tn = (box.min[i] - origin[i]) * inv;
    double tf = (box.max[i] - origin[i]) * inv;
    if (tn > tf) std::swap(tn, tf);
    t0 = std::max(t0, tn);
    t1 = std::min(t1, tf);
    if (t0 > t1) return std::nullopt;
  }
  return t0;
}

std::size_t count_crossings(std::vector<double>& ts) {
  std::sort(ts.begin(), ts.end());
  std::size_t n = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (i == 0 || ts[i] - ts[i - 1] > tol::kHitDedup) ++n;
  }
  return n;
}

}  // namespace

std::array<Vec3, 3> Bvh::triangle(const Primitive& p) const {
  const Mesh& m = objects_[p.object].mesh;
  const auto& f = m.faces[p.face];
  return {m.vertices[f[0]], m.vertices[f[1]], m.vertices[f[2]]};
}

Bvh Bvh::build(std::vector<BvhInput> objects) {
  Bvh bvh;
  bvh.objects_ = std::move(objects);
  std::vector<Vec3> centroids;
  for (std::uint32_t o = 0; o < bvh.objects_.size(); ++o) {
    const Mesh& m = bvh.objects_[o].mesh;
    bvh.closed_.push_back(is_closed(m));
    for (std::uint32_t f = 0; f < m.faces.size(); ++f) {
      bvh.prims_.push_back({o, f});
      auto [a, b, c] = bvh.triangle(bvh.prims_.back());
      centroids.push_back((a + b + c) / 3.0);
    }
  }
  if (bvh.prims_.empty()) throw GeometryError("EmptyScene", "no triangles to build a BVH from");
  bvh.nodes_.reserve(2 * bvh.prims_.size() / kLeafSize + 1);
  bvh.build_node(0, static_cast<std::uint32_t>(bvh.prims_.size()), centroids);
  return bvh;
}

std::uint32_t Bvh::build_node(std::uint32_t begin, std::uint32_t end, std::vector<Vec3>& centroids) {
  const auto index = static_cast<std::uint32_t>(nodes_.size());
  nodes_.emplace_back();
  Aabb bounds;
  for (auto i = begin; i < end; ++i) {
    for (const auto& v : triangle(prims_[i])) bounds.expand(v);
  }
  nodes_[index].bounds = bounds;
  if (end - begin <= kLeafSize) {
    nodes_[index].first = begin;
    nodes_[index].count = end - begin;
    return index;
  }

  // Full sort with an index tie-break keeps the split independent of the
  // standard library's partitioning strategy.
  const int axis = bounds.longest_axis();
  std::vector<std::uint32_t> order(end - begin);
  std::iota(order.begin(), order.end(), begin);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (centroids[a][axis] != centroids[b][axis]) return centroids[a][axis] < centroids[b][axis];
    return a < b;
  });
  std::vector<Primitive> prims;
  std::vector<Vec3> cents;
  for (auto i : order) {
    prims.push_back(prims_[i]);
    cents.push_back(centroids[i]);
  }
  std::copy(prims.begin(), prims.end(), prims_.begin() + begin);
  std::copy(cents.begin(), cents.end(), centroids.begin() + begin);

  const std::uint32_t mid = begin + (end - begin) / 2;
  const auto left = build_node(begin, mid, centroids);
  const auto right = build_node(mid, end, centroids);
  nodes_[index].left = left;
  nodes_[index].right = right;
  return index;
}

std::optional<RayHit> Bvh::ray_cast(const Vec3& origin, const Vec3& direction, double t_max) const {
  std::optional<RayHit> best;
  double best_t = t_max;
  std::vector<std::uint32_t> stack{0};
  while (!stack.empty()) {
    const Node& node = nodes_[stack.back()];
    stack.pop_back();
    auto entry = ray_box(node.bounds, origin, direction, best_t);
    if (!entry) continue;
    if (node.is_leaf()) {
      for (auto i = node.first; i < node.first + node.count; ++i) {
        auto [a, b, c] = triangle(prims_[i]);
        if (auto t = intersect_triangle(origin, direction, a, b, c, tol::kSurfaceEps, best_t)) {
          // Equal t across faces: keep the lowest (object, face) for determinism.
          if (best && *t == best_t &&
              std::tie(best->object_index, best->face_index) < std::tie(prims_[i].object, prims_[i].face)) {
            continue;
          }
          best_t = *t;
          RayHit hit;
          hit.t = *t;
          hit.point = origin + *t * direction;
          hit.face_normal = (b - a).cross(c - a).normalized();
          hit.object_index = prims_[i].object;
          hit.face_index = prims_[i].face;
          best = std::move(hit);
        }
      }
      continue;
    }
    // Push the farther child first so the nearer one is popped next.
    auto tl = ray_box(nodes_[node.left].bounds, origin, direction, best_t);
    auto tr = ray_box(nodes_[node.right].bounds, origin, direction, best_t);
    if (tl && tr) {
      if (*tl <= *tr) {
        stack.push_back(node.right);
        stack.push_back(node.left);
      } else {
        stack.push_back(node.left);
        stack.push_back(node.right);
      }
    } else if (tl) {
      stack.push_back(node.left);
    } else if (tr) {
      stack.push_back(node.right);
    }
  }
  if (best) best->object_name = objects_[best->object_index].name;
  return best;
}

void Bvh::for_each_hit(const Vec3& origin, const Vec3& direction, double t_max,
                       const std::function<void(std::uint32_t, std::uint32_t, double)>& visit) const {
  std::vector<std::uint32_t> stack{0};
  while (!stack.empty()) {
    const Node& node = nodes_[stack.back()];
    stack.pop_back();
    if (!ray_box(node.bounds, origin, direction, t_max)) continue;
    if (!node.is_leaf()) {
      stack.push_back(node.right);
      stack.push_back(node.left);
      continue;
    }
    for (auto i = node.first; i < node.first + node.count; ++i) {
      auto [a, b, c] = triangle(prims_[i]);
      if (auto t = intersect_triangle(origin, direction, a, b, c, tol::kSurfaceEps, t_max)) {
        visit(prims_[i].object, prims_[i].face, *t);
      }
    }
  }
}

bool Bvh::contains_point(const Vec3& p, std::uint32_t object) const {
  if (!closed_[object]) return false;
  int votes = 0;
  for (int axis = 0; axis < 3; ++axis) {
    std::vector<double> ts;
    for_each_hit(p, Vec3::Unit(axis), std::numeric_limits<double>::infinity(),
                 [&](std::uint32_t o, std::uint32_t, double t) {
                   if (o == object) ts.push_back(t);
                 });
    if (count_crossings(ts) % 2 == 1) ++votes;
  }
  return votes >= 2;
}

bool Bvh::contains_point(const Vec3& p) const {
  // One traversal per axis, bucketed by object.
  std::vector<int> votes(objects_.size(), 0);
  for (int axis = 0; axis < 3; ++axis) {
    std::vector<std::vector<double>> ts(objects_.size());
    for_each_hit(p, Vec3::Unit(axis), std::numeric_limits<double>::infinity(),
                 [&](std::uint32_t o, std::uint32_t, double t) {
                   if (closed_[o]) ts[o].push_back(t);
                 });
    for (std::size_t o = 0; o < ts.size(); ++o) {
      if (count_crossings(ts[o]) % 2 == 1) ++votes[o];
    }
  }
  return std::any_of(votes.begin(), votes.end(), [](int v) { return v >= 2; });
}

double Bvh::min_distance(const Vec3& p, double max_distance) const {
  double best_sq = max_distance == std::numeric_limits<double>::infinity()
                       ? std::numeric_limits<double>::infinity()
                       : max_distance * max_distance;
  bool found = false;
  std::vector<std::uint32_t> stack{0};
  while (!stack.empty()) {
    const Node& node = nodes_[stack.back()];
    stack.pop_back();
    if (node.bounds.distance_sq(p) > best_sq) continue;
    if (node.is_leaf()) {
      for (auto i = node.first; i < node.first + node.count; ++i) {
        auto [a, b, c] = triangle(prims_[i]);
        const double d = (closest_point_on_triangle(p, a, b, c) - p).squaredNorm();
        if (d <= best_sq) {
          best_sq = d;
          found = true;
        }
      }
      continue;
    }
    const double dl = nodes_[node.left].bounds.distance_sq(p);
    const double dr = nodes_[node.right].bounds.distance_sq(p);
    if (dl <= dr) {
      stack.push_back(node.right);
      stack.push_back(node.left);
    } else {
      stack.push_back(node.left);
      stack.push_back(node.right);
    }
  }
  return found ? std::sqrt(best_sq) : std::numeric_limits<double>::infinity();
}

bool Bvh::is_free_space(const Vec3& p, double clearance) const {
  if (contains_point(p)) return false;
  return !(min_distance(p, clearance) <= clearance);
}

}  // namespace scenesmith
