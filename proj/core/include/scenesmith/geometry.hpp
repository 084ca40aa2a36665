#pragma once

#include "scenesmith/error.hpp"
#include "scenesmith/vec.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace scenesmith {

using Face = std::array<std::uint32_t, 3>;

// Indexed triangle mesh with per-vertex unit normals.
struct Mesh {
  std::vector<Vec3> vertices;
  std::vector<Vec3> normals;
  std::vector<Face> faces;

  bool empty() const { return faces.empty(); }
};

// Throws GeometryError("InvalidMesh") on out-of-range indices, missing or
// non-unit normals, non-finite coordinates or zero-area faces.
void validate_mesh(const Mesh& mesh);

Aabb mesh_bounds(const Mesh& mesh);
// Signed volume by the divergence theorem; positive for outward winding.
double mesh_volume(const Mesh& mesh);
// Every undirected edge is shared by exactly two faces.
bool is_closed(const Mesh& mesh);
// Area-weighted vertex normals from face winding.
void recompute_normals(Mesh& mesh);
// v' = linear * v + translation. Normals follow the inverse transpose.
Mesh transformed(const Mesh& mesh, const Mat3& linear, const Vec3& translation);
Vec3 face_normal(const Mesh& mesh, std::size_t face);

// Moller-Trumbore with inclusive edges; returns t in (t_min, t_max].
std::optional<double> intersect_triangle(const Vec3& origin, const Vec3& dir, const Vec3& a, const Vec3& b,
                                         const Vec3& c, double t_min, double t_max);

Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

struct RayHit {
  double t = 0;
  Vec3 point = Vec3::Zero();
  Vec3 face_normal = Vec3::Zero();
  std::string object_name;
  std::uint32_t object_index = 0;
  std::uint32_t face_index = 0;
};

struct BvhInput {
  std::string name;
  Mesh mesh;  // world coordinates
};

// Binary AABB tree over every triangle of a set of named meshes. Immutable
// after build; all queries are const and safe to run concurrently.
class Bvh {
 public:
  static constexpr std::uint32_t kLeafSize = 4;

  struct Node {
    Aabb bounds;
    std::uint32_t left = 0;   // interior: child indices
    std::uint32_t right = 0;
    std::uint32_t first = 0;  // leaf: range into primitive order
    std::uint32_t count = 0;  // 0 for interior nodes
    bool is_leaf() const { return count > 0; }
  };

  struct Primitive {
    std::uint32_t object;
    std::uint32_t face;
  };

  // Median split on the longest axis of each node. Throws
  // GeometryError("EmptyScene") when there is no triangle.
  static Bvh build(std::vector<BvhInput> objects);

  std::optional<RayHit> ray_cast(const Vec3& origin, const Vec3& direction,
                                 double t_max = std::numeric_limits<double>::infinity()) const;

  // Calls visit(object, face, t) for every triangle crossing in (eps, t_max].
  void for_each_hit(const Vec3& origin, const Vec3& direction, double t_max,
                    const std::function<void(std::uint32_t, std::uint32_t, double)>& visit) const;

  // Majority vote of +x/+y/+z crossing parity, per closed mesh.
  bool contains_point(const Vec3& p) const;
  bool contains_point(const Vec3& p, std::uint32_t object) const;

  // Distance to the nearest triangle; infinity if none within max_distance.
  double min_distance(const Vec3& p, double max_distance = std::numeric_limits<double>::infinity()) const;

  // Not inside any closed mesh and no triangle within `clearance`.
  bool is_free_space(const Vec3& p, double clearance) const;

  std::span<const Node> nodes() const { return nodes_; }
  std::span<const Primitive> primitives() const { return prims_; }
  std::span<const BvhInput> objects() const { return objects_; }
  bool object_closed(std::uint32_t object) const { return closed_[object]; }

 private:
  std::array<Vec3, 3> triangle(const Primitive& p) const;
  std::uint32_t build_node(std::uint32_t begin, std::uint32_t end, std::vector<Vec3>& centroids);

  std::vector<BvhInput> objects_;
  std::vector<bool> closed_;
  std::vector<Node> nodes_;
  std::vector<Primitive> prims_;
};

}  // namespace scenesmith
