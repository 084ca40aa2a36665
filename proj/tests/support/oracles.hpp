#pragma once

// Brute-force and independently derived reference implementations used to
// check the library. None of these call into the code under test except for
// plain data types.

#include "scenesmith/geometry.hpp"
#include "scenesmith/scene_engine.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace oracle {

using scenesmith::Aabb;
using scenesmith::Mesh;
using scenesmith::Vec3;

// Ray/triangle by plane intersection plus same-side edge tests. t in (t_min, t_max].
std::optional<double> ray_triangle(const Vec3& o, const Vec3& d, const Vec3& a, const Vec3& b, const Vec3& c,
                                   double t_min, double t_max);

struct Hit {
  double t;
  std::size_t object;
  std::size_t face;
};

// Nearest hit over every triangle of every mesh.
std::optional<Hit> nearest_hit(const std::vector<Mesh>& meshes, const Vec3& o, const Vec3& d, double t_min = 1e-7);

// Generalized winding number of a closed triangle mesh at p (solid angles).
double winding_number(const Mesh& mesh, const Vec3& p);

// Exact point-triangle distance: plane projection when inside, else the
// nearest of the three edge segments.
double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);
double point_mesh_distance(const Mesh& mesh, const Vec3& p);

// Distance from p to the mesh surface of all meshes, brute force.
double min_distance(const std::vector<Mesh>& meshes, const Vec3& p);

struct PlyData {
  std::vector<std::array<double, 6>> vertices;  // x y z nx ny nz
  std::vector<std::vector<std::uint32_t>> faces;
  std::vector<std::string> header;
};

// Strict ASCII PLY reader written for the exporter tests. Throws std::runtime_error.
PlyData read_ply(const std::string& text);
Aabb ply_bounds(const PlyData& ply);

// Longest substring that starts with '[', ends with ']' and is valid JSON,
// earliest on ties; nullopt when there is none. Quadratic over all substrings.
std::optional<std::string> longest_json_array(const std::string& text);

// FNV-1a 64 written out independently for byte-stability manifests.
std::uint64_t fnv1a(const std::string& bytes);

// Facts read from an exported scene.xml with Boost.PropertyTree. Throws on
// malformed XML.
struct XmlFacts {
  std::string root;
  std::string version;
  std::vector<std::string> bsdf_ids;  // top-level, in document order
  std::vector<std::string> ids;       // every id attribute
  std::vector<std::string> refs;      // every <ref id=...>
  std::vector<std::pair<std::string, std::string>> shapes;  // (name, filename)
};
XmlFacts parse_scene_xml(const std::string& text);

std::string read_file(const std::filesystem::path& p);

// Unique scratch directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// Random closed convex-ish meshes for the geometry oracles.
Mesh random_box(std::mt19937_64& rng, double spread);

}  // namespace oracle
