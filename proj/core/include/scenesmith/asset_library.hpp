#pragma once

#include "scenesmith/error.hpp"
#include "scenesmith/geometry.hpp"

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace scenesmith {

enum class PrimitiveKind { kBox, kCylinder, kSphere, kPlane, kWedge };

std::optional<PrimitiveKind> primitive_from_string(std::string_view s);
std::string_view to_string(PrimitiveKind k);

// Procedural mesh centered on the origin whose AABB spans `extents`.
// Cylinder and sphere need `segments` to be a multiple of 4 (>= 4) so the
// tessellation touches every AABB face. A plane lies in z = 0 and ignores
// extents.z. Throws LibraryError("NonPositiveExtents" | "InvalidSegments").
Mesh make_primitive(PrimitiveKind kind, const Vec3& extents, int segments = 24);

// Non-uniform scale of `mesh` so its AABB spans `extents`, centered on the
// origin. Degenerate axes stay flat.
Mesh fit_to_extents(const Mesh& mesh, const Vec3& extents);

// ASCII PLY (vertex x/y/z with optional normals, polygon faces) and OBJ
// (v/f, polygons fan-triangulated). Zero-area faces are dropped and normals
// recomputed when absent. Throws LibraryError("MeshImport").
Mesh parse_ply_ascii(std::string_view text);
Mesh parse_obj(std::string_view text);
Mesh read_mesh_file(const std::filesystem::path& path);

// Built-in furniture-scale defaults for primitive-backed object types.
struct CatalogEntry {
  PrimitiveKind kind;
  Vec3 extents;
  std::string material;
};
// Unknown object types fall back to a 0.5 m concrete box.
CatalogEntry catalog_lookup(std::string_view object_type);

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::size_t dim() const = 0;
  // L2-normalized embedding. Throws LibraryError("EmbedderUnavailable").
  virtual std::vector<float> embed(std::string_view text) const = 0;
};

// Offline embedder: hashed bag of lowercase alphanumeric tokens with a
// signed second hash, L2-normalized.
class HashingEmbedder final : public Embedder {
 public:
  explicit HashingEmbedder(std::size_t dim = 384) : dim_(dim) {}
  std::size_t dim() const override { return dim_; }
  std::vector<float> embed(std::string_view text) const override;

 private:
  std::size_t dim_;
};

std::vector<std::string> tokenize(std::string_view text);
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis = 14695981039346656037ULL);

struct Asset {
  std::string asset_id;
  std::string object_type;
  Mesh mesh;
  std::vector<std::string> descriptions;
  Vec3 default_extents = Vec3::Constant(0.5);
  std::string material = "itu_concrete";
};

struct SearchHit {
  std::string asset_id;
  double score = 0;
};

// Exact cosine index over every asset description.
class EmbeddingIndex {
 public:
  struct Entry {
    std::vector<float> vector;
    std::string asset_id;
    std::size_t ordinal = 0;
  };

  static EmbeddingIndex build(const std::vector<Asset>& assets, std::shared_ptr<const Embedder> embedder);

  // Per-asset score is the max over its descriptions; ties break on
  // asset_id. Throws LibraryError("EmptyIndex" | "EmbedderUnavailable").
  std::vector<SearchHit> search(std::string_view query, std::size_t k) const;
  std::vector<SearchHit> search_vector(const std::vector<float>& query, std::size_t k) const;

  std::size_t dim() const { return dim_; }
  const std::vector<Entry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

 private:
  std::shared_ptr<const Embedder> embedder_;
  std::size_t dim_ = 0;
  std::vector<Entry> entries_;
};

// Text prompt in, mesh out (e.g. a text-to-mesh service).
using MeshGenerator = std::function<Mesh(const std::string& prompt)>;

// Asset catalog: manifest assets, procedural primitives and an optional
// mesh generator. Asset ids are "<manifest id>", "primitive:<object_type>"
// or "generate:<object_type>".
class AssetLibrary {
 public:
  AssetLibrary() = default;
  AssetLibrary(std::vector<Asset> assets, std::shared_ptr<const Embedder> embedder);

  // Manifest: {"schema_version":1,"assets":[{asset_id, object_type, mesh,
  // descriptions, default_extents, material?}]}; `mesh` is a path relative
  // to the manifest or "primitive:<kind>". Throws LibraryError.
  static AssetLibrary load(const std::filesystem::path& manifest, std::shared_ptr<const Embedder> embedder);

  const Asset* find(std::string_view asset_id) const;
  const std::vector<Asset>& assets() const { return assets_; }
  const EmbeddingIndex& index() const { return index_; }
  std::vector<SearchHit> search(std::string_view query, std::size_t k) const { return index_.search(query, k); }

  void set_mesh_generator(MeshGenerator gen) { generator_ = std::move(gen); }

  Vec3 default_extents(std::string_view asset_id, std::string_view object_type) const;
  std::string default_material(std::string_view asset_id, std::string_view object_type) const;
  // Mesh for an asset id, fitted to `extents` and centered on the origin.
  // Generation failures fall back to the primitive catalog.
  Mesh mesh_for(std::string_view asset_id, std::string_view object_type, const Vec3& extents) const;

 private:
  std::vector<Asset> assets_;
  EmbeddingIndex index_;
  MeshGenerator generator_;
};

}  // namespace scenesmith
