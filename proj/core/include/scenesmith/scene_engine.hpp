#pragma once

#include "scenesmith/asset_library.hpp"
#include "scenesmith/geometry.hpp"
#include "scenesmith/materials.hpp"
#include "scenesmith/resolved_action.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace scenesmith {

// Coordinate frame: right-handed, z up, meters. The room interior spans
// x in [-sx/2, sx/2], y in [-sy/2, sy/2], z in [0, sz]; +y is north and +x
// is east.
struct Room {
  Vec3 size = Vec3::Zero();
  double wall_thickness = 0.1;
};

inline constexpr std::array<std::string_view, 6> kRoomElementNames = {
    "floor", "ceiling", "wall_north", "wall_south", "wall_east", "wall_west"};

struct RoomSlab {
  std::string_view name;
  std::string_view object_type;
  std::string_view material;
  Aabb bounds;
};

// North/south walls cover the corners; east/west walls fit between them.
std::array<RoomSlab, 6> room_slabs(const Vec3& size, double wall_thickness);
// Interior volume between the inner slab faces.
inline Aabb room_interior(const Room& room) {
  return {Vec3(-room.size.x() / 2, -room.size.y() / 2, 0), Vec3(room.size.x() / 2, room.size.y() / 2, room.size.z())};
}

struct SceneObject {
  std::string name;
  std::string object_type;
  std::string mesh_ref;
  std::string material;
  bool visible = true;
  bool room_element = false;
  Mesh mesh;                         // world coordinates, transforms baked in
  Vec3 location = Vec3::Zero();      // origin; the AABB bottom-center at creation
  Mat3 rotation = Mat3::Identity();  // accumulated rotate_object turns
  Aabb bounds;                       // derived from mesh

  void refresh_bounds() { bounds = mesh_bounds(mesh); }
  Vec3 size() const { return bounds.size(); }
  Vec3 geometric_center() const { return bounds.center(); }
  // Euler XYZ in degrees, R = Rz * Ry * Rx.
  Vec3 rotation_deg() const;
};

Mat3 rotation_from_euler_deg(const Vec3& deg);
Vec3 euler_deg_from_rotation(const Mat3& r);

struct ObjectSummary {
  std::string name;
  std::string object_type;
  std::string mesh_ref;
  Vec3 location = Vec3::Zero();
  Vec3 rotation_deg = Vec3::Zero();
  Vec3 size = Vec3::Zero();
  Vec3 geometric_center = Vec3::Zero();
  Vec3 aabb_min = Vec3::Zero();
  Vec3 aabb_max = Vec3::Zero();
  std::string material;
  bool visible = true;
  bool room_element = false;

  Aabb bounds() const { return {aabb_min, aabb_max}; }
  bool operator==(const ObjectSummary&) const = default;
};

// Immutable value copy of a scene, detached from later mutations.
struct SceneSnapshot {
  std::optional<Room> room;
  std::vector<ObjectSummary> objects;
  std::vector<std::string> materials;
  std::vector<std::string> directions;
  std::uint64_t version = 0;

  const ObjectSummary* find(std::string_view name) const;
  std::set<std::string> names() const;
};

bool operator==(const SceneSnapshot& a, const SceneSnapshot& b);
nlohmann::json to_json(const SceneSnapshot& s);

struct ActionResult {
  std::size_t index = 0;         // position in the resolved list
  std::size_t source_index = 0;  // originating Action
  std::string status;            // "ok", "error" or "skipped"
  std::vector<std::string> created_names;
  std::string error_code;
  std::string message;
};

nlohmann::json to_json(const ActionResult& r);

// "<type>.NNN" with the smallest free NNN in 001..999. Throws
// SceneError("Exhausted").
std::string generate_unique_name(const std::set<std::string>& taken, std::string_view object_type);

class Scene {
 public:
  static constexpr int kSchemaVersion = 1;

  explicit Scene(std::shared_ptr<const MaterialTable> materials = nullptr);

  // Replaces the six room slabs. Throws SceneError("NonPositiveSize").
  void setup_room(const Vec3& size, double wall_thickness = 0.1);

  // Applies actions in order and stops at the first failure; earlier
  // mutations are kept. Later entries are reported as "skipped".
  std::vector<ActionResult> apply_actions(std::span<const ResolvedAction> actions, const AssetLibrary& library);

  std::string generate_unique_name(std::string_view object_type) const;
  SceneSnapshot snapshot() const;

  const SceneObject* find(std::string_view name) const;
  const std::vector<SceneObject>& objects() const { return objects_; }
  const std::optional<Room>& room() const { return room_; }
  std::uint64_t version() const { return version_; }
  const MaterialTable& materials() const { return *materials_; }
  std::shared_ptr<const MaterialTable> material_table() const { return materials_; }
  std::set<std::string> names() const;

  // Throws SceneError("UnknownObject") when absent.
  void set_visible(std::string_view name, bool visible);

  nlohmann::json save() const;
  // Throws SceneError("UnsupportedSchemaVersion" | "CorruptDocument").
  static Scene load(const nlohmann::json& doc, std::shared_ptr<const MaterialTable> materials = nullptr);

 private:
  SceneObject& require(std::string_view name);
  void apply_one(const ResolvedAction& a, const AssetLibrary& library, ActionResult& result);
  void transform_object(SceneObject& obj, const Mat3& linear, const Vec3& pivot);
  void translate_object(SceneObject& obj, const Vec3& delta);

  std::shared_ptr<const MaterialTable> materials_;
  std::optional<Room> room_;
  std::vector<SceneObject> objects_;  // insertion order
  std::uint64_t version_ = 0;
};

// Single-writer wrapper: mutations are serialized; readers get the latest
// published snapshot without waiting on a mutation in progress.
class SceneStore {
 public:
  explicit SceneStore(Scene scene) : scene_(std::move(scene)) { publish(); }

  std::shared_ptr<const SceneSnapshot> snapshot() const {
    std::lock_guard lock(snapshot_mu_);
    return snapshot_;
  }

  template <typename Fn>
  auto mutate(Fn&& fn) {
    std::lock_guard lock(write_mu_);
    struct Publisher {
      SceneStore* self;
      ~Publisher() { self->publish(); }
    } publisher{this};
    return fn(scene_);
  }

  // Read access to full scene data (meshes); waits for in-flight mutations.
  template <typename Fn>
  auto read(Fn&& fn) const {
    std::lock_guard lock(write_mu_);
    return fn(static_cast<const Scene&>(scene_));
  }

 private:
  void publish() {
    auto snap = std::make_shared<const SceneSnapshot>(scene_.snapshot());
    std::lock_guard lock(snapshot_mu_);
    snapshot_ = std::move(snap);
  }

  Scene scene_;
  mutable std::mutex write_mu_;
  mutable std::mutex snapshot_mu_;
  std::shared_ptr<const SceneSnapshot> snapshot_;
};

}  // namespace scenesmith
