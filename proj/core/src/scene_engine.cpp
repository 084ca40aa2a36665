#include "scenesmith/scene_engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace scenesmith {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

const std::vector<std::string>& direction_names() {
  static const std::vector<std::string> kDirections = {
      "north (+y, behind)", "south (-y, in front)", "east (+x, right)", "west (-x, left)", "up (+z)", "down (-z)"};
  return kDirections;
}

double clean(double v) { return v == 0.0 ? 0.0 : v; }

nlohmann::json flat(const std::vector<Vec3>& vs) {
  auto out = nlohmann::json::array();
  for (const auto& v : vs) {
    out.push_back(v.x());
    out.push_back(v.y());
    out.push_back(v.z());
  }
  return out;
}

std::vector<Vec3> unflat(const nlohmann::json& j) {
  const auto vals = j.get<std::vector<double>>();
  if (vals.size() % 3 != 0) throw std::invalid_argument("vector list length is not a multiple of 3");
  std::vector<Vec3> out;
  for (std::size_t i = 0; i < vals.size(); i += 3) out.emplace_back(vals[i], vals[i + 1], vals[i + 2]);
  return out;
}

}  // namespace

Mat3 rotation_from_euler_deg(const Vec3& deg) {
  return (Eigen::AngleAxisd(deg.z() * kDeg, Vec3::UnitZ()) * Eigen::AngleAxisd(deg.y() * kDeg, Vec3::UnitY()) *
          Eigen::AngleAxisd(deg.x() * kDeg, Vec3::UnitX()))
      .toRotationMatrix();
}

Vec3 euler_deg_from_rotation(const Mat3& r) {
  const double y = std::asin(std::clamp(-r(2, 0), -1.0, 1.0));
  double x = 0, z = 0;
  if (std::abs(r(2, 0)) < 1.0 - 1e-12) {
    x = std::atan2(r(2, 1), r(2, 2));
    z = std::atan2(r(1, 0), r(0, 0));
  } else {
    // Gimbal lock: fold everything into z.
    z = std::atan2(-r(0, 1), r(1, 1));
  }
  Vec3 out(x / kDeg, y / kDeg, z / kDeg);
  for (int i = 0; i < 3; ++i) {
    if (std::abs(out[i]) < 1e-9) out[i] = 0.0;
  }
  return out;
}

Vec3 SceneObject::rotation_deg() const { return euler_deg_from_rotation(rotation); }

const ObjectSummary* SceneSnapshot::find(std::string_view name) const {
  for (const auto& o : objects) {
    if (o.name == name) return &o;
  }
  return nullptr;
}

std::set<std::string> SceneSnapshot::names() const {
  std::set<std::string> out;
  for (const auto& o : objects) out.insert(o.name);
  return out;
}

bool operator==(const SceneSnapshot& a, const SceneSnapshot& b) {
  const bool rooms = a.room.has_value() == b.room.has_value() &&
                     (!a.room || (a.room->size == b.room->size && a.room->wall_thickness == b.room->wall_thickness));
  return rooms && a.objects == b.objects && a.materials == b.materials && a.directions == b.directions &&
         a.version == b.version;
}

nlohmann::json to_json(const SceneSnapshot& s) {
  nlohmann::json j;
  j["version"] = s.version;
  if (s.room) {
    j["room"] = {{"size", vec_to_array(s.room->size)}, {"wall_thickness", s.room->wall_thickness}};
  } else {
    j["room"] = nullptr;
  }
  auto objs = nlohmann::json::array();
  for (const auto& o : s.objects) {
    objs.push_back({{"name", o.name},
                    {"object_type", o.object_type},
                    {"mesh_ref", o.mesh_ref},
                    {"location", vec_to_array(o.location)},
                    {"rotation_deg", vec_to_array(o.rotation_deg)},
                    {"size", vec_to_array(o.size)},
                    {"geometric_center", vec_to_array(o.geometric_center)},
                    {"aabb_min", vec_to_array(o.aabb_min)},
                    {"aabb_max", vec_to_array(o.aabb_max)},
                    {"material", o.material},
                    {"visible", o.visible},
                    {"room_element", o.room_element}});
  }
  j["objects"] = std::move(objs);
  j["materials"] = s.materials;
  j["directions"] = s.directions;
  return j;
}

nlohmann::json to_json(const ActionResult& r) {
  nlohmann::json j = {{"index", r.index},
                      {"source_index", r.source_index},
                      {"status", r.status},
                      {"created_names", r.created_names}};
  if (!r.error_code.empty()) j["error"] = {{"code", r.error_code}, {"message", r.message}};
  return j;
}

std::string generate_unique_name(const std::set<std::string>& taken, std::string_view object_type) {
  if (object_type.empty()) throw SceneError("InvalidName", "object_type must be non-empty");
  char suffix[8];
  for (int n = 1; n <= 999; ++n) {
    std::snprintf(suffix, sizeof suffix, ".%03d", n);
    std::string candidate = std::string(object_type) + suffix;
    if (!taken.count(candidate)) return candidate;
  }
  throw SceneError("Exhausted", "no free name suffix left for '" + std::string(object_type) + "'",
                   std::string(object_type));
}

std::array<RoomSlab, 6> room_slabs(const Vec3& size, double t) {
  const double hx = size.x() / 2, hy = size.y() / 2, h = size.z();
  return {{
      {"floor", "floor", "itu_floorboard", {{-hx - t, -hy - t, -t}, {hx + t, hy + t, 0}}},
      {"ceiling", "ceiling", "itu_concrete", {{-hx - t, -hy - t, h}, {hx + t, hy + t, h + t}}},
      {"wall_north", "wall", "itu_concrete", {{-hx - t, hy, 0}, {hx + t, hy + t, h}}},
      {"wall_south", "wall", "itu_concrete", {{-hx - t, -hy - t, 0}, {hx + t, -hy, h}}},
      {"wall_east", "wall", "itu_concrete", {{hx, -hy, 0}, {hx + t, hy, h}}},
      {"wall_west", "wall", "itu_concrete", {{-hx - t, -hy, 0}, {-hx, hy, h}}},
  }};
}

Scene::Scene(std::shared_ptr<const MaterialTable> materials)
    : materials_(materials ? std::move(materials) : std::make_shared<const MaterialTable>(MaterialTable::builtin())) {}

std::set<std::string> Scene::names() const {
  std::set<std::string> out;
  for (const auto& o : objects_) out.insert(o.name);
  return out;
}

std::string Scene::generate_unique_name(std::string_view object_type) const {
  return scenesmith::generate_unique_name(names(), object_type);
}

const SceneObject* Scene::find(std::string_view name) const {
  auto it = std::find_if(objects_.begin(), objects_.end(), [&](const SceneObject& o) { return o.name == name; });
  return it == objects_.end() ? nullptr : &*it;
}

SceneObject& Scene::require(std::string_view name) {
  auto it = std::find_if(objects_.begin(), objects_.end(), [&](const SceneObject& o) { return o.name == name; });
  if (it == objects_.end()) throw SceneError("UnknownObject", "no object named '" + std::string(name) + "'", std::string(name));
  return *it;
}

void Scene::set_visible(std::string_view name, bool visible) {
  SceneObject& o = require(name);
  if (o.visible != visible) {
    o.visible = visible;
    ++version_;
  }
}

void Scene::setup_room(const Vec3& size, double wall_thickness) {
  if (!all_finite(size) || (size.array() <= 0).any()) {
    throw SceneError("NonPositiveSize", "room size components must be positive");
  }
  if (!(wall_thickness > 0) || !std::isfinite(wall_thickness)) {
    throw SceneError("NonPositiveSize", "wall thickness must be positive");
  }
  std::erase_if(objects_, [](const SceneObject& o) { return o.room_element; });
  std::vector<SceneObject> created;
  for (const auto& s : room_slabs(size, wall_thickness)) {
    SceneObject o;
    o.name = std::string(s.name);
    o.object_type = std::string(s.object_type);
    o.mesh_ref = "primitive:room_slab";
    o.material = std::string(s.material);
    o.room_element = true;
    o.mesh = make_primitive(PrimitiveKind::kBox, s.bounds.size());
    o.mesh = transformed(o.mesh, Mat3::Identity(), s.bounds.center());
    o.refresh_bounds();
    o.location = o.bounds.base_center();
    created.push_back(std::move(o));
  }
  // Slabs lead the insertion order so exports list the shell first.
  objects_.insert(objects_.begin(), std::make_move_iterator(created.begin()), std::make_move_iterator(created.end()));
  room_ = Room{size, wall_thickness};
  ++version_;
}

void Scene::transform_object(SceneObject& obj, const Mat3& linear, const Vec3& pivot) {
  obj.mesh = transformed(obj.mesh, linear, pivot - linear * pivot);
  obj.location = linear * (obj.location - pivot) + pivot;
  obj.refresh_bounds();
}

void Scene::translate_object(SceneObject& obj, const Vec3& delta) {
  for (auto& v : obj.mesh.vertices) v += delta;
  obj.location += delta;
  obj.refresh_bounds();
}

std::vector<ActionResult> Scene::apply_actions(std::span<const ResolvedAction> actions, const AssetLibrary& library) {
  std::vector<ActionResult> results;
  bool failed = false;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    ActionResult r;
    r.index = i;
    r.source_index = actions[i].source_index;
    if (failed) {
      r.status = "skipped";
      results.push_back(std::move(r));
      continue;
    }
    try {
      apply_one(actions[i], library, r);
      r.status = "ok";
      ++version_;
    } catch (const Error& e) {
      r.status = "error";
      r.error_code = e.code();
      r.message = e.what();
      failed = true;
    }
    results.push_back(std::move(r));
  }
  return results;
}

void Scene::apply_one(const ResolvedAction& a, const AssetLibrary& library, ActionResult& result) {
  auto need = [&](const auto& field, const char* name) -> const auto& {
    if (!field) throw SceneError("MissingField", std::string("resolved action lacks '") + name + "'", name);
    return *field;
  };
  auto check_free = [&](const std::string& name) {
    if (name.empty()) throw SceneError("InvalidName", "empty object name");
    if (find(name)) throw SceneError("NameCollision", "name '" + name + "' is already in use", name);
  };

  switch (a.action_type) {
    case ActionType::kSetupRoom: {
      // setup_room bumps the version itself; apply_actions adds the per-action bump.
      setup_room(need(a.room_size, "room_size"));
      --version_;
      for (auto n : kRoomElementNames) result.created_names.emplace_back(n);
      return;
    }
    case ActionType::kCreateObjectAbsolute:
    case ActionType::kCreateObjectRelative:
    case ActionType::kCreateObjectFromLibrary: {
      check_free(a.new_name);
      const Vec3& extents = need(a.size, "size");
      const Vec3& base = need(a.position, "position");
      SceneObject o;
      o.name = a.new_name;
      o.object_type = a.object_type;
      o.mesh_ref = a.asset_id;
      o.material = normalize_material_name(a.material.value_or(library.default_material(a.asset_id, a.object_type)),
                                           *materials_);
      o.mesh = library.mesh_for(a.asset_id, a.object_type, extents);
      if (a.rotation_deg) {
        o.rotation = rotation_from_euler_deg(*a.rotation_deg);
        o.mesh = transformed(o.mesh, o.rotation, Vec3::Zero());
      }
      const Aabb box = mesh_bounds(o.mesh);
      o.mesh = transformed(o.mesh, Mat3::Identity(), base - box.base_center());
      o.refresh_bounds();
      o.location = base;
      result.created_names.push_back(o.name);
      objects_.push_back(std::move(o));
      return;
    }
    case ActionType::kMoveObjectAbsolute:
    case ActionType::kMoveObjectOffset:
    case ActionType::kMoveObjectRelative:
    case ActionType::kAlignObjects: {
      SceneObject& o = require(a.object_name);
      translate_object(o, need(a.position, "position") - o.location);
      return;
    }
    case ActionType::kRotateObject: {
      SceneObject& o = require(a.object_name);
      const Mat3 r = rotation_from_euler_deg(need(a.rotation_deg, "rotation_deg"));
      transform_object(o, r, o.geometric_center());
      o.rotation = r * o.rotation;
      return;
    }
    case ActionType::kResizeObject: {
      SceneObject& o = require(a.object_name);
      const Vec3& target = need(a.size, "size");
      const Vec3 current = o.size();
      Vec3 scale;
      for (int i = 0; i < 3; ++i) {
        if (!(target[i] > 0)) throw SceneError("NonPositiveScale", "resize extents must be positive", a.object_name);
        if (current[i] <= 0) throw SceneError("DegenerateExtent", "object is flat along an axis", a.object_name);
        scale[i] = target[i] / current[i];
      }
      transform_object(o, scale.asDiagonal(), o.geometric_center());
      return;
    }
    case ActionType::kScaleObject: {
      SceneObject& o = require(a.object_name);
      const double f = need(a.scale_factor, "scale_factor");
      if (!(f > 0) || !std::isfinite(f)) throw SceneError("NonPositiveScale", "scale factor must be positive", a.object_name);
      transform_object(o, Mat3::Identity() * f, o.geometric_center());
      return;
    }
    case ActionType::kDeleteObject: {
      require(a.object_name);
      std::erase_if(objects_, [&](const SceneObject& o) { return o.name == a.object_name; });
      return;
    }
    case ActionType::kChangeObjectMaterial: {
      SceneObject& o = require(a.object_name);
      o.material = normalize_material_name(need(a.material, "material"), *materials_);
      return;
    }
    case ActionType::kDuplicateObject: {
      SceneObject copy = require(a.object_name);
      check_free(a.new_name);
      copy.name = a.new_name;
      copy.room_element = false;
      if (a.position) translate_object(copy, *a.position - copy.location);
      result.created_names.push_back(copy.name);
      objects_.push_back(std::move(copy));
      return;
    }
    case ActionType::kRenameObject: {
      SceneObject& o = require(a.object_name);
      if (a.new_name != o.name) check_free(a.new_name);
      o.name = a.new_name;
      return;
    }
    case ActionType::kClearScene:
      objects_.clear();
      room_.reset();
      return;
  }
}

SceneSnapshot Scene::snapshot() const {
  SceneSnapshot s;
  s.room = room_;
  s.version = version_;
  s.materials = materials_->names();
  s.directions = direction_names();
  for (const auto& o : objects_) {
    ObjectSummary sum;
    sum.name = o.name;
    sum.object_type = o.object_type;
    sum.mesh_ref = o.mesh_ref;
    sum.location = o.location;
    sum.rotation_deg = o.rotation_deg();
    sum.size = o.size();
    sum.geometric_center = o.geometric_center();
    sum.aabb_min = o.bounds.min;
    sum.aabb_max = o.bounds.max;
    sum.material = o.material;
    sum.visible = o.visible;
    sum.room_element = o.room_element;
    s.objects.push_back(std::move(sum));
  }
  return s;
}

nlohmann::json Scene::save() const {
  nlohmann::json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["version"] = version_;
  if (room_) {
    doc["room"] = {{"size", vec_to_array(room_->size)}, {"wall_thickness", room_->wall_thickness}};
  } else {
    doc["room"] = nullptr;
  }
  auto objs = nlohmann::json::array();
  for (const auto& o : objects_) {
    auto faces = nlohmann::json::array();
    for (const auto& f : o.mesh.faces) {
      faces.push_back(f[0]);
      faces.push_back(f[1]);
      faces.push_back(f[2]);
    }
    auto rot = nlohmann::json::array();
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) rot.push_back(clean(o.rotation(r, c)));
    }
    objs.push_back({{"name", o.name},
                    {"object_type", o.object_type},
                    {"mesh_ref", o.mesh_ref},
                    {"material", o.material},
                    {"visible", o.visible},
                    {"room_element", o.room_element},
                    {"location", vec_to_array(o.location)},
                    {"rotation", rot},
                    {"mesh", {{"vertices", flat(o.mesh.vertices)}, {"normals", flat(o.mesh.normals)}, {"faces", faces}}}});
  }
  doc["objects"] = std::move(objs);
  return doc;
}

Scene Scene::load(const nlohmann::json& doc, std::shared_ptr<const MaterialTable> materials) {
  if (!doc.is_object() || !doc.contains("schema_version") || !doc["schema_version"].is_number_integer()) {
    throw SceneError("CorruptDocument", "scene document lacks schema_version");
  }
  if (doc["schema_version"].get<long long>() != kSchemaVersion) {
    throw SceneError("UnsupportedSchemaVersion", "unsupported scene schema version",
                     std::to_string(doc["schema_version"].get<long long>()));
  }
  Scene scene(std::move(materials));
  try {
    scene.version_ = doc.at("version").get<std::uint64_t>();
    const auto& room = doc.at("room");
    if (!room.is_null()) scene.room_ = Room{vec_from_array(room.at("size")), room.at("wall_thickness").get<double>()};
    std::set<std::string> seen;
    for (const auto& j : doc.at("objects")) {
      SceneObject o;
      o.name = j.at("name").get<std::string>();
      if (!seen.insert(o.name).second) throw SceneError("CorruptDocument", "duplicate object name", o.name);
      o.object_type = j.at("object_type").get<std::string>();
      o.mesh_ref = j.at("mesh_ref").get<std::string>();
      o.material = j.at("material").get<std::string>();
      o.visible = j.at("visible").get<bool>();
      o.room_element = j.value("room_element", false);
      o.location = vec_from_array(j.at("location"));
      const auto rot = j.at("rotation").get<std::vector<double>>();
      if (rot.size() != 9) throw SceneError("CorruptDocument", "rotation must have 9 entries", o.name);
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) o.rotation(r, c) = rot[static_cast<std::size_t>(r * 3 + c)];
      }
      const auto& mesh = j.at("mesh");
      o.mesh.vertices = unflat(mesh.at("vertices"));
      o.mesh.normals = unflat(mesh.at("normals"));
      const auto idx = mesh.at("faces").get<std::vector<std::uint32_t>>();
      if (idx.size() % 3 != 0) throw SceneError("CorruptDocument", "face list length is not a multiple of 3", o.name);
      for (std::size_t i = 0; i < idx.size(); i += 3) o.mesh.faces.push_back({idx[i], idx[i + 1], idx[i + 2]});
      validate_mesh(o.mesh);
      o.refresh_bounds();
      scene.objects_.push_back(std::move(o));
    }
  } catch (const SceneError&) {
    throw;
  } catch (const std::exception& e) {
    throw SceneError("CorruptDocument", std::string("malformed scene document: ") + e.what());
  }
  return scene;
}

}  // namespace scenesmith
