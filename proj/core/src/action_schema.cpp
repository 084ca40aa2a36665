#include "scenesmith/action_schema.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <unordered_map>

namespace scenesmith {

namespace {

constexpr std::array<std::string_view, 16> kActionTypeNames = {
    "setup_room",         "create_object_absolute", "create_object_relative", "create_object_from_library",
    "move_object_absolute", "move_object_offset",   "move_object_relative",   "rotate_object",
    "resize_object",      "scale_object",           "delete_object",          "change_object_material",
    "duplicate_object",   "rename_object",          "align_objects",          "clear_scene",
};

constexpr std::array<std::string_view, 13> kRelationNames = {
    "on_top_of",      "under",     "left_of",            "right_of",           "in_front_of",
    "behind",         "next_to",   "inside",             "center_of_room",     "against_wall_north",
    "against_wall_south", "against_wall_east", "against_wall_west",
};

constexpr std::array<std::string_view, 3> kAxisNames = {"x", "y", "z"};
constexpr std::array<std::string_view, 3> kSourceNames = {"primitive", "library", "generate"};

template <typename Enum, std::size_t N>
std::optional<Enum> lookup(const std::array<std::string_view, N>& names, std::string_view s) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == s) return static_cast<Enum>(i);
  }
  return std::nullopt;
}

// Field bits for the per-type matrix.
enum Field : unsigned {
  kObjectType = 1u << 0,
  kQuantity = 1u << 1,
  kLocalId = 1u << 2,
  kObjectName = 1u << 3,
  kRelation = 1u << 4,
  kReferenceName = 1u << 5,
  kPosition = 1u << 6,
  kOffset = 1u << 7,
  kRotation = 1u << 8,
  kSize = 1u << 9,
  kScaleFactor = 1u << 10,
  kMaterial = 1u << 11,
  kRoomSize = 1u << 12,
  kNewName = 1u << 13,
  kAxis = 1u << 14,
  kSource = 1u << 15,
};

const std::map<std::string, Field, std::less<>>& field_by_name() {
  static const std::map<std::string, Field, std::less<>> m = {
      {"object_type", kObjectType}, {"quantity", kQuantity},         {"local_id", kLocalId},
      {"object_name", kObjectName}, {"relation", kRelation},         {"reference_name", kReferenceName},
      {"position", kPosition},      {"offset", kOffset},             {"rotation_deg", kRotation},
      {"size", kSize},              {"scale_factor", kScaleFactor}, {"material", kMaterial},
      {"room_size", kRoomSize},     {"new_name", kNewName},         {"axis", kAxis},
      {"source", kSource},
  };
  return m;
}

struct FieldRule {
  unsigned required;
  unsigned optional;
};

FieldRule rule_for(ActionType t) {
  constexpr unsigned kCreate = kObjectType | kQuantity | kLocalId;
  constexpr unsigned kLook = kRotation | kSize | kMaterial;
  switch (t) {
    case ActionType::kSetupRoom: return {kRoomSize, 0};
    case ActionType::kCreateObjectAbsolute: return {kCreate, kPosition | kLook | kSource};
    case ActionType::kCreateObjectRelative: return {kCreate | kRelation, kReferenceName | kLook | kSource};
    case ActionType::kCreateObjectFromLibrary: return {kCreate, kPosition | kRelation | kReferenceName | kLook};
    case ActionType::kMoveObjectAbsolute: return {kObjectName | kPosition, 0};
    case ActionType::kMoveObjectOffset: return {kObjectName | kOffset, 0};
    case ActionType::kMoveObjectRelative: return {kObjectName | kRelation, kReferenceName};
    case ActionType::kRotateObject: return {kObjectName | kRotation, 0};
    case ActionType::kResizeObject: return {kObjectName | kSize, 0};
    case ActionType::kScaleObject: return {kObjectName | kScaleFactor, 0};
    case ActionType::kDeleteObject: return {kObjectName, 0};
    case ActionType::kChangeObjectMaterial: return {kObjectName | kMaterial, 0};
    case ActionType::kDuplicateObject: return {kObjectName, kOffset | kNewName};
    case ActionType::kRenameObject: return {kObjectName | kNewName, 0};
    case ActionType::kAlignObjects: return {kObjectName | kReferenceName | kAxis, 0};
    case ActionType::kClearScene: return {0, 0};
  }
  return {0, 0};
}

constexpr unsigned long long kMaxQuantity = 1000000ULL;

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c) != 0; });
}

[[noreturn]] void fail(std::string code, std::size_t index, const std::string& what, std::string detail) {
  throw SchemaError(std::move(code), "action[" + std::to_string(index) + "]: " + what, std::move(detail));
}

std::string get_string(const nlohmann::json& j, std::string_view key, std::size_t index) {
  if (!j.is_string()) fail("WrongType", index, "field '" + std::string(key) + "' must be a string", std::string(key));
  auto s = j.get<std::string>();
  if (s.empty()) fail("WrongType", index, "field '" + std::string(key) + "' must be non-empty", std::string(key));
  return s;
}

Vec3 get_vec(const nlohmann::json& j, std::string_view key, std::size_t index) {
  const std::string k(key);
  if (!j.is_object() || j.size() != 3) fail("WrongType", index, "field '" + k + "' must be {x,y,z}", k);
  Vec3 v;
  const char* axes[] = {"x", "y", "z"};
  for (int i = 0; i < 3; ++i) {
    auto it = j.find(axes[i]);
    if (it == j.end() || !it->is_number()) fail("WrongType", index, "field '" + k + "' must be {x,y,z}", k);
    v[i] = it->get<double>();
  }
  if (!all_finite(v)) fail("WrongType", index, "field '" + k + "' must be finite", k);
  return v;
}

void check_name(const std::string& name, std::string_view key, std::size_t index, bool lenient) {
  if (name.front() != '#') return;
  auto id = std::string_view(name).substr(1);
  if (lenient ? id.empty() : !all_digits(id)) {
    fail("WrongType", index, "field '" + std::string(key) + "' has malformed local reference", std::string(key));
  }
}

Action parse_one(const nlohmann::json& obj, std::size_t index, ParseOptions opts) {
  if (!obj.is_object()) fail("WrongType", index, "element must be an object", "action");
  auto at = obj.find("action_type");
  if (at == obj.end()) fail("MissingField", index, "missing field 'action_type'", "action_type");
  if (!at->is_string()) fail("WrongType", index, "field 'action_type' must be a string", "action_type");
  auto type = action_type_from_string(at->get_ref<const std::string&>());
  if (!type) fail("UnknownActionType", index, "unknown action_type '" + at->get<std::string>() + "'", at->get<std::string>());

  Action a;
  a.action_type = *type;
  const FieldRule rule = rule_for(*type);
  unsigned present = 0;
  for (const auto& [key, value] : obj.items()) {
    if (key == "action_type") continue;
    auto f = field_by_name().find(key);
    if (f == field_by_name().end() || ((rule.required | rule.optional) & f->second) == 0) {
      fail("UnexpectedField", index, "field '" + key + "' is not allowed for " + std::string(to_string(*type)), key);
    }
    present |= f->second;
    switch (f->second) {
      case kObjectType: a.object_type = get_string(value, key, index); break;
      case kQuantity:
        if (!value.is_number_integer()) fail("WrongType", index, "field 'quantity' must be an integer", key);
        {
          const bool in_range = value.is_number_unsigned()
                                    ? value.get<unsigned long long>() - 1 < kMaxQuantity
                                    : value.get<long long>() >= 1 &&
                                          static_cast<unsigned long long>(value.get<long long>()) <= kMaxQuantity;
          if (!in_range) fail("WrongType", index, "field 'quantity' must be a positive integer", key);
          a.quantity = value.get<long long>();
        }
        break;
      case kLocalId:
        if (!value.is_string()) fail("WrongType", index, "field 'local_id' must be a string", key);
        a.local_id = value.get<std::string>();
        if (!opts.lenient_local_ids && !all_digits(*a.local_id)) {
          fail("WrongType", index, "field 'local_id' must be decimal digits", key);
        }
        break;
      case kObjectName:
        a.object_name = get_string(value, key, index);
        check_name(*a.object_name, key, index, opts.lenient_local_ids);
        break;
      case kRelation: {
        if (!value.is_string()) fail("WrongType", index, "field 'relation' must be a string", key);
        a.relation = relation_from_string(value.get_ref<const std::string&>());
        if (!a.relation) fail("WrongType", index, "unknown relation '" + value.get<std::string>() + "'", key);
        break;
      }
      case kReferenceName:
        a.reference_name = get_string(value, key, index);
        check_name(*a.reference_name, key, index, opts.lenient_local_ids);
        break;
      case kPosition: a.position = get_vec(value, key, index); break;
      case kOffset: a.offset = get_vec(value, key, index); break;
      case kRotation: a.rotation_deg = get_vec(value, key, index); break;
      case kSize: a.size = get_vec(value, key, index); break;
      case kRoomSize: a.room_size = get_vec(value, key, index); break;
      case kScaleFactor: {
        if (!value.is_number()) fail("WrongType", index, "field 'scale_factor' must be a number", key);
        double f = value.get<double>();
        if (!std::isfinite(f) || f <= 0) fail("WrongType", index, "field 'scale_factor' must be positive", key);
        a.scale_factor = f;
        break;
      }
      case kMaterial: a.material = get_string(value, key, index); break;
      case kNewName: a.new_name = get_string(value, key, index); break;
      case kAxis:
        if (!value.is_string() || !(a.axis = axis_from_string(value.get_ref<const std::string&>()))) {
          fail("WrongType", index, "field 'axis' must be one of x, y, z", key);
        }
        break;
      case kSource:
        if (!value.is_string() || !(a.source = source_from_string(value.get_ref<const std::string&>()))) {
          fail("WrongType", index, "field 'source' must be primitive, library or generate", key);
        }
        break;
    }
  }

  unsigned required = rule.required;
  if (opts.lenient_local_ids) required &= ~static_cast<unsigned>(kLocalId);
  if (unsigned missing = required & ~present) {
    for (const auto& [name, bit] : field_by_name()) {
      if (missing & bit) fail("MissingField", index, "missing field '" + name + "'", name);
    }
  }
  if (a.relation) {
    const bool needs = relation_needs_reference(*a.relation);
    if (needs && !a.reference_name) fail("MissingField", index, "relation requires 'reference_name'", "reference_name");
    if (!needs && a.reference_name) {
      fail("UnexpectedField", index, "room relations take no 'reference_name'", "reference_name");
    }
  }
  if (a.position && a.relation) fail("ConflictingFields", index, "'position' and 'relation' are exclusive", "position");
  return a;
}

}  // namespace

std::string_view to_string(ActionType t) { return kActionTypeNames[static_cast<std::size_t>(t)]; }
std::string_view to_string(SpatialRelation r) { return kRelationNames[static_cast<std::size_t>(r)]; }
std::string_view to_string(Axis a) { return kAxisNames[static_cast<std::size_t>(a)]; }
std::string_view to_string(AssetSource s) { return kSourceNames[static_cast<std::size_t>(s)]; }

std::optional<ActionType> action_type_from_string(std::string_view s) { return lookup<ActionType>(kActionTypeNames, s); }
std::optional<SpatialRelation> relation_from_string(std::string_view s) {
  return lookup<SpatialRelation>(kRelationNames, s);
}
std::optional<Axis> axis_from_string(std::string_view s) { return lookup<Axis>(kAxisNames, s); }
std::optional<AssetSource> source_from_string(std::string_view s) { return lookup<AssetSource>(kSourceNames, s); }

bool relation_needs_reference(SpatialRelation r) {
  switch (r) {
    case SpatialRelation::kCenterOfRoom:
    case SpatialRelation::kAgainstWallNorth:
    case SpatialRelation::kAgainstWallSouth:
    case SpatialRelation::kAgainstWallEast:
    case SpatialRelation::kAgainstWallWest:
      return false;
    default:
      return true;
  }
}

bool is_creation(ActionType t) {
  return t == ActionType::kCreateObjectAbsolute || t == ActionType::kCreateObjectRelative ||
         t == ActionType::kCreateObjectFromLibrary;
}

bool operator==(const Action& a, const Action& b) {
  auto veq = [](const std::optional<Vec3>& x, const std::optional<Vec3>& y) {
    return x.has_value() == y.has_value() && (!x || *x == *y);
  };
  return a.action_type == b.action_type && a.object_type == b.object_type && a.quantity == b.quantity &&
         a.local_id == b.local_id && a.object_name == b.object_name && a.relation == b.relation &&
         a.reference_name == b.reference_name && veq(a.position, b.position) && veq(a.offset, b.offset) &&
         veq(a.rotation_deg, b.rotation_deg) && veq(a.size, b.size) && a.scale_factor == b.scale_factor &&
         a.material == b.material && veq(a.room_size, b.room_size) && a.new_name == b.new_name &&
         a.axis == b.axis && a.source == b.source;
}

std::optional<std::string> local_ref(std::string_view name) {
  if (name.empty() || name.front() != '#') return std::nullopt;
  return std::string(name.substr(1));
}

ActionList parse_actions_structural(const nlohmann::json& doc, ParseOptions opts) {
  if (!doc.is_array()) throw SchemaError("NotAnArray", "top-level JSON value must be an array");
  ActionList out;
  out.reserve(doc.size());
  for (std::size_t i = 0; i < doc.size(); ++i) out.push_back(parse_one(doc[i], i, opts));
  return out;
}

void check_local_id_sequence(const ActionList& actions) {
  std::set<std::string> declared;
  long long next = 1;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    const Action& a = actions[i];
    for (const auto* name : {&a.object_name, &a.reference_name}) {
      if (!*name) continue;
      if (auto id = local_ref(**name); id && !declared.count(*id)) {
        throw SchemaError("DanglingReference", "action[" + std::to_string(i) + "]: '#" + *id + "' is not declared earlier",
                          *id);
      }
    }
    if (is_creation(a.action_type)) {
      const std::string expected = std::to_string(next++);
      if (a.local_id != expected) {
        throw SchemaError("BadLocalIdSequence",
                          "action[" + std::to_string(i) + "]: expected local_id \"" + expected + "\"",
                          a.local_id.value_or(""));
      }
      declared.insert(expected);
    }
  }
}

ActionList parse_action_list(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text.begin(), json_text.end());
  } catch (const nlohmann::json::out_of_range& e) {
    // 406: a well-formed number that overflows a double (e.g. 1e999).
    throw SchemaError("WrongType", "number is not finite", e.what());
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError("JsonSyntax", "input is not valid JSON", e.what());
  }
  ActionList actions = parse_actions_structural(doc);
  check_local_id_sequence(actions);
  return actions;
}

void validate_reference_closure(const ActionList& actions, const std::set<std::string>& scene_names) {
  std::set<std::string> declared;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    const Action& a = actions[i];
    for (const auto* name : {&a.object_name, &a.reference_name}) {
      if (!*name) continue;
      if (auto id = local_ref(**name)) {
        if (!declared.count(*id)) {
          throw ValidationError("DanglingReference", "action[" + std::to_string(i) + "]: '#" + *id + "' is not declared",
                                *id);
        }
      } else if (!scene_names.count(**name)) {
        throw ValidationError("UnknownSceneObject",
                              "action[" + std::to_string(i) + "]: no scene object named '" + **name + "'", **name);
      }
    }
    if (is_creation(a.action_type) && a.local_id) declared.insert(*a.local_id);
  }
}

Resequenced resequence_local_ids(ActionList actions) {
  // (position in list, old id) for every creation.
  std::vector<std::pair<std::size_t, std::string>> creations;
  std::vector<std::string> new_ids(actions.size());
  long long next = 1;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (!is_creation(actions[i].action_type)) continue;
    creations.emplace_back(i, actions[i].local_id.value_or(""));
    new_ids[i] = std::to_string(next++);
  }

  auto map_ref = [&](std::size_t at, const std::string& old_id) -> std::string {
    std::optional<std::size_t> chosen;
    for (const auto& [pos, id] : creations) {
      if (id != old_id) continue;
      if (pos < at) {
        chosen = pos;  // latest earlier declaration wins
      } else if (!chosen) {
        chosen = pos;
        break;
      }
    }
    if (!chosen) throw ValidationError("UnmappableReference", "'#" + old_id + "' names no creation action", old_id);
    return new_ids[*chosen];
  };

  // Map every reference against the original ids before rewriting anything.
  std::vector<std::pair<std::optional<std::string>, std::optional<std::string>>> refs(actions.size());
  for (std::size_t i = 0; i < actions.size(); ++i) {
    const Action& a = actions[i];
    if (a.object_name) {
      if (auto id = local_ref(*a.object_name)) refs[i].first = "#" + map_ref(i, *id);
    }
    if (a.reference_name) {
      if (auto id = local_ref(*a.reference_name)) refs[i].second = "#" + map_ref(i, *id);
    }
  }

  bool changed = false;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    Action& a = actions[i];
    if (is_creation(a.action_type) && a.local_id != new_ids[i]) {
      a.local_id = new_ids[i];
      changed = true;
    }
    if (refs[i].first && a.object_name != refs[i].first) {
      a.object_name = refs[i].first;
      changed = true;
    }
    if (refs[i].second && a.reference_name != refs[i].second) {
      a.reference_name = refs[i].second;
      changed = true;
    }
  }
  return {std::move(actions), changed};
}

namespace {

double clean(double v) { return v == 0.0 ? 0.0 : v; }  // folds -0.0

nlohmann::json vec_json(const Vec3& v) { return {{"x", clean(v.x())}, {"y", clean(v.y())}, {"z", clean(v.z())}}; }

}  // namespace

nlohmann::json to_json(const Action& a) {
  nlohmann::json j;
  j["action_type"] = std::string(to_string(a.action_type));
  if (a.object_type) j["object_type"] = *a.object_type;
  if (a.quantity) j["quantity"] = *a.quantity;
  if (a.local_id) j["local_id"] = *a.local_id;
  if (a.object_name) j["object_name"] = *a.object_name;
  if (a.relation) j["relation"] = std::string(to_string(*a.relation));
  if (a.reference_name) j["reference_name"] = *a.reference_name;
  if (a.position) j["position"] = vec_json(*a.position);
  if (a.offset) j["offset"] = vec_json(*a.offset);
  if (a.rotation_deg) j["rotation_deg"] = vec_json(*a.rotation_deg);
  if (a.size) j["size"] = vec_json(*a.size);
  if (a.scale_factor) j["scale_factor"] = clean(*a.scale_factor);
  if (a.material) j["material"] = *a.material;
  if (a.room_size) j["room_size"] = vec_json(*a.room_size);
  if (a.new_name) j["new_name"] = *a.new_name;
  if (a.axis) j["axis"] = std::string(to_string(*a.axis));
  if (a.source) j["source"] = std::string(to_string(*a.source));
  return j;
}

nlohmann::json to_json(const ActionList& actions) {
  auto arr = nlohmann::json::array();
  for (const auto& a : actions) arr.push_back(to_json(a));
  return arr;
}

std::string serialize(const ActionList& actions, int indent) { return to_json(actions).dump(indent); }

std::string canonicalize(const ActionList& actions) {
  // nlohmann objects are key-sorted and doubles dump as shortest round-trip.
  return to_json(actions).dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

Vec3 vec_from_array(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3 || !j[0].is_number() || !j[1].is_number() || !j[2].is_number()) {
    throw std::invalid_argument("expected [x, y, z]");
  }
  Vec3 v(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
  if (!all_finite(v)) throw std::invalid_argument("non-finite vector component");
  return v;
}

}  // namespace scenesmith
