#pragma once

#include "scenesmith/error.hpp"
#include "scenesmith/vec.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace scenesmith {

enum class ActionType {
  kSetupRoom,
  kCreateObjectAbsolute,
  kCreateObjectRelative,
  kCreateObjectFromLibrary,
  kMoveObjectAbsolute,
  kMoveObjectOffset,
  kMoveObjectRelative,
  kRotateObject,
  kResizeObject,
  kScaleObject,
  kDeleteObject,
  kChangeObjectMaterial,
  kDuplicateObject,
  kRenameObject,
  kAlignObjects,
  kClearScene,
};

inline constexpr std::array<ActionType, 16> kAllActionTypes = {
    ActionType::kSetupRoom,          ActionType::kCreateObjectAbsolute, ActionType::kCreateObjectRelative,
    ActionType::kCreateObjectFromLibrary, ActionType::kMoveObjectAbsolute, ActionType::kMoveObjectOffset,
    ActionType::kMoveObjectRelative, ActionType::kRotateObject,         ActionType::kResizeObject,
    ActionType::kScaleObject,        ActionType::kDeleteObject,         ActionType::kChangeObjectMaterial,
    ActionType::kDuplicateObject,    ActionType::kRenameObject,         ActionType::kAlignObjects,
    ActionType::kClearScene,
};

enum class SpatialRelation {
  kOnTopOf,
  kUnder,
  kLeftOf,
  kRightOf,
  kInFrontOf,
  kBehind,
  kNextTo,
  kInside,
  kCenterOfRoom,
  kAgainstWallNorth,
  kAgainstWallSouth,
  kAgainstWallEast,
  kAgainstWallWest,
};

inline constexpr std::array<SpatialRelation, 13> kAllRelations = {
    SpatialRelation::kOnTopOf,        SpatialRelation::kUnder,           SpatialRelation::kLeftOf,
    SpatialRelation::kRightOf,        SpatialRelation::kInFrontOf,       SpatialRelation::kBehind,
    SpatialRelation::kNextTo,         SpatialRelation::kInside,          SpatialRelation::kCenterOfRoom,
    SpatialRelation::kAgainstWallNorth, SpatialRelation::kAgainstWallSouth, SpatialRelation::kAgainstWallEast,
    SpatialRelation::kAgainstWallWest,
};

enum class Axis { kX, kY, kZ };
enum class AssetSource { kPrimitive, kLibrary, kGenerate };

std::string_view to_string(ActionType t);
std::string_view to_string(SpatialRelation r);
std::string_view to_string(Axis a);
std::string_view to_string(AssetSource s);
std::optional<ActionType> action_type_from_string(std::string_view s);
std::optional<SpatialRelation> relation_from_string(std::string_view s);
std::optional<Axis> axis_from_string(std::string_view s);
std::optional<AssetSource> source_from_string(std::string_view s);

// center_of_room and against_wall_* are resolved against the room itself.
bool relation_needs_reference(SpatialRelation r);
// Creation actions carry local_id and participate in the "1","2",... sequence.
bool is_creation(ActionType t);

struct Action {
  ActionType action_type = ActionType::kClearScene;
  std::optional<std::string> object_type;
  std::optional<long long> quantity;
  std::optional<std::string> local_id;
  std::optional<std::string> object_name;
  std::optional<SpatialRelation> relation;
  std::optional<std::string> reference_name;
  std::optional<Vec3> position;
  std::optional<Vec3> offset;
  std::optional<Vec3> rotation_deg;
  std::optional<Vec3> size;
  std::optional<double> scale_factor;
  std::optional<std::string> material;
  std::optional<Vec3> room_size;
  std::optional<std::string> new_name;
  std::optional<Axis> axis;
  std::optional<AssetSource> source;

  friend bool operator==(const Action& a, const Action& b);
};

using ActionList = std::vector<Action>;

// "#3" -> "3"; nullopt for plain scene names.
std::optional<std::string> local_ref(std::string_view name);

struct ParseOptions {
  // Accept missing or non-numeric local_id values and "#" references to
  // them; used ahead of resequence_local_ids by the format-fixing stage.
  bool lenient_local_ids = false;
};

// Field-matrix parse of an already decoded JSON value. Does not check the
// local-id sequence or reference ordering.
ActionList parse_actions_structural(const nlohmann::json& doc, ParseOptions opts = {});

// Throws SchemaError("BadLocalIdSequence" | "DanglingReference").
void check_local_id_sequence(const ActionList& actions);

// Full parse: JSON syntax, field matrix, local-id sequence, backward-only
// "#" references. Throws SchemaError; never aborts on any input.
ActionList parse_action_list(std::string_view json_text);

// Throws ValidationError("UnknownSceneObject" | "DanglingReference").
void validate_reference_closure(const ActionList& actions, const std::set<std::string>& scene_names);

struct Resequenced {
  ActionList actions;
  bool changed = false;
};

// Renumbers creation local_ids to "1","2",... in order and rewrites "#"
// references. Throws ValidationError("UnmappableReference").
Resequenced resequence_local_ids(ActionList actions);

nlohmann::json to_json(const Action& a);
nlohmann::json to_json(const ActionList& actions);
std::string serialize(const ActionList& actions, int indent = -1);

// Sorted keys, shortest round-trip numbers, no whitespace. Dedup key.
std::string canonicalize(const ActionList& actions);

}  // namespace scenesmith
