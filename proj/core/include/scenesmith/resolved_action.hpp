#pragma once

#include "scenesmith/action_schema.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace scenesmith {

// A concrete scene operation: names are real scene names, positions are
// absolute, assets are chosen and quantities are expanded. No "#" reference,
// relation or description survives resolution.
//
// Position semantics: for creations it is the bottom-center of the new
// object's AABB; for moves, duplicates and alignments it is the target
// object origin (`location`).
struct ResolvedAction {
  ActionType action_type = ActionType::kClearScene;
  std::size_t source_index = 0;  // index of the Action this came from
  std::string object_name;       // target of a modification / duplicate source
  std::string new_name;          // created, duplicated or renamed name
  std::string object_type;
  std::string asset_id;
  std::optional<Vec3> position;
  std::optional<Vec3> rotation_deg;
  std::optional<Vec3> size;
  std::optional<Vec3> room_size;
  std::optional<double> scale_factor;
  std::optional<std::string> material;
  std::vector<std::string> notes;  // e.g. clamping into the room
};

nlohmann::json to_json(const ResolvedAction& r);
nlohmann::json to_json(const std::vector<ResolvedAction>& rs);

}  // namespace scenesmith
