#include "scenesmith/command_pipeline.hpp"

#include "scenesmith/few_shot_resource.hpp"

#include <cstdio>
#include <sstream>

namespace scenesmith {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v == 0.0 ? 0.0 : v);
  std::string s = buf;
  while (s.back() == '0') s.pop_back();
  if (s.back() == '.') s.pop_back();
  return s == "-0" ? "0" : s;
}

std::string triple(const Vec3& v) { return "(" + num(v.x()) + ", " + num(v.y()) + ", " + num(v.z()) + ")"; }

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

constexpr std::string_view kRole =
    "You are the command parser of a 3D scene editor used to build indoor environments for wireless ray "
    "tracing. Translate the user's natural-language command into a JSON array of action objects that the "
    "editor executes sequentially in array order.";

constexpr std::string_view kSchema =
    "Each action is an object with an \"action_type\" equal to one of: setup_room, create_object_absolute, "
    "create_object_relative, create_object_from_library, move_object_absolute, move_object_offset, "
    "move_object_relative, rotate_object, resize_object, scale_object, delete_object, change_object_material, "
    "duplicate_object, rename_object, align_objects, clear_scene.\n"
    "Fields (include only the ones an action needs; no other fields are allowed):\n"
    "- setup_room: room_size {x,y,z} in meters. The room is centered on the origin with the floor at z = 0.\n"
    "- create_object_*: object_type (string), quantity (positive integer), local_id (string \"1\", \"2\", ... in "
    "order of creation); optional material, size {x,y,z}, rotation_deg {x,y,z}, source "
    "(primitive|library|generate). create_object_absolute may give position {x,y,z}; create_object_relative "
    "needs relation and usually reference_name; create_object_from_library takes a descriptive object_type.\n"
    "- move_object_absolute: object_name, position. move_object_offset: object_name, offset. "
    "move_object_relative: object_name, relation, reference_name.\n"
    "- rotate_object: object_name, rotation_deg (a single angle is a rotation about z). resize_object: "
    "object_name, size. scale_object: object_name, scale_factor (> 0).\n"
    "- delete_object: object_name. change_object_material: object_name, material. duplicate_object: "
    "object_name, optional offset and new_name. rename_object: object_name, new_name. align_objects: "
    "object_name, reference_name, axis (x|y|z). clear_scene: no fields.\n"
    "Relations: on_top_of, under, left_of, right_of, in_front_of, behind, next_to, inside, center_of_room, "
    "against_wall_north, against_wall_south, against_wall_east, against_wall_west. center_of_room and "
    "against_wall_* take no reference_name.\n"
    "object_name and reference_name refer to an existing scene object or to an object created earlier in the "
    "same array through its local ID with a \"#\" prefix (\"#1\"). Positions are the bottom center of the "
    "object. Lengths are meters, angles degrees.";

constexpr std::string_view kOutput =
    "Reply with the JSON array only, enclosed in a JSON code block (```json ... ```).";

std::vector<FewShotExample> load_examples() {
  const auto doc = nlohmann::json::parse(resources::kFewShotV1);
  std::vector<FewShotExample> out;
  for (const auto& e : doc.at("examples")) {
    out.push_back({e.at("command").get<std::string>(), e.at("scene_objects").get<std::vector<std::string>>(),
                   e.at("actions").dump()});
  }
  return out;
}

void wrap(const Error& e, std::string_view fallback_stage, const std::string& raw) {
  const std::string stage = e.stage().empty() ? std::string(fallback_stage) : e.stage();
  throw ParseFailure(e.code(), e.what(), e.detail(), stage, raw);
}

}  // namespace

const std::vector<FewShotExample>& few_shot_examples() {
  static const std::vector<FewShotExample> kExamples = load_examples();
  return kExamples;
}

std::string build_prompt(const SceneSnapshot& snapshot, std::string_view command) {
  std::ostringstream p;
  p << "## Role\n" << kRole << "\n\n";

  p << "## Scene Context\n";
  if (snapshot.room) {
    p << "Room: " << num(snapshot.room->size.x()) << " x " << num(snapshot.room->size.y()) << " x "
      << num(snapshot.room->size.z()) << " m, interior centered on the origin, floor at z = 0.\n";
  } else {
    p << "No room has been set up.\n";
  }
  std::vector<const ObjectSummary*> furniture, shell;
  for (const auto& o : snapshot.objects) (o.room_element ? shell : furniture).push_back(&o);
  if (furniture.empty() && shell.empty()) {
    p << "The scene is empty.\n";
  } else if (furniture.empty()) {
    p << "Objects: none besides the room elements.\n";
  } else {
    p << "Objects:\n";
    for (const auto* o : furniture) {
      p << "- " << o->name << " (" << o->object_type << "), center " << triple(o->geometric_center) << ", size "
        << triple(o->size) << ", material " << o->material << (o->visible ? "" : ", hidden") << "\n";
    }
  }
  if (!shell.empty()) {
    p << "Room elements:";
    for (std::size_t i = 0; i < shell.size(); ++i) p << (i ? ", " : " ") << shell[i]->name;
    p << "\n";
  }
  p << "Valid materials:";
  for (std::size_t i = 0; i < snapshot.materials.size(); ++i) p << (i ? ", " : " ") << snapshot.materials[i];
  p << "\nDirections:";
  for (std::size_t i = 0; i < snapshot.directions.size(); ++i) p << (i ? ", " : " ") << snapshot.directions[i];
  p << "\n\n";

  p << "## Schema\n" << kSchema << "\n\n";

  p << "## Examples\n";
  for (const auto& ex : few_shot_examples()) {
    p << "Scene objects: ";
    if (ex.scene_objects.empty()) p << "(empty)";
    for (std::size_t i = 0; i < ex.scene_objects.size(); ++i) p << (i ? ", " : "") << ex.scene_objects[i];
    p << "\nCommand: " << ex.command << "\n```json\n" << ex.actions_json << "\n```\n\n";
  }

  p << "## Output Format\n" << kOutput << "\n\n";
  p << "## Command\n" << command << "\n";
  return p.str();
}

std::string extract_json_block(std::string_view reply) {
  if (auto open = reply.find("```"); open != std::string_view::npos) {
    const auto close = reply.find("```", open + 3);
    if (close != std::string_view::npos) {
      // The info string ("json") runs to the end of the opening line.
      auto body = reply.find('\n', open + 3);
      body = body < close ? body + 1 : open + 3;
      return trim(reply.substr(body, close - body));
    }
  }

  std::string_view best;
  for (std::size_t i = 0; i < reply.size(); ++i) {
    if (reply[i] != '[') continue;
    int depth = 0;
    bool in_string = false, escaped = false;
    std::size_t end = std::string_view::npos;
    for (std::size_t j = i; j < reply.size(); ++j) {
      const char c = reply[j];
      if (in_string) {
        if (escaped) {
          escaped = false;
        } else if (c == '\\') {
          escaped = true;
        } else if (c == '"') {
          in_string = false;
        }
        continue;
      }
      if (c == '"') {
        in_string = true;
      } else if (c == '[' || c == '{') {
        ++depth;
      } else if (c == ']' || c == '}') {
        if (--depth == 0) {
          end = j;
          break;
        }
        if (depth < 0) break;
      }
    }
    if (end == std::string_view::npos) continue;
    const auto candidate = reply.substr(i, end - i + 1);
    if (candidate.size() <= best.size()) continue;
    if (!nlohmann::json::accept(candidate)) continue;
    best = candidate;
  }
  if (best.empty()) throw ParseFailure("NoJsonFound", "reply contains no JSON array", {}, "extract", std::string(reply));
  return std::string(best);
}

ActionList validate_reply_json(std::string_view json_text, const std::set<std::string>& scene_names) {
  auto doc = nlohmann::json::parse(json_text, nullptr, false);
  if (doc.is_discarded()) throw SchemaError("JsonSyntax", "input is not valid JSON");
  ParseOptions lenient;
  lenient.lenient_local_ids = true;
  ActionList actions = resequence_local_ids(parse_actions_structural(doc, lenient)).actions;
  check_local_id_sequence(actions);
  validate_reference_closure(actions, scene_names);
  return actions;
}

ActionList ChatParser::parse(const SceneSnapshot& snapshot, std::string_view command) const {
  std::string reply;
  try {
    reply = chat_->complete(build_prompt(snapshot, command));
  } catch (const Error& e) {
    throw ParseFailure(e.code(), e.what(), e.detail(), "backend");
  } catch (const std::exception& e) {
    throw ParseFailure("BackendUnavailable", e.what(), {}, "backend");
  }
  const std::string json = extract_json_block(reply);
  try {
    return validate_reply_json(json, snapshot.names());
  } catch (const Error& e) {
    wrap(e, "schema", reply);
  }
  return {};
}

ActionList GrammarParser::parse(const SceneSnapshot& snapshot, std::string_view command) const {
  ActionList actions = fallback_parse(snapshot, command);
  try {
    // Same wire contract as any other backend.
    return validate_reply_json(serialize(actions), snapshot.names());
  } catch (const Error& e) {
    wrap(e, "validation", command.data() ? std::string(command) : std::string());
  }
  return {};
}

ActionList parse_command(const ParserBackend& backend, const SceneSnapshot& snapshot, std::string_view command) {
  if (trim(command).empty()) throw ParseFailure("EmptyCommand", "command is empty", {}, "input");
  try {
    return backend.parse(snapshot, command);
  } catch (const ParseFailure&) {
    throw;
  } catch (const Error& e) {
    wrap(e, backend.kind(), {});
  } catch (const std::exception& e) {
    throw ParseFailure("Internal", e.what(), {}, std::string(backend.kind()));
  }
  return {};
}

}  // namespace scenesmith
