#include "generators.hpp"

#include <cmath>

namespace gen {

using namespace scenesmith;

double nice(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  return std::round(d(rng) * 100.0) / 100.0;
}

namespace {

Vec3 vec(std::mt19937_64& rng, double lo, double hi) { return {nice(rng, lo, hi), nice(rng, lo, hi), nice(rng, lo, hi)}; }

template <typename T, std::size_t N>
T pick(std::mt19937_64& rng, const std::array<T, N>& xs) {
  return xs[std::uniform_int_distribution<std::size_t>(0, N - 1)(rng)];
}

std::string pick(std::mt19937_64& rng, const std::vector<std::string>& xs) {
  return xs[std::uniform_int_distribution<std::size_t>(0, xs.size() - 1)(rng)];
}

bool coin(std::mt19937_64& rng) { return (rng() & 1) != 0; }

}  // namespace

ActionList valid_actions(std::mt19937_64& rng, std::size_t max_len, const std::vector<std::string>& scene) {
  static const std::vector<std::string> kTypes = {"chair", "table", "lamp", "bowl", "office chair", "box"};
  static const std::vector<std::string> kMaterials = {"wood", "metal", "glass", "itu_marble", "concrete"};
  const std::size_t len = std::uniform_int_distribution<std::size_t>(0, max_len)(rng);
  ActionList out;
  int next_id = 1;
  auto any_name = [&]() -> std::string {
    if (next_id > 1 && (scene.empty() || coin(rng))) {
      return "#" + std::to_string(std::uniform_int_distribution<int>(1, next_id - 1)(rng));
    }
    if (scene.empty()) return "";
    return pick(rng, scene);
  };
  for (std::size_t i = 0; i < len; ++i) {
    Action a;
    a.action_type = pick(rng, kAllActionTypes);
    const bool creation = is_creation(a.action_type);
    if (!creation && a.action_type != ActionType::kSetupRoom && a.action_type != ActionType::kClearScene) {
      a.object_name = any_name();
      if (a.object_name->empty()) a.action_type = ActionType::kClearScene, a.object_name.reset();
    }
    switch (a.action_type) {
      case ActionType::kSetupRoom: a.room_size = vec(rng, 2, 30); break;
      case ActionType::kCreateObjectAbsolute:
      case ActionType::kCreateObjectRelative:
      case ActionType::kCreateObjectFromLibrary: {
        a.object_type = pick(rng, kTypes);
        a.quantity = std::uniform_int_distribution<long long>(1, 6)(rng);
        if (a.action_type == ActionType::kCreateObjectRelative || (a.action_type != ActionType::kCreateObjectAbsolute && coin(rng))) {
          a.relation = pick(rng, kAllRelations);
          if (relation_needs_reference(*a.relation)) {
            a.reference_name = any_name();
            if (a.reference_name->empty()) a.relation = SpatialRelation::kCenterOfRoom, a.reference_name.reset();
          }
        } else if (coin(rng)) {
          a.position = vec(rng, -5, 5);
        }
        if (coin(rng)) a.size = vec(rng, 0.1, 3);
        if (coin(rng)) a.rotation_deg = vec(rng, -180, 180);
        if (coin(rng)) a.material = pick(rng, kMaterials);
        if (a.action_type != ActionType::kCreateObjectFromLibrary && coin(rng)) {
          a.source = pick(rng, std::array{AssetSource::kPrimitive, AssetSource::kLibrary, AssetSource::kGenerate});
        }
        a.local_id = std::to_string(next_id++);
        break;
      }
      case ActionType::kMoveObjectAbsolute: a.position = vec(rng, -5, 5); break;
      case ActionType::kMoveObjectOffset: a.offset = vec(rng, -2, 2); break;
      case ActionType::kMoveObjectRelative:
        a.relation = pick(rng, kAllRelations);
        if (relation_needs_reference(*a.relation)) {
          a.reference_name = any_name();
          if (a.reference_name->empty()) a.relation = SpatialRelation::kCenterOfRoom, a.reference_name.reset();
        }
        break;
      case ActionType::kRotateObject: a.rotation_deg = vec(rng, -180, 180); break;
      case ActionType::kResizeObject: a.size = vec(rng, 0.1, 3); break;
      case ActionType::kScaleObject: a.scale_factor = nice(rng, 0.1, 4); break;
      case ActionType::kChangeObjectMaterial: a.material = pick(rng, kMaterials); break;
      case ActionType::kDuplicateObject:
        if (coin(rng)) a.offset = vec(rng, -2, 2);
        if (coin(rng)) a.new_name = "copy_" + std::to_string(i);
        break;
      case ActionType::kRenameObject: a.new_name = "renamed_" + std::to_string(i); break;
      case ActionType::kAlignObjects:
        a.reference_name = any_name();
        a.axis = pick(rng, std::array{Axis::kX, Axis::kY, Axis::kZ});
        break;
      default: break;
    }
    out.push_back(std::move(a));
  }
  return out;
}

}  // namespace gen
