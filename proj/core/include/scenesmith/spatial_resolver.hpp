#pragma once

#include "scenesmith/action_schema.hpp"
#include "scenesmith/asset_library.hpp"
#include "scenesmith/resolved_action.hpp"
#include "scenesmith/scene_engine.hpp"

#include <optional>
#include <span>
#include <vector>

namespace scenesmith {

struct ResolverConfig {
  double gap = 0.10;           // clearance for lateral relations
  double grid_spacing = 0.02;  // between grid-arranged items
  long long max_quantity = 1000;
  double min_library_score = 0.05;
};

struct Rect {
  double min_x = 0, min_y = 0, max_x = 0, max_y = 0;

  static Rect of(const Aabb& box) { return {box.min.x(), box.min.y(), box.max.x(), box.max.y()}; }
  double width() const { return max_x - min_x; }
  double depth() const { return max_y - min_y; }
  double center_x() const { return (min_x + max_x) / 2; }
  double center_y() const { return (min_y + max_y) / 2; }
};

// What a relation may need besides its reference: the room for room
// relations and clamping, and obstacles for next_to.
struct PlacementContext {
  std::optional<Room> room;
  std::span<const Aabb> obstacles;
  double gap = 0.10;
};

// Bottom-center position for a subject of `subject_extents` placed
// according to `relation`. `reference` is ignored by room relations.
// Throws ResolveError("MissingReference" | "ReferenceDegenerate").
Vec3 resolve_relation(const Vec3& subject_extents, SpatialRelation relation, const Aabb* reference,
                      const PlacementContext& ctx);

// n bottom-center positions (z = 0) on a ceil(sqrt(n))-column grid centered
// in `footprint`, row-major from the north-west corner. Throws
// ResolveError("PlacementInfeasible").
std::vector<Vec3> arrange_grid(std::size_t n, const Rect& footprint, const Vec3& item_extents, double spacing = 0.02);

// AABB extents of a box of `extents` after rotating by `rotation_deg`.
Vec3 rotated_extents(const Vec3& extents, const Vec3& rotation_deg);

// Local ids become names, relations become absolute positions, assets are
// chosen and quantities expanded. Pure. Throws ResolveError
// ("UnknownReference" | "NoLibraryMatch" | "PlacementInfeasible" | ...).
std::vector<ResolvedAction> resolve(const SceneSnapshot& snapshot, std::span<const Action> actions,
                                    const AssetLibrary& library, const ResolverConfig& config = {});

}  // namespace scenesmith
