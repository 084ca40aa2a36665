#include "scenesmith/spatial_resolver.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <sstream>

namespace scenesmith {

namespace {

constexpr double kDegenerate = 1e-9;

struct Proxy {
  std::string name;
  std::string type;
  Aabb box;
  Vec3 location = Vec3::Zero();
  bool room_element = false;
};

std::string fmt(const Vec3& v) {
  std::ostringstream os;
  os << "(" << v.x() << ", " << v.y() << ", " << v.z() << ")";
  return os.str();
}

// "office chair" -> "office_chair"
std::string type_slug(std::string_view type) {
  std::string out;
  for (unsigned char c : type) {
    if (std::isalnum(c)) {
      out.push_back(static_cast<char>(std::tolower(c)));
    } else if (!out.empty() && out.back() != '_') {
      out.push_back('_');
    }
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out.empty() ? "object" : out;
}

Vec3 lateral(SpatialRelation r, const Aabb& ref, const Vec3& e, double gap) {
  const Vec3 c = ref.center();
  switch (r) {
    case SpatialRelation::kLeftOf: return {ref.min.x() - gap - e.x() / 2, c.y(), ref.min.z()};
    case SpatialRelation::kRightOf: return {ref.max.x() + gap + e.x() / 2, c.y(), ref.min.z()};
    case SpatialRelation::kInFrontOf: return {c.x(), ref.min.y() - gap - e.y() / 2, ref.min.z()};
    case SpatialRelation::kBehind: return {c.x(), ref.max.y() + gap + e.y() / 2, ref.min.z()};
    default: break;
  }
  throw ResolveError("InvalidRelation", "not a lateral relation", std::string(to_string(r)));
}

struct Grid {
  std::size_t cols = 1, rows = 1;
};

Grid grid_shape(std::size_t n) {
  Grid g;
  g.cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
  while (g.cols * g.cols < n) ++g.cols;
  while (g.cols > 1 && (g.cols - 1) * (g.cols - 1) >= n) --g.cols;
  g.rows = (n + g.cols - 1) / g.cols;
  return g;
}

Vec3 block_extents(std::size_t n, const Vec3& e, double spacing) {
  const Grid g = grid_shape(n);
  return {static_cast<double>(g.cols) * e.x() + static_cast<double>(g.cols - 1) * spacing,
          static_cast<double>(g.rows) * e.y() + static_cast<double>(g.rows - 1) * spacing, e.z()};
}

class Resolver {
 public:
  Resolver(const SceneSnapshot& snap, const AssetLibrary& library, const ResolverConfig& config)
      : library_(library), config_(config), room_(snap.room) {
    for (const auto& o : snap.objects) proxies_.push_back({o.name, o.object_type, o.bounds(), o.location, o.room_element});
  }

  std::vector<ResolvedAction> run(std::span<const Action> actions) {
    for (index_ = 0; index_ < actions.size(); ++index_) step(actions[index_]);
    return std::move(out_);
  }

 private:
  [[noreturn]] void fail(std::string code, const std::string& what, std::string detail = {}) const {
    throw ResolveError(std::move(code), "action[" + std::to_string(index_) + "]: " + what, std::move(detail));
  }

  Proxy* find(std::string_view name) {
    for (auto& p : proxies_) {
      if (p.name == name) return &p;
    }
    return nullptr;
  }

  std::set<std::string> taken() const {
    std::set<std::string> out;
    for (const auto& p : proxies_) out.insert(p.name);
    return out;
  }

  std::vector<std::string> names_for(const std::string& ref) {
    if (auto id = local_ref(ref)) {
      auto it = groups_.find(*id);
      if (it == groups_.end()) fail("UnknownReference", "local id '#" + *id + "' is not declared", ref);
      for (const auto& n : it->second) {
        if (!find(n)) fail("UnknownReference", "'" + n + "' (from '" + ref + "') no longer exists", n);
      }
      return it->second;
    }
    if (!find(ref)) fail("UnknownReference", "no object named '" + ref + "'", ref);
    return {ref};
  }

  Aabb union_box(const std::vector<std::string>& names) {
    Aabb box;
    for (const auto& n : names) box.expand(find(n)->box);
    return box;
  }

  std::vector<Aabb> obstacles(const std::vector<std::string>& exclude) const {
    std::vector<Aabb> out;
    for (const auto& p : proxies_) {
      if (p.room_element || std::find(exclude.begin(), exclude.end(), p.name) != exclude.end()) continue;
      out.push_back(p.box);
    }
    return out;
  }

  Vec3 place(const Vec3& extents, SpatialRelation rel, const std::optional<std::string>& ref_name,
             const std::vector<std::string>& exclude) {
    std::optional<Aabb> ref;
    if (ref_name) ref = union_box(names_for(*ref_name));
    const auto obs = obstacles(exclude);
    PlacementContext ctx{room_, obs, config_.gap};
    return resolve_relation(extents, rel, ref ? &*ref : nullptr, ctx);
  }

  ResolvedAction base(const Action& a) const {
    ResolvedAction r;
    r.action_type = a.action_type;
    r.source_index = index_;
    return r;
  }

  Vec3 clamp_into_room(const Vec3& pos, const Vec3& e, std::vector<std::string>& notes) const {
    if (!room_) return pos;
    const Aabb in = room_interior(*room_);
    Vec3 out = pos;
    for (int i = 0; i < 2; ++i) {
      const double lo = in.min[i] + e[i] / 2, hi = in.max[i] - e[i] / 2;
      out[i] = lo > hi ? in.center()[i] : std::clamp(pos[i], lo, hi);
    }
    const double top = in.max.z() - e.z();
    out.z() = top < 0 ? 0.0 : std::clamp(pos.z(), 0.0, top);
    if (out != pos) notes.push_back("clamped into room interior: " + fmt(pos) + " -> " + fmt(out));
    return out;
  }

  std::string choose_asset(const Action& a, std::string& type) {
    const bool library = a.action_type == ActionType::kCreateObjectFromLibrary || a.source == AssetSource::kLibrary;
    if (library) {
      std::string query = *a.object_type;
      std::replace(query.begin(), query.end(), '_', ' ');
      if (library_.index().empty()) fail("NoLibraryMatch", "asset library has no searchable entries", query);
      const auto hits = library_.search(query, 1);
      if (hits.empty() || hits.front().score < config_.min_library_score) {
        const double best = hits.empty() ? -1.0 : hits.front().score;
        fail("NoLibraryMatch", "no asset matches '" + query + "' (best score " + std::to_string(best) + ")", query);
      }
      const Asset* asset = library_.find(hits.front().asset_id);
      type = type_slug(asset->object_type);
      return asset->asset_id;
    }
    type = type_slug(*a.object_type);
    if (a.source == AssetSource::kGenerate) return "generate:" + type;
    return "primitive:" + type;
  }

  void create(const Action& a) {
    const long long qty = a.quantity.value_or(1);
    if (qty > config_.max_quantity) {
      fail("PlacementInfeasible", "quantity " + std::to_string(qty) + " exceeds the limit of " +
                                      std::to_string(config_.max_quantity), std::to_string(qty));
    }
    const auto n = static_cast<std::size_t>(qty);
    std::string type;
    const std::string asset_id = choose_asset(a, type);
    const Vec3 size = a.size.value_or(library_.default_extents(asset_id, type));
    if (!all_finite(size) || size.x() <= 0 || size.y() <= 0 || size.z() < 0) {
      fail("NonPositiveSize", "object extents must be positive", "size");
    }
    const Vec3 e = a.rotation_deg ? rotated_extents(size, *a.rotation_deg) : size;

    std::vector<Vec3> positions;
    const auto rel = a.relation;
    const bool stack = rel && (*rel == SpatialRelation::kOnTopOf || *rel == SpatialRelation::kInside);
    if (n > 1 && stack) {
      const Aabb ref = union_box(names_for(*a.reference_name));
      positions = arrange_grid(n, Rect::of(ref), e, config_.grid_spacing);
      // The first position carries the relation's z.
      const double z = resolve_relation(e, *rel, &ref, PlacementContext{room_, {}, config_.gap}).z();
      for (auto& p : positions) p.z() = z;
    } else {
      const Vec3 block = n > 1 ? block_extents(n, e, config_.grid_spacing) : e;
      Vec3 anchor = Vec3::Zero();
      if (rel) {
        anchor = place(block, *rel, a.reference_name, {});
      } else if (a.position) {
        anchor = *a.position;
      }
      if (n == 1) {
        positions.push_back(anchor);
      } else {
        const Rect fp{anchor.x() - block.x() / 2, anchor.y() - block.y() / 2, anchor.x() + block.x() / 2,
                      anchor.y() + block.y() / 2};
        positions = arrange_grid(n, fp, e, config_.grid_spacing);
        for (auto& p : positions) p.z() = anchor.z();
      }
    }

    auto names = taken();
    std::vector<std::string> group;
    for (const auto& pos : positions) {
      ResolvedAction r = base(a);
      r.new_name = generate_unique_name(names, type);
      names.insert(r.new_name);
      r.object_type = type;
      r.asset_id = asset_id;
      r.size = size;
      r.rotation_deg = a.rotation_deg;
      r.material = a.material;
      r.position = clamp_into_room(pos, e, r.notes);
      proxies_.push_back({r.new_name, type, Aabb::from_base(*r.position, e), *r.position, false});
      group.push_back(r.new_name);
      out_.push_back(std::move(r));
    }
    groups_[*a.local_id] = std::move(group);
  }

  void emit_move(const Action& a, const std::string& name, const Vec3& location) {
    ResolvedAction r = base(a);
    Proxy* p = find(name);
    r.object_name = name;
    r.object_type = p->type;
    r.position = location;
    const Vec3 delta = location - p->location;
    p->box = {p->box.min + delta, p->box.max + delta};
    p->location = location;
    out_.push_back(std::move(r));
  }

  void move(const Action& a) {
    const auto members = names_for(*a.object_name);
    const Aabb group_box = union_box(members);
    Vec3 delta = Vec3::Zero();
    switch (a.action_type) {
      case ActionType::kMoveObjectAbsolute:
        delta = *a.position - find(members.front())->location;
        break;
      case ActionType::kMoveObjectOffset:
        delta = *a.offset;
        break;
      case ActionType::kMoveObjectRelative:
        delta = place(group_box.size(), *a.relation, a.reference_name, members) - group_box.base_center();
        break;
      case ActionType::kAlignObjects: {
        const int axis = static_cast<int>(*a.axis);
        const double target = union_box(names_for(*a.reference_name)).center()[axis];
        for (const auto& m : members) {
          Vec3 loc = find(m)->location;
          loc[axis] += target - find(m)->box.center()[axis];
          emit_move(a, m, loc);
        }
        return;
      }
      default: break;
    }
    for (const auto& m : members) emit_move(a, m, find(m)->location + delta);
  }

  void transform(const Action& a) {
    for (const auto& m : names_for(*a.object_name)) {
      ResolvedAction r = base(a);
      Proxy* p = find(m);
      r.object_name = m;
      r.object_type = p->type;
      const Vec3 c = p->box.center();
      Mat3 linear = Mat3::Identity();
      if (a.action_type == ActionType::kRotateObject) {
        r.rotation_deg = a.rotation_deg;
        linear = rotation_from_euler_deg(*a.rotation_deg);
        Aabb box;
        for (int i = 0; i < 8; ++i) {
          Vec3 corner((i & 1) ? p->box.max.x() : p->box.min.x(), (i & 2) ? p->box.max.y() : p->box.min.y(),
                      (i & 4) ? p->box.max.z() : p->box.min.z());
          box.expand(linear * (corner - c) + c);
        }
        p->box = box;
      } else {
        Vec3 s;
        if (a.action_type == ActionType::kResizeObject) {
          r.size = a.size;
          const Vec3 cur = p->box.size();
          for (int i = 0; i < 3; ++i) s[i] = cur[i] > 0 ? (*a.size)[i] / cur[i] : 1.0;
        } else {
          r.scale_factor = a.scale_factor;
          s = Vec3::Constant(*a.scale_factor);
        }
        linear = s.asDiagonal();
        p->box = {linear * (p->box.min - c) + c, linear * (p->box.max - c) + c};
      }
      p->location = linear * (p->location - c) + c;
      out_.push_back(std::move(r));
    }
  }

  void duplicate(const Action& a) {
    const auto members = names_for(*a.object_name);
    if (a.new_name && members.size() > 1) {
      fail("AmbiguousReference", "new_name given for a group of " + std::to_string(members.size()) + " objects",
           *a.object_name);
    }
    auto names = taken();
    for (const auto& m : members) {
      const Proxy src = *find(m);
      ResolvedAction r = base(a);
      r.object_name = m;
      r.object_type = src.type;
      r.new_name = a.new_name ? *a.new_name : generate_unique_name(names, src.type);
      names.insert(r.new_name);
      Vec3 delta;
      if (a.offset) {
        delta = *a.offset;
      } else {
        const Vec3 e = src.box.size();
        PlacementContext ctx{room_, {}, config_.gap};
        delta = resolve_relation(e, SpatialRelation::kRightOf, &src.box, ctx) - src.box.base_center();
      }
      r.position = src.location + delta;
      proxies_.push_back({r.new_name, src.type, {src.box.min + delta, src.box.max + delta}, *r.position, false});
      out_.push_back(std::move(r));
    }
  }

  void simple(const Action& a) {
    const auto members = names_for(*a.object_name);
    if (a.action_type == ActionType::kRenameObject && members.size() > 1) {
      fail("AmbiguousReference", "cannot give one name to a group of " + std::to_string(members.size()) + " objects",
           *a.object_name);
    }
    for (const auto& m : members) {
      ResolvedAction r = base(a);
      r.object_name = m;
      r.object_type = find(m)->type;
      switch (a.action_type) {
        case ActionType::kDeleteObject:
          std::erase_if(proxies_, [&](const Proxy& p) { return p.name == m; });
          break;
        case ActionType::kChangeObjectMaterial:
          r.material = a.material;
          break;
        case ActionType::kRenameObject:
          r.new_name = *a.new_name;
          find(m)->name = *a.new_name;
          break;
        default: break;
      }
      out_.push_back(std::move(r));
    }
  }

  void setup_room(const Action& a) {
    ResolvedAction r = base(a);
    r.room_size = a.room_size;
    std::erase_if(proxies_, [](const Proxy& p) { return p.room_element; });
    std::vector<Proxy> slabs;
    for (const auto& s : room_slabs(*a.room_size, 0.1)) {
      slabs.push_back({std::string(s.name), std::string(s.object_type), s.bounds, s.bounds.base_center(), true});
    }
    proxies_.insert(proxies_.begin(), slabs.begin(), slabs.end());
    room_ = Room{*a.room_size, 0.1};
    out_.push_back(std::move(r));
  }

  void step(const Action& a) {
    switch (a.action_type) {
      case ActionType::kSetupRoom: return setup_room(a);
      case ActionType::kCreateObjectAbsolute:
      case ActionType::kCreateObjectRelative:
      case ActionType::kCreateObjectFromLibrary: return create(a);
      case ActionType::kMoveObjectAbsolute:
      case ActionType::kMoveObjectOffset:
      case ActionType::kMoveObjectRelative:
      case ActionType::kAlignObjects: return move(a);
      case ActionType::kRotateObject:
      case ActionType::kResizeObject:
      case ActionType::kScaleObject: return transform(a);
      case ActionType::kDuplicateObject: return duplicate(a);
      case ActionType::kDeleteObject:
      case ActionType::kChangeObjectMaterial:
      case ActionType::kRenameObject: return simple(a);
      case ActionType::kClearScene:
        proxies_.clear();
        groups_.clear();
        room_.reset();
        out_.push_back(base(a));
        return;
    }
  }

  const AssetLibrary& library_;
  const ResolverConfig& config_;
  std::optional<Room> room_;
  std::vector<Proxy> proxies_;
  std::map<std::string, std::vector<std::string>> groups_;
  std::vector<ResolvedAction> out_;
  std::size_t index_ = 0;
};

}  // namespace

Vec3 rotated_extents(const Vec3& extents, const Vec3& rotation_deg) {
  return rotation_from_euler_deg(rotation_deg).cwiseAbs() * extents;
}

Vec3 resolve_relation(const Vec3& e, SpatialRelation relation, const Aabb* reference, const PlacementContext& ctx) {
  if (!relation_needs_reference(relation)) {
    if (relation == SpatialRelation::kCenterOfRoom) return Vec3::Zero();
    if (!ctx.room) throw ResolveError("MissingReference", "wall relations need a room", std::string(to_string(relation)));
    const Aabb in = room_interior(*ctx.room);
    switch (relation) {
      case SpatialRelation::kAgainstWallNorth: return {0, in.max.y() - e.y() / 2, 0};
      case SpatialRelation::kAgainstWallSouth: return {0, in.min.y() + e.y() / 2, 0};
      case SpatialRelation::kAgainstWallEast: return {in.max.x() - e.x() / 2, 0, 0};
      case SpatialRelation::kAgainstWallWest: return {in.min.x() + e.x() / 2, 0, 0};
      default: break;
    }
  }
  if (!reference || reference->empty()) {
    throw ResolveError("MissingReference", "relation needs a reference object", std::string(to_string(relation)));
  }
  const Vec3 rs = reference->size();
  if (rs.x() < kDegenerate || rs.y() < kDegenerate ||
      (relation == SpatialRelation::kInside && rs.z() < kDegenerate)) {
    throw ResolveError("ReferenceDegenerate", "reference has a zero extent", fmt(rs));
  }
  const Vec3 c = reference->center();
  switch (relation) {
    case SpatialRelation::kOnTopOf: return {c.x(), c.y(), reference->max.z()};
    case SpatialRelation::kUnder: return {c.x(), c.y(), reference->min.z() - e.z()};
    case SpatialRelation::kInside: return {c.x(), c.y(), c.z() - e.z() / 2};
    case SpatialRelation::kLeftOf:
    case SpatialRelation::kRightOf:
    case SpatialRelation::kInFrontOf:
    case SpatialRelation::kBehind: return lateral(relation, *reference, e, ctx.gap);
    case SpatialRelation::kNextTo: {
      constexpr SpatialRelation kOrder[] = {SpatialRelation::kRightOf, SpatialRelation::kLeftOf,
                                            SpatialRelation::kBehind, SpatialRelation::kInFrontOf};
      for (auto r : kOrder) {
        const Vec3 p = lateral(r, *reference, e, ctx.gap);
        const Aabb box = Aabb::from_base(p, e);
        if (ctx.room && !room_interior(*ctx.room).contains(box, 1e-9)) continue;
        const bool blocked =
            std::any_of(ctx.obstacles.begin(), ctx.obstacles.end(), [&](const Aabb& o) { return o.overlaps(box); });
        if (!blocked) return p;
      }
      return lateral(SpatialRelation::kRightOf, *reference, e, ctx.gap);
    }
    default: break;
  }
  throw ResolveError("MissingReference", "unsupported relation", std::string(to_string(relation)));
}

std::vector<Vec3> arrange_grid(std::size_t n, const Rect& footprint, const Vec3& e, double spacing) {
  if (n == 0) throw ResolveError("PlacementInfeasible", "nothing to arrange");
  const Grid g = grid_shape(n);
  const Vec3 block = block_extents(n, e, spacing);
  constexpr double kSlack = 1e-9;
  if (block.x() > footprint.width() + kSlack || block.y() > footprint.depth() + kSlack) {
    throw ResolveError("PlacementInfeasible",
                       std::to_string(n) + " items need " + fmt(block) + " but the footprint is " +
                           std::to_string(footprint.width()) + " x " + std::to_string(footprint.depth()),
                       std::to_string(n));
  }
  const double x0 = footprint.center_x() - block.x() / 2 + e.x() / 2;
  const double y0 = footprint.center_y() + block.y() / 2 - e.y() / 2;
  std::vector<Vec3> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = static_cast<double>(i / g.cols), col = static_cast<double>(i % g.cols);
    out.emplace_back(x0 + col * (e.x() + spacing), y0 - row * (e.y() + spacing), 0.0);
  }
  if (n == 1) out.front() = {footprint.center_x(), footprint.center_y(), 0.0};
  return out;
}

std::vector<ResolvedAction> resolve(const SceneSnapshot& snapshot, std::span<const Action> actions,
                                    const AssetLibrary& library, const ResolverConfig& config) {
  return Resolver(snapshot, library, config).run(actions);
}

nlohmann::json to_json(const ResolvedAction& r) {
  nlohmann::json j = {{"action_type", to_string(r.action_type)}, {"source_index", r.source_index}};
  if (!r.object_name.empty()) j["object_name"] = r.object_name;
  if (!r.new_name.empty()) j["new_name"] = r.new_name;
  if (!r.object_type.empty()) j["object_type"] = r.object_type;
  if (!r.asset_id.empty()) j["asset_id"] = r.asset_id;
  if (r.position) j["position"] = vec_to_object(*r.position);
  if (r.rotation_deg) j["rotation_deg"] = vec_to_object(*r.rotation_deg);
  if (r.size) j["size"] = vec_to_object(*r.size);
  if (r.room_size) j["room_size"] = vec_to_object(*r.room_size);
  if (r.scale_factor) j["scale_factor"] = *r.scale_factor;
  if (r.material) j["material"] = *r.material;
  if (!r.notes.empty()) j["notes"] = r.notes;
  return j;
}

nlohmann::json to_json(const std::vector<ResolvedAction>& rs) {
  auto j = nlohmann::json::array();
  for (const auto& r : rs) j.push_back(to_json(r));
  return j;
}

}  // namespace scenesmith
