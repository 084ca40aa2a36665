#include "scenesmith/command_pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <regex>

namespace scenesmith {

namespace {

using std::regex;
using std::smatch;

constexpr auto kFlags = regex::ECMAScript | regex::icase;

#define NUM R"((?:-?(?:\d+(?:\.\d+)?|\.\d+)))"
#define SEP R"(\s*(?:x|\*|by|,)\s*)"
#define TRIPLE R"(\(?\s*)" NUM SEP NUM SEP NUM R"(\s*\)?(?:\s*(?:m|meters?|metres?)\b)?)"
#define AXIS R"((?:(?:about|around|along)\s+(?:the\s+)?([xyz])(?:[- ]?axis)?))"
#define DEGREES R"((?:\s*(?:degrees?|deg)\b)?)"

#define REL_WORDS                                                                                                \
  R"((on\s+top\s+of|onto|on|underneath|beneath|below|under|to\s+the\s+left\s+of|left\s+of|to\s+the\s+right\s+of|)" \
  R"(right\s+of|in\s+front\s+of|behind|next\s+to|beside|inside|into|in))"

#define VERBS                                                                                                  \
  "(?:setup|set\\s+up|create|add|put|place|make|insert|spawn|generate|build|move|shift|translate|slide|push|" \
  "rotate|turn|spin|resize|scale|enlarge|shrink|grow|double|halve|delete|remove|erase|destroy|change|set|"    \
  "switch|paint|rename|duplicate|copy|clone|align|clear|reset|wipe)"

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> words(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

Vec3 parse_triple(const std::string& text) {
  static const regex num(NUM);
  std::vector<double> v;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), num); it != std::sregex_iterator(); ++it) {
    v.push_back(std::stod(it->str()));
  }
  if (v.size() != 3) throw ParseFailure("Unrecognized", "expected three numbers in '" + text + "'", text, "grammar");
  return {v[0], v[1], v[2]};
}

std::optional<long long> count_word(const std::string& w) {
  static const std::map<std::string, long long> kWords = {
      {"a", 1},   {"an", 1},   {"one", 1},   {"two", 2},    {"three", 3},  {"four", 4},    {"five", 5},
      {"six", 6}, {"seven", 7}, {"eight", 8}, {"nine", 9},  {"ten", 10},   {"eleven", 11}, {"twelve", 12},
  };
  const std::string l = lower(w);
  if (auto it = kWords.find(l); it != kWords.end()) return it->second;
  if (!l.empty() && l.size() <= 7 && std::all_of(l.begin(), l.end(), [](unsigned char c) { return std::isdigit(c); })) {
    return std::stoll(l);
  }
  return std::nullopt;
}

std::string singular(const std::string& w) {
  auto ends = [&](std::string_view s) { return w.size() > s.size() && w.compare(w.size() - s.size(), s.size(), s) == 0; };
  if (ends("ies")) return w.substr(0, w.size() - 3) + "y";
  if (ends("ches") || ends("shes") || ends("sses") || ends("xes") || ends("zes")) return w.substr(0, w.size() - 2);
  if (ends("s") && !ends("ss") && !ends("us")) return w.substr(0, w.size() - 1);
  return w;
}

std::string slug(const std::string& text) {
  std::string out;
  for (unsigned char c : lower(text)) {
    if (std::isalnum(c)) {
      out.push_back(static_cast<char>(c));
    } else if (!out.empty() && out.back() != '_') {
      out.push_back('_');
    }
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out;
}

class Grammar {
 public:
  explicit Grammar(const SceneSnapshot& snap) : snap_(snap) {}

  ActionList run(std::string_view command) {
    for (const auto& clause : split_clauses(command)) parse_clause(clause);
    if (out_.empty()) unrecognized(std::string(command));
    return std::move(out_);
  }

 private:
  [[noreturn]] static void unrecognized(const std::string& clause) {
    throw ParseFailure("Unrecognized", "unrecognized clause: '" + clause + "'", clause, "grammar");
  }

  // Recognized material word in the canonical short form ("wooden" -> "wood").
  std::optional<std::string> material_word(const std::string& w) const {
    static const std::map<std::string, std::string> kAliases = {
        {"wooden", "wood"}, {"metallic", "metal"}, {"steel", "metal"}, {"iron", "metal"},
        {"aluminum", "metal"}, {"glazed", "glass"}, {"stone", "marble"}};
    std::string l = lower(w);
    if (auto it = kAliases.find(l); it != kAliases.end()) l = it->second;
    for (const auto& m : snap_.materials) {
      if (m == "itu_" + l || m == l) return l.rfind("itu_", 0) == 0 ? l.substr(4) : l;
    }
    return std::nullopt;
  }

  std::string material_value(const std::string& text) const {
    const std::string t = trim(text);
    if (auto m = material_word(t)) return *m;
    return slug(t).empty() ? t : slug(t);
  }

  std::string ref(const std::string& raw) {
    static const regex article(R"(^(?:the|a|an)\s+)", kFlags);
    static const regex wall(R"(^(north|south|east|west)(?:ern)?\s+wall$)", kFlags);
    std::string t = std::regex_replace(trim(raw), article, "");
    const std::string l = lower(t);
    if (l == "it" || l == "them" || l == "that" || l == "this" || l == "those" || l == "these") {
      if (last_ref_.empty()) unrecognized(raw);
      return last_ref_;
    }
    std::string result;
    smatch m;
    if (!t.empty() && t.front() == '#') {
      result = t;
    } else if (std::regex_match(t, m, wall)) {
      result = "wall_" + lower(m[1].str());
    } else {
      for (const auto& o : snap_.objects) {
        if (lower(o.name) == l) result = o.name;
      }
    }
    if (result.empty()) {
      const std::string s = slug(t);
      const std::string one = singular(s);
      for (auto it = local_types_.rbegin(); it != local_types_.rend() && result.empty(); ++it) {
        if (it->first == s || it->first == one) result = "#" + it->second;
      }
      for (auto it = snap_.objects.rbegin(); it != snap_.objects.rend() && result.empty(); ++it) {
        if (!it->room_element && (it->object_type == s || it->object_type == one)) result = it->name;
      }
      // Left unresolved on purpose: reference validation reports it.
      if (result.empty()) result = s.empty() ? t : s;
    }
    last_ref_ = result;
    return result;
  }

  static std::optional<SpatialRelation> relation_word(const std::string& w) {
    static const std::vector<std::pair<regex, SpatialRelation>> kTable = {
        {regex(R"(on\s+top\s+of|onto|on)", kFlags), SpatialRelation::kOnTopOf},
        {regex(R"(underneath|beneath|below|under)", kFlags), SpatialRelation::kUnder},
        {regex(R"((?:to\s+the\s+)?left\s+of)", kFlags), SpatialRelation::kLeftOf},
        {regex(R"((?:to\s+the\s+)?right\s+of)", kFlags), SpatialRelation::kRightOf},
        {regex(R"(in\s+front\s+of)", kFlags), SpatialRelation::kInFrontOf},
        {regex(R"(behind)", kFlags), SpatialRelation::kBehind},
        {regex(R"(next\s+to|beside)", kFlags), SpatialRelation::kNextTo},
        {regex(R"(inside|into|in)", kFlags), SpatialRelation::kInside},
    };
    for (const auto& [re, rel] : kTable) {
      if (std::regex_match(w, re)) return rel;
    }
    return std::nullopt;
  }

  // "the center of the room", "the north wall", ... as a room relation.
  static std::optional<SpatialRelation> room_place(const std::string& text) {
    static const regex center(R"(^(?:(?:in|at|to)\s+)?the\s+(?:center|centre|middle)(?:\s+of\s+the\s+room)?$)", kFlags);
    static const regex wall(R"(^(?:(?:against|to|by|along)\s+)?the\s+(north|south|east|west)(?:ern)?\s+wall$)", kFlags);
    smatch m;
    const std::string t = trim(text);
    if (std::regex_match(t, center)) return SpatialRelation::kCenterOfRoom;
    if (std::regex_match(t, m, wall)) {
      const std::string d = lower(m[1].str());
      if (d == "north") return SpatialRelation::kAgainstWallNorth;
      if (d == "south") return SpatialRelation::kAgainstWallSouth;
      if (d == "east") return SpatialRelation::kAgainstWallEast;
      return SpatialRelation::kAgainstWallWest;
    }
    return std::nullopt;
  }

  void emit(Action a) { out_.push_back(std::move(a)); }

  bool setup_room(const std::string& c) {
    static const regex re(R"(^(?:setup|set\s+up|create|make|build|add)\s+(?:a|an|the)\s+(?:room\s+(?:of\s+(?:size\s+)?|sized\s+|with\s+(?:a\s+)?size\s+(?:of\s+)?)?()" TRIPLE R"()|()" TRIPLE R"()\s*room)$)",
                          kFlags);
    smatch m;
    if (!std::regex_match(c, m, re)) return false;
    Action a;
    a.action_type = ActionType::kSetupRoom;
    a.room_size = parse_triple(m[1].matched ? m[1].str() : m[2].str());
    emit(std::move(a));
    return true;
  }

  bool clear(const std::string& c) {
    static const regex re(R"(^(?:(?:clear|reset|empty|wipe)(?:\s+the)?\s+scene|(?:delete|remove)\s+(?:everything|all\s+objects))$)", kFlags);
    if (!std::regex_match(c, re)) return false;
    Action a;
    a.action_type = ActionType::kClearScene;
    emit(std::move(a));
    local_types_.clear();
    last_ref_.clear();
    return true;
  }

  bool create(const std::string& c) {
    static const regex verb(R"(^(create|add|put|place|make|insert|spawn|generate|build)\s+(.+)$)", kFlags);
    static const regex library(R"(\s+from\s+(?:the\s+)?(?:asset\s+)?library\b)", kFlags);
    static const regex size(R"(\s+(?:of\s+size|sized|with\s+(?:a\s+)?size(?:\s+of)?|size)\s+()" TRIPLE R"())", kFlags);
    static const regex rot(R"(\s+rotated\s+(?:by\s+)?()" NUM R"())" DEGREES R"((?:\s+)" AXIS R"()?)", kFlags);
    static const regex made(R"(\s+made\s+(?:of|from)\s+([a-z_]+)(?=\s|$))", kFlags);
    static const regex at(R"(\s+at\s+(?:position\s+|location\s+)?()" TRIPLE R"())", kFlags);
    static const regex room(R"(\s+((?:in|at)\s+the\s+(?:center|centre|middle)(?:\s+of\s+the\s+room)?|against\s+the\s+(?:north|south|east|west)(?:ern)?\s+wall)$)", kFlags);
    static const regex rel(R"(\s+)" REL_WORDS R"(\s+(.+)$)", kFlags);

    smatch m;
    if (!std::regex_match(c, m, verb)) return false;
    const bool generate = lower(m[1].str()) == "generate";
    std::string rest = " " + m[2].str();
    Action a;

    auto take = [&](const regex& re, auto&& on_match) {
      smatch mm;
      if (std::regex_search(rest, mm, re)) {
        on_match(mm);
        rest = mm.prefix().str() + " " + mm.suffix().str();
        return true;
      }
      return false;
    };
    const bool from_library = take(library, [](const smatch&) {});
    take(size, [&](const smatch& mm) { a.size = parse_triple(mm[1].str()); });
    take(rot, [&](const smatch& mm) {
      Vec3 r = Vec3::Zero();
      const std::string ax = mm[2].matched ? lower(mm[2].str()) : "z";
      r[ax[0] - 'x'] = std::stod(mm[1].str());
      a.rotation_deg = r;
    });
    take(at, [&](const smatch& mm) { a.position = parse_triple(mm[1].str()); });
    if (!take(room, [&](const smatch& mm) { a.relation = room_place(mm[1].str()); })) {
      take(rel, [&](const smatch& mm) {
        a.relation = relation_word(mm[1].str());
        pending_ref_ = mm[2].str();
      });
    }
    smatch mm;
    if (std::regex_search(rest, mm, made) && material_word(mm[1].str())) {
      a.material = *material_word(mm[1].str());
      rest = mm.prefix().str() + " " + mm.suffix().str();
    }

    auto ws = words(rest);
    long long qty = 1;
    if (!ws.empty()) {
      if (auto q = count_word(ws.front())) {
        qty = *q;
        ws.erase(ws.begin());
      }
    }
    if (!ws.empty() && lower(ws.front()) == "of") ws.erase(ws.begin());
    std::vector<std::string> type_words;
    for (const auto& w : ws) {
      if (!a.material && !from_library) {
        if (auto mat = material_word(w)) {
          a.material = *mat;
          continue;
        }
      }
      type_words.push_back(lower(w));
    }
    if (type_words.empty() || qty < 1) {
      pending_ref_.clear();
      return false;
    }
    if (qty > 1 && !from_library) type_words.back() = singular(type_words.back());

    std::string type;
    for (const auto& w : type_words) type += (type.empty() ? "" : (from_library ? " " : "_")) + w;

    a.action_type = from_library ? ActionType::kCreateObjectFromLibrary
                    : a.relation ? ActionType::kCreateObjectRelative
                                 : ActionType::kCreateObjectAbsolute;
    a.object_type = type;
    a.quantity = qty;
    if (generate) a.source = AssetSource::kGenerate;
    if (!pending_ref_.empty()) {
      const std::string r = pending_ref_;
      pending_ref_.clear();
      a.reference_name = ref(r);
    }
    const std::string id = std::to_string(next_id_++);
    a.local_id = id;
    local_types_.emplace_back(slug(type), id);
    if (from_library) local_types_.emplace_back(slug(type_words.back()), id);
    last_ref_ = "#" + id;
    emit(std::move(a));
    return true;
  }

  bool move(const std::string& c) {
    static const regex re(
        R"(^(?:move|shift|translate|slide|push|bring)\s+(.+?)\s+()"
        R"(to\s+the\s+left\s+of|to\s+the\s+right\s+of|on\s+top\s+of|in\s+front\s+of|next\s+to|left\s+of|right\s+of|)"
        R"(by|to|up|down|left|right|north|south|east|west|forwards?|backwards?|back|onto|on|underneath|beneath|below|under|)"
        R"(behind|beside|inside|into|in|against)\b\s*(.*)$)",
        kFlags);
    static const regex amount(R"(^(?:by\s+)?()" NUM R"()(?:\s*(?:m|meters?|metres?)\b)?$)", kFlags);
    static const regex triple("^" TRIPLE "$", kFlags);
    smatch m;
    if (!std::regex_match(c, m, re)) return false;
    const std::string kw = lower(m[2].str());
    const std::string rest = trim(m[3].str());
    Action a;
    a.object_name = ref(m[1].str());

    static const std::map<std::string, Vec3> kDirs = {
        {"up", Vec3::UnitZ()},     {"down", -Vec3::UnitZ()},     {"left", -Vec3::UnitX()},
        {"right", Vec3::UnitX()},  {"east", Vec3::UnitX()},      {"west", -Vec3::UnitX()},
        {"north", Vec3::UnitY()},  {"south", -Vec3::UnitY()},    {"forward", -Vec3::UnitY()},
        {"forwards", -Vec3::UnitY()}, {"back", Vec3::UnitY()},   {"backward", Vec3::UnitY()},
        {"backwards", Vec3::UnitY()}};
    smatch mm;
    if (kw == "by") {
      if (!std::regex_match(rest, triple)) return false;
      a.action_type = ActionType::kMoveObjectOffset;
      a.offset = parse_triple(rest);
    } else if (auto d = kDirs.find(kw); d != kDirs.end()) {
      if (!std::regex_match(rest, mm, amount)) return false;
      a.action_type = ActionType::kMoveObjectOffset;
      a.offset = d->second * std::stod(mm[1].str());
    } else if (kw == "to" || kw == "against") {
      if (std::regex_match(rest, triple)) {
        a.action_type = ActionType::kMoveObjectAbsolute;
        a.position = parse_triple(rest);
      } else if (auto r = room_place(kw == "against" ? "against " + rest : rest)) {
        a.action_type = ActionType::kMoveObjectRelative;
        a.relation = r;
      } else {
        return false;
      }
    } else if (auto r = relation_word(kw)) {
      if (rest.empty()) return false;
      a.action_type = ActionType::kMoveObjectRelative;
      a.relation = r;
      if (auto room = room_place(kw + " " + rest)) {
        a.relation = room;
      } else {
        const std::string subject = *a.object_name;
        a.reference_name = ref(rest);
        last_ref_ = subject;
      }
    } else {
      return false;
    }
    emit(std::move(a));
    return true;
  }

  bool rotate(const std::string& c) {
    static const regex before(R"(^(?:rotate|turn|spin)\s+(.+?)\s+(?:)" AXIS R"(\s+)?(?:by\s+)?()" NUM R"())" DEGREES "$",
                              kFlags);
    static const regex after(R"(^(?:rotate|turn|spin)\s+(.+?)\s+(?:by\s+)?()" NUM R"())" DEGREES R"(\s+)" AXIS "$",
                             kFlags);
    smatch m;
    std::string name, axis = "z", angle;
    if (std::regex_match(c, m, after)) {
      name = m[1].str();
      angle = m[2].str();
      axis = lower(m[3].str());
    } else if (std::regex_match(c, m, before)) {
      name = m[1].str();
      if (m[2].matched) axis = lower(m[2].str());
      angle = m[3].str();
    } else {
      return false;
    }
    Action a;
    a.action_type = ActionType::kRotateObject;
    a.object_name = ref(name);
    Vec3 r = Vec3::Zero();
    r[axis[0] - 'x'] = std::stod(angle);
    a.rotation_deg = r;
    emit(std::move(a));
    return true;
  }

  bool resize(const std::string& c) {
    static const regex re(R"(^(?:resize|set\s+the\s+size\s+of|change\s+the\s+size\s+of)\s+(.+?)\s+to\s+(?:be\s+)?()" TRIPLE R"()$)", kFlags);
    smatch m;
    if (!std::regex_match(c, m, re)) return false;
    Action a;
    a.action_type = ActionType::kResizeObject;
    a.object_name = ref(m[1].str());
    a.size = parse_triple(m[2].str());
    emit(std::move(a));
    return true;
  }

  bool scale(const std::string& c) {
    static const regex by(R"(^(?:scale|enlarge|shrink|grow)\s+(.+?)\s+by\s+(?:a\s+factor\s+of\s+)?()" NUM R"()\s*x?$)", kFlags);
    static const regex dbl(R"(^(double|halve)\s+the\s+size\s+of\s+(.+)$)", kFlags);
    static const regex times(R"(^make\s+(.+?)\s+()" NUM R"()\s+times\s+(?:bigger|larger)$)", kFlags);
    static const regex twice(R"(^make\s+(.+?)\s+(twice|half)\s+as\s+(?:big|large)$)", kFlags);
    smatch m;
    std::string name;
    double f = 0;
    if (std::regex_match(c, m, by) || std::regex_match(c, m, times)) {
      name = m[1].str();
      f = std::stod(m[2].str());
    } else if (std::regex_match(c, m, dbl)) {
      name = m[2].str();
      f = lower(m[1].str()) == "double" ? 2.0 : 0.5;
    } else if (std::regex_match(c, m, twice)) {
      name = m[1].str();
      f = lower(m[2].str()) == "twice" ? 2.0 : 0.5;
    } else {
      return false;
    }
    if (!(f > 0)) return false;
    Action a;
    a.action_type = ActionType::kScaleObject;
    a.object_name = ref(name);
    a.scale_factor = f;
    emit(std::move(a));
    return true;
  }

  bool remove(const std::string& c) {
    static const regex re(R"(^(?:delete|remove|erase|destroy|get\s+rid\s+of)\s+(.+)$)", kFlags);
    smatch m;
    if (!std::regex_match(c, m, re)) return false;
    Action a;
    a.action_type = ActionType::kDeleteObject;
    a.object_name = ref(m[1].str());
    emit(std::move(a));
    return true;
  }

  bool material(const std::string& c) {
    static const regex of(R"(^(?:change|set|switch)\s+(?:the\s+)?material\s+of\s+(.+?)\s+to\s+(.+)$)", kFlags);
    static const regex owned(R"(^(?:change|set|switch)\s+(.+?)(?:'s)?\s+material\s+to\s+(.+)$)", kFlags);
    static const regex make(R"(^(?:make|paint)\s+(the\s+.+?|#\d+|it|them|\S+\.\d{3})\s+(\S+)$)", kFlags);
    smatch m;
    std::string name, mat;
    if (std::regex_match(c, m, of) || std::regex_match(c, m, owned)) {
      name = m[1].str();
      mat = material_value(m[2].str());
    } else if (std::regex_match(c, m, make) && material_word(m[2].str())) {
      name = m[1].str();
      mat = *material_word(m[2].str());
    } else {
      return false;
    }
    Action a;
    a.action_type = ActionType::kChangeObjectMaterial;
    a.object_name = ref(name);
    a.material = mat;
    emit(std::move(a));
    return true;
  }

  bool rename(const std::string& c) {
    static const regex re(R"(^rename\s+(.+?)\s+(?:to|as)\s+(\S+)$)", kFlags);
    smatch m;
    if (!std::regex_match(c, m, re)) return false;
    Action a;
    a.action_type = ActionType::kRenameObject;
    a.object_name = ref(m[1].str());
    a.new_name = m[2].str();
    last_ref_ = *a.new_name;
    emit(std::move(a));
    return true;
  }

  bool duplicate(const std::string& c) {
    static const regex re(R"(^(?:duplicate|copy|clone)\s+(.+?)(?:\s+(?:as|named|and\s+call\s+it)\s+(\S+))?(?:\s+(?:by|with\s+offset|offset\s+by|at\s+offset)\s+()" TRIPLE R"())?$)",
                          kFlags);
    smatch m;
    if (!std::regex_match(c, m, re)) return false;
    Action a;
    a.action_type = ActionType::kDuplicateObject;
    a.object_name = ref(m[1].str());
    if (m[2].matched) a.new_name = m[2].str();
    if (m[3].matched) a.offset = parse_triple(m[3].str());
    if (a.new_name) last_ref_ = *a.new_name;
    emit(std::move(a));
    return true;
  }

  bool align(const std::string& c) {
    static const regex re(R"(^align\s+(.+?)\s+(?:with|to)\s+(.+?)(?:\s+(?:along|on)\s+(?:the\s+)?([xyz])(?:[- ]?axis)?)?$)", kFlags);
    smatch m;
    if (!std::regex_match(c, m, re)) return false;
    Action a;
    a.action_type = ActionType::kAlignObjects;
    a.object_name = ref(m[1].str());
    const std::string subject = *a.object_name;
    a.reference_name = ref(m[2].str());
    a.axis = axis_from_string(m[3].matched ? lower(m[3].str()) : "x");
    last_ref_ = subject;
    emit(std::move(a));
    return true;
  }

  void parse_clause(const std::string& clause) {
    const std::size_t before = out_.size();
    const auto saved_ref = last_ref_;
    const auto saved_types = local_types_;
    const int saved_id = next_id_;
    using Rule = bool (Grammar::*)(const std::string&);
    constexpr Rule kRules[] = {&Grammar::setup_room, &Grammar::clear,  &Grammar::material, &Grammar::scale,
                               &Grammar::create,     &Grammar::move,   &Grammar::rotate,   &Grammar::resize,
                               &Grammar::remove,     &Grammar::rename, &Grammar::duplicate, &Grammar::align};
    for (Rule rule : kRules) {
      if ((this->*rule)(clause)) return;
      // A rule that bailed out must not leave partial state behind.
      out_.resize(before);
      last_ref_ = saved_ref;
      local_types_ = saved_types;
      next_id_ = saved_id;
    }
    unrecognized(clause);
  }

  const SceneSnapshot& snap_;
  ActionList out_;
  int next_id_ = 1;
  std::vector<std::pair<std::string, std::string>> local_types_;  // (type slug, local id)
  std::string last_ref_;
  std::string pending_ref_;
};

}  // namespace

std::vector<std::string> split_clauses(std::string_view command) {
  std::vector<std::string> pieces;
  std::string cur;
  const std::string text(command);
  auto prev_non_space = [&](std::size_t i) -> char {
    while (i > 0) {
      if (!std::isspace(static_cast<unsigned char>(text[i - 1]))) return text[i - 1];
      --i;
    }
    return '\0';
  };
  auto next_non_space = [&](std::size_t i) -> char {
    for (++i; i < text.size(); ++i) {
      if (!std::isspace(static_cast<unsigned char>(text[i]))) return text[i];
    }
    return '\0';
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == ';' || c == ',') {
      const char p = prev_non_space(i), n = next_non_space(i);
      const bool numeric = c == ',' && std::isdigit(static_cast<unsigned char>(p)) &&
                           (std::isdigit(static_cast<unsigned char>(n)) || n == '-' || n == '.');
      if (!numeric) {
        pieces.push_back(cur);
        cur.clear();
        continue;
      }
    }
    cur.push_back(c);
  }
  pieces.push_back(cur);

  static const regex then(R"(\s+(?:and\s+)?then\s+|\s+and\s+(?=)" VERBS R"(\b))", kFlags);
  static const regex lead(R"(^(?:and\s+)?(?:then\s+)?(?:please\s+)?)", kFlags);
  static const regex tail(R"([\s.!?]+$)");
  std::vector<std::string> out;
  for (const auto& p : pieces) {
    const std::string padded = " " + p + " ";
    for (auto it = std::sregex_token_iterator(padded.begin(), padded.end(), then, -1);
         it != std::sregex_token_iterator(); ++it) {
      std::string s = std::regex_replace(trim(it->str()), lead, "");
      s = trim(std::regex_replace(s, tail, ""));
      if (!s.empty()) out.push_back(std::move(s));
    }
  }
  return out;
}

ActionList fallback_parse(const SceneSnapshot& snapshot, std::string_view command) {
  return Grammar(snapshot).run(command);
}

}  // namespace scenesmith
