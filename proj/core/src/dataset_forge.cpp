#include "scenesmith/dataset_forge.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <unordered_set>

namespace scenesmith {

namespace {

constexpr std::array<std::string_view, 4> kSceneNames = {"none", "few", "some", "many"};
constexpr std::array<std::string_view, 3> kCommandNames = {"simple", "medium", "complex"};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string fmt_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  std::string s = buf;
  while (s.back() == '0') s.pop_back();
  if (s.back() == '.') s.pop_back();
  return s == "-0" ? "0" : s;
}

std::string percent(double rate) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", rate * 100.0);
  return buf;
}

double round4(double v) { return std::round(v * 1e4) / 1e4; }

// Every fenced block in order; an unterminated fence ends the scan.
std::vector<std::string> fenced_blocks(std::string_view reply) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const auto open = reply.find("```", pos);
    if (open == std::string_view::npos) break;
    const auto close = reply.find("```", open + 3);
    if (close == std::string_view::npos) break;
    auto body = reply.find('\n', open + 3);
    body = body < close ? body + 1 : open + 3;
    out.push_back(trim(reply.substr(body, close - body)));
    pos = close + 3;
  }
  return out;
}

std::string type_of_name(const std::string& name) {
  const auto dot = name.rfind('.');
  return dot == std::string::npos ? name : name.substr(0, dot);
}

// ---------------------------------------------------------------------------
// Offline sample synthesis

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  std::size_t below(std::size_t n) { return n == 0 ? 0 : static_cast<std::size_t>(engine_() % n); }
  std::size_t between(std::size_t lo, std::size_t hi) { return lo + below(hi - lo + 1); }
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  // Multiple of 0.5 in [lo, hi].
  double half_steps(double lo, double hi) {
    const auto steps = static_cast<std::size_t>(std::llround((hi - lo) * 2));
    return lo + 0.5 * static_cast<double>(below(steps + 1));
  }
  template <class C>
  const auto& pick(const C& c) {
    return c[below(c.size())];
  }

 private:
  std::mt19937_64 engine_;
};

constexpr std::array<std::string_view, 12> kTypes = {"table", "chair", "desk",  "sofa",  "bookshelf", "cabinet",
                                                     "lamp",  "bed",   "shelf", "plant", "monitor",   "bench"};
constexpr std::array<std::string_view, 8> kMaterialWords = {"wood",     "metal",    "glass",        "marble",
                                                            "concrete", "chipboard", "plasterboard", "brick"};
constexpr std::array<std::string_view, 7> kRelationPhrases = {"on",     "next to", "to the left of", "to the right of",
                                                              "behind", "under",   "in front of"};
constexpr std::array<std::string_view, 6> kLibraryDescriptions = {
    "vase with a wide base", "tall narrow bookcase",  "office chair with wheels",
    "round dining table",    "large potted fern",    "two seat leather couch"};
constexpr std::array<std::string_view, 4> kWalls = {"north", "south", "east", "west"};
constexpr std::array<std::string_view, 6> kCountWords = {"two", "three", "four", "2", "3", "5"};

std::string plural(std::string_view t) {
  std::string s(t);
  if (s.back() == 'h' || s.back() == 'x') return s + "es";
  if (s.back() == 'f') return s + "s";
  return s + "s";
}

struct Draft {
  std::vector<ExistingObject> scene;
  std::vector<std::string> clauses;
  std::vector<std::string> tail;  // delete / clear go last
  std::vector<std::string> local_types;
  int name_counter = 0;
};

class SampleSynth {
 public:
  SampleSynth(Rng& rng, SceneComplexity sc, CommandComplexity cc) : rng_(rng), sc_(sc), cc_(cc) {}

  Draft draft(ActionType required) {
    Draft d;
    std::size_t n_scene = 0;
    switch (sc_) {
      case SceneComplexity::kNone: n_scene = 0; break;
      case SceneComplexity::kFew: n_scene = rng_.between(1, 3); break;
      case SceneComplexity::kSome: n_scene = rng_.between(4, 7); break;
      case SceneComplexity::kMany: n_scene = rng_.between(8, 12); break;
    }
    std::map<std::string, int> counts;
    for (std::size_t i = 0; i < n_scene; ++i) {
      const std::string t(rng_.pick(kTypes));
      char suffix[16];
      std::snprintf(suffix, sizeof suffix, ".%03d", ++counts[t]);
      d.scene.push_back({t + suffix, t});
    }
    std::size_t n_clauses = 1;
    if (cc_ == CommandComplexity::kMedium) n_clauses = 2;
    if (cc_ == CommandComplexity::kComplex) n_clauses = rng_.between(3, 4);

    clause(d, required);
    static constexpr std::array<ActionType, 9> kFillers = {
        ActionType::kCreateObjectRelative, ActionType::kCreateObjectAbsolute, ActionType::kMoveObjectOffset,
        ActionType::kRotateObject,         ActionType::kChangeObjectMaterial, ActionType::kScaleObject,
        ActionType::kMoveObjectRelative,   ActionType::kDuplicateObject,      ActionType::kResizeObject};
    while (d.clauses.size() + d.tail.size() < n_clauses) clause(d, rng_.pick(kFillers));
    return d;
  }

 private:
  std::string num(double lo, double hi) { return fmt_number(rng_.half_steps(lo, hi)); }

  std::string new_type(const Draft& d) {
    for (int tries = 0; tries < 8; ++tries) {
      std::string t(rng_.pick(kTypes));
      if (std::find(d.local_types.begin(), d.local_types.end(), t) == d.local_types.end()) return t;
    }
    return std::string(rng_.pick(kTypes));
  }

  std::string add_object(Draft& d) {
    const std::string t = new_type(d);
    d.clauses.push_back("add a " + t);
    d.local_types.push_back(t);
    return "the " + t;
  }

  // A phrase naming an object: a scene name, an earlier creation, or a
  // freshly added one.
  std::string target(Draft& d, const std::string& avoid = {}) {
    std::vector<std::string> options;
    for (const auto& o : d.scene) options.push_back(o.name);
    for (const auto& t : d.local_types) options.push_back("the " + t);
    options.erase(std::remove(options.begin(), options.end(), avoid), options.end());
    if (options.empty() || (avoid.empty() && rng_.below(5) == 0 && d.scene.empty())) return add_object(d);
    return rng_.pick(options);
  }

  void clause(Draft& d, ActionType type) {
    auto& out = d.clauses;
    switch (type) {
      case ActionType::kSetupRoom:
        out.insert(out.begin(), "set up a " + num(3, 12) + " x " + num(3, 10) + " x " + num(2.5, 4) + " room");
        return;
      case ActionType::kCreateObjectAbsolute: {
        const std::string t = new_type(d);
        std::string c = "add a " + std::string(rng_.pick(kMaterialWords)) + " " + t;
        if (rng_.below(2)) c = "add a " + t + " made of " + std::string(rng_.pick(kMaterialWords));
        c += " at (" + num(-4, 4) + ", " + num(-4, 4) + ", 0)";
        out.push_back(c);
        d.local_types.push_back(t);
        return;
      }
      case ActionType::kCreateObjectRelative: {
        const std::string t = new_type(d);
        const std::size_t form = rng_.below(3);
        if (form == 0) {
          out.push_back("add a " + t + " in the center of the room");
        } else if (form == 1) {
          out.push_back("place a " + t + " against the " + std::string(rng_.pick(kWalls)) + " wall");
        } else {
          const std::string ref = target(d);
          const bool many = rng_.below(2) == 1;
          const std::string what = many ? std::string(rng_.pick(kCountWords)) + " " + plural(t) : "a " + t;
          out.push_back("put " + what + " " + std::string(rng_.pick(kRelationPhrases)) + " " + ref);
        }
        d.local_types.push_back(t);
        return;
      }
      case ActionType::kCreateObjectFromLibrary:
        out.push_back("add a " + std::string(rng_.pick(kLibraryDescriptions)) + " from the library");
        return;
      case ActionType::kMoveObjectAbsolute: {
        const std::string t = target(d);
        out.push_back("move " + t + " to (" + num(-4, 4) + ", " + num(-4, 4) + ", 0)");
        return;
      }
      case ActionType::kMoveObjectOffset: {
        const std::string t = target(d);
        if (rng_.below(2)) {
          out.push_back("move " + t + " by (" + num(-2, 2) + ", " + num(-2, 2) + ", 0)");
        } else {
          static constexpr std::array<std::string_view, 6> kDirs = {"left", "right", "north", "south", "up", "east"};
          out.push_back("move " + t + " " + std::string(rng_.pick(kDirs)) + " by " + num(0.5, 3));
        }
        return;
      }
      case ActionType::kMoveObjectRelative: {
        const std::string t = target(d);
        if (rng_.below(3) == 0) {
          out.push_back("move " + t + " against the " + std::string(rng_.pick(kWalls)) + " wall");
        } else {
          const std::string r = target(d, t);
          static constexpr std::array<std::string_view, 4> kMoveRel = {"next to", "to the left of", "behind",
                                                                       "on top of"};
          out.push_back("move " + t + " " + std::string(rng_.pick(kMoveRel)) + " " + r);
        }
        return;
      }
      case ActionType::kRotateObject: {
        static constexpr std::array<std::string_view, 6> kAngles = {"15", "30", "45", "90", "180", "-90"};
        out.push_back("rotate " + target(d) + " by " + std::string(rng_.pick(kAngles)) + " degrees");
        return;
      }
      case ActionType::kResizeObject:
        out.push_back("resize " + target(d) + " to " + num(0.5, 2) + " x " + num(0.5, 2) + " x " + num(0.5, 2));
        return;
      case ActionType::kScaleObject: {
        static constexpr std::array<std::string_view, 4> kFactors = {"0.5", "1.5", "2", "3"};
        out.push_back("scale " + target(d) + " by " + std::string(rng_.pick(kFactors)));
        return;
      }
      case ActionType::kDeleteObject:
        d.tail.insert(d.tail.begin(), "delete " + target(d));
        return;
      case ActionType::kChangeObjectMaterial:
        out.push_back("change the material of " + target(d) + " to " + std::string(rng_.pick(kMaterialWords)));
        return;
      case ActionType::kDuplicateObject: {
        const std::string t = target(d);
        if (rng_.below(2)) {
          out.push_back("duplicate " + t);
        } else {
          out.push_back("duplicate " + t + " by (" + num(-2, 2) + ", " + num(-2, 2) + ", 0)");
        }
        return;
      }
      case ActionType::kRenameObject: {
        const std::string t = target(d);
        out.push_back("rename " + t + " to item_" + std::to_string(++d.name_counter));
        return;
      }
      case ActionType::kAlignObjects: {
        const std::string t = target(d);
        const std::string r = target(d, t);
        static constexpr std::array<char, 2> kAxes = {'x', 'y'};
        out.push_back("align " + t + " with " + r + " along the " + std::string(1, rng_.pick(kAxes)) + " axis");
        return;
      }
      case ActionType::kClearScene:
        d.tail.push_back("clear the scene");
        return;
    }
  }

  Rng& rng_;
  SceneComplexity sc_;
  CommandComplexity cc_;
};

std::string join_command(const Draft& d) {
  std::vector<std::string> all = d.clauses;
  all.insert(all.end(), d.tail.begin(), d.tail.end());
  std::string out;
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (i == 0) {
      out = all[i];
      out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
    } else {
      out += (i + 1 == all.size() ? ", then " : ", ") + all[i];
    }
  }
  return out;
}

nlohmann::json existing_json(const std::vector<ExistingObject>& objs) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& o : objs) arr.push_back({{"name", o.name}, {"object_type", o.object_type}});
  return arr;
}

std::string fence(const std::string& body) { return "```json\n" + body + "\n```"; }

// Applies one corruption to a well-formed sample document.
std::string corrupt(Rng& rng, nlohmann::json doc, const std::vector<std::string>& earlier) {
  auto& actions = doc["actions"];
  auto first_creation = [&]() -> nlohmann::json* {
    for (auto& a : actions) {
      if (a.contains("local_id")) return &a;
    }
    return nullptr;
  };
  switch (rng.below(7)) {
    case 0: {
      const std::string s = doc.dump(2);
      return s.substr(0, s.size() - std::min<std::size_t>(s.size(), 7));
    }
    case 1:
      // Sparse local ids: the format stage can renumber these.
      for (auto& a : actions) {
        if (a.contains("local_id")) a["local_id"] = std::to_string(std::stoi(a["local_id"].get<std::string>()) * 2);
        for (const char* key : {"object_name", "reference_name"}) {
          if (a.contains(key) && a[key].is_string()) {
            const std::string v = a[key];
            if (!v.empty() && v[0] == '#') a[key] = "#" + std::to_string(std::stoi(v.substr(1)) * 2);
          }
        }
      }
      return doc.dump(2);
    case 2:
      actions.push_back({{"action_type", "delete_object"}, {"object_name", "ghost.042"}});
      return doc.dump(2);
    case 3:
      if (auto* a = first_creation()) {
        (*a)["quantity"] = 2.5;
        return doc.dump(2);
      }
      [[fallthrough]];
    case 4:
      actions[0]["confidence"] = 0.9;
      return doc.dump(2);
    case 5:
      if (!earlier.empty()) return earlier.back();
      return doc.dump(2).substr(0, 10);
    default:
      actions.push_back({{"action_type", "clear_scene"}});
      return doc.dump(2);
  }
}

std::string prompt_value(const std::string& prompt, const std::string& key) {
  const std::string tag = "\n" + key + ": ";
  const auto p = prompt.find(tag);
  if (p == std::string::npos) return {};
  const auto start = p + tag.size();
  return trim(prompt.substr(start, prompt.find('\n', start) - start));
}

}  // namespace

std::string_view to_string(SceneComplexity c) { return kSceneNames[static_cast<std::size_t>(c)]; }
std::string_view to_string(CommandComplexity c) { return kCommandNames[static_cast<std::size_t>(c)]; }

std::optional<SceneComplexity> scene_complexity_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kSceneNames.size(); ++i) {
    if (kSceneNames[i] == s) return static_cast<SceneComplexity>(i);
  }
  return std::nullopt;
}

std::optional<CommandComplexity> command_complexity_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kCommandNames.size(); ++i) {
    if (kCommandNames[i] == s) return static_cast<CommandComplexity>(i);
  }
  return std::nullopt;
}

SceneSnapshot snapshot_of(const std::vector<ExistingObject>& objects) {
  static const SceneSnapshot kEmpty = Scene().snapshot();
  SceneSnapshot s = kEmpty;
  for (const auto& o : objects) {
    ObjectSummary summary;
    summary.name = o.name;
    summary.object_type = o.object_type.empty() ? type_of_name(o.name) : o.object_type;
    s.objects.push_back(std::move(summary));
  }
  return s;
}

nlohmann::json to_json(const DatasetSample& s) {
  return {{"command", s.command},
          {"existing_objects", existing_json(s.existing_objects)},
          {"actions", to_json(s.gold_actions)},
          {"provenance",
           {{"generator", s.generator_id},
            {"trial", s.trial},
            {"index", s.index},
            {"resequenced", s.resequenced},
            {"semantic", s.semantic},
            {"semantic_reason", s.semantic_reason}}}};
}

DatasetSample dataset_sample_from_json(const nlohmann::json& j) {
  try {
    DatasetSample s;
    s.command = j.at("command").get<std::string>();
    for (const auto& o : j.at("existing_objects")) {
      s.existing_objects.push_back({o.at("name").get<std::string>(), o.value("object_type", std::string())});
    }
    s.gold_actions = parse_actions_structural(j.at("actions"));
    check_local_id_sequence(s.gold_actions);
    if (j.contains("provenance")) {
      const auto& p = j["provenance"];
      s.generator_id = p.value("generator", std::string());
      s.trial = p.value("trial", std::size_t{0});
      s.index = p.value("index", std::size_t{0});
      s.resequenced = p.value("resequenced", false);
      s.semantic = p.value("semantic", std::string("pending"));
      s.semantic_reason = p.value("semantic_reason", std::string());
    }
    return s;
  } catch (const Error& e) {
    throw DatasetError("BadRecord", e.what(), e.detail());
  } catch (const nlohmann::json::exception& e) {
    throw DatasetError("BadRecord", e.what());
  }
}

ActionType required_action_for(const GenerationSpec& spec, std::size_t trial) {
  if (spec.required_action) return *spec.required_action;
  std::mt19937_64 rng(spec.seed ^ ((trial + 1) * 0x9E3779B97F4A7C15ull));
  return kAllActionTypes[static_cast<std::size_t>(rng() % kAllActionTypes.size())];
}

std::string build_generation_prompt(const GenerationSpec& spec, std::size_t trial, ActionType required) {
  std::ostringstream p;
  p << "## Role\nYou write training data for a parser that turns natural-language editing commands for an "
       "indoor 3D scene into JSON action lists.\n\n";
  p << "## Task\nWrite " << spec.samples_per_trial
    << " distinct samples. Each sample is a JSON object with \"command\" (the user's sentence), "
       "\"existing_objects\" (objects already in the scene, each {\"name\", \"object_type\"}, names like "
       "\"chair.001\") and \"actions\" (the action list the parser must produce). Put every sample in its own "
       "```json code block.\n";
  p << "The samples must include at least one " << to_string(required) << " action.\n";
  p << "Scene complexity " << to_string(spec.scene_complexity) << ": ";
  switch (spec.scene_complexity) {
    case SceneComplexity::kNone: p << "the scene is empty."; break;
    case SceneComplexity::kFew: p << "one to three existing objects."; break;
    case SceneComplexity::kSome: p << "four to seven existing objects."; break;
    case SceneComplexity::kMany: p << "eight or more existing objects."; break;
  }
  p << "\nCommand complexity " << to_string(spec.command_complexity) << ": ";
  switch (spec.command_complexity) {
    case CommandComplexity::kSimple: p << "a single instruction."; break;
    case CommandComplexity::kMedium: p << "two instructions in one sentence."; break;
    case CommandComplexity::kComplex: p << "three or more chained instructions."; break;
  }
  p << "\n\n";
  p << "## Action Rules\n"
       "Same schema as the parser: action_type plus only the fields that action needs. Creations carry "
       "local_id \"1\", \"2\", ... in order; later actions refer to them as \"#1\". Every other name must be one of "
       "existing_objects or a room element (floor, ceiling, wall_north, wall_south, wall_east, wall_west).\n\n";
  p << "## Examples\n";
  for (const auto& ex : few_shot_examples()) {
    nlohmann::json objs = nlohmann::json::array();
    for (const auto& n : ex.scene_objects) objs.push_back({{"name", n}, {"object_type", type_of_name(n)}});
    nlohmann::json sample = {{"command", ex.command},
                             {"existing_objects", objs},
                             {"actions", nlohmann::json::parse(ex.actions_json)}};
    p << fence(sample.dump()) << "\n";
  }
  p << "\n## Parameters";
  p << "\nsamples: " << spec.samples_per_trial;
  p << "\nscene_complexity: " << to_string(spec.scene_complexity);
  p << "\ncommand_complexity: " << to_string(spec.command_complexity);
  p << "\nrequired_action: " << to_string(required);
  p << "\ntrial: " << trial;
  p << "\nseed: " << spec.seed << "\n";
  return p.str();
}

GenerationResult generate(const GenerationSpec& spec, const ChatBackend& generator, const std::string& generator_id) {
  if (spec.samples_per_trial == 0) throw DatasetError("BadSpec", "samples_per_trial must be positive");
  GenerationResult result;
  const std::size_t trials = (spec.n_samples + spec.samples_per_trial - 1) / spec.samples_per_trial;
  for (std::size_t t = 0; t < trials; ++t) {
    const std::string prompt = build_generation_prompt(spec, t, required_action_for(spec, t));
    std::string reply;
    try {
      reply = generator.complete(prompt);
    } catch (const std::exception& e) {
      result.errors.push_back("trial " + std::to_string(t) + ": " + e.what());
      continue;
    }
    const auto blocks = fenced_blocks(reply);
    const std::size_t count = std::min(spec.samples_per_trial, spec.n_samples - t * spec.samples_per_trial);
    for (std::size_t i = 0; i < count; ++i) {
      result.samples.push_back({i < blocks.size() ? blocks[i] : std::string(), generator_id, t, i});
    }
  }
  return result;
}

std::string TemplateGenerator::complete(const std::string& prompt) const {
  Rng rng(fnv1a(prompt));
  const std::string n_text = prompt_value(prompt, "samples");
  const std::size_t n = n_text.empty() ? 5 : std::stoul(n_text);
  const auto sc = scene_complexity_from_string(prompt_value(prompt, "scene_complexity")).value_or(SceneComplexity::kFew);
  const auto cc =
      command_complexity_from_string(prompt_value(prompt, "command_complexity")).value_or(CommandComplexity::kMedium);
  const auto required =
      action_type_from_string(prompt_value(prompt, "required_action")).value_or(ActionType::kCreateObjectAbsolute);

  std::vector<std::string> blocks;
  for (std::size_t i = 0; i < n; ++i) {
    SampleSynth synth(rng, sc, cc);
    nlohmann::json doc;
    for (int attempt = 0; attempt < 8 && doc.is_null(); ++attempt) {
      const Draft d = synth.draft(required);
      const std::string command = join_command(d);
      try {
        const ActionList actions = fallback_parse(snapshot_of(d.scene), command);
        doc = {{"command", command}, {"existing_objects", existing_json(d.scene)}, {"actions", to_json(actions)}};
      } catch (const Error&) {
      }
    }
    if (doc.is_null()) doc = {{"command", "Clear the scene"}, {"existing_objects", nlohmann::json::array()},
                              {"actions", {{{"action_type", "clear_scene"}}}}};
    std::string body = doc.dump(2);
    if (corruption_rate_ > 0 && rng.unit() < corruption_rate_) body = corrupt(rng, doc, blocks);
    blocks.push_back(body);
  }
  std::string reply = "Here are the samples.\n\n";
  for (const auto& b : blocks) reply += fence(b) + "\n\n";
  return reply;
}

std::string ChatSemanticValidator::build_prompt(const DatasetSample& sample) {
  std::ostringstream p;
  p << "## Task\nDecide whether the action list does exactly what the command asks, given the existing scene "
       "objects. Answer PASS or FAIL on the first line, then one sentence of explanation.\n\n";
  p << "## Existing Objects\n";
  if (sample.existing_objects.empty()) p << "(none)\n";
  for (const auto& o : sample.existing_objects) p << "- " << o.name << " (" << o.object_type << ")\n";
  p << "\n## Command\n" << sample.command << "\n\n## Actions\n" << fence(serialize(sample.gold_actions, 2)) << "\n";
  return p.str();
}

Judgement ChatSemanticValidator::judge(const DatasetSample& sample) const {
  std::string reply;
  try {
    reply = chat_->complete(build_prompt(sample));
  } catch (const std::exception& e) {
    return {Verdict::kReview, std::string("validator unavailable: ") + e.what()};
  }
  std::istringstream in(reply);
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (!line.empty()) break;
  }
  std::string head;
  for (char c : line) {
    if (!std::isalpha(static_cast<unsigned char>(c))) break;
    head.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  }
  std::string rest;
  std::getline(in, rest, '\0');
  const std::string reason = trim(line.substr(head.size()) + " " + rest);
  if (head == "PASS") return {Verdict::kPass, reason};
  if (head == "FAIL") return {Verdict::kFail, reason};
  return {Verdict::kReview, "unrecognized verdict: " + line};
}

Judgement GrammarSemanticValidator::judge(const DatasetSample& sample) const {
  ActionList reading;
  try {
    reading = fallback_parse(snapshot_of(sample.existing_objects), sample.command);
  } catch (const Error& e) {
    return {Verdict::kReview, e.what()};
  }
  if (canonicalize(reading) == canonicalize(sample.gold_actions)) return {Verdict::kPass, "matches grammar reading"};
  return {Verdict::kFail, "differs from grammar reading " + serialize(reading)};
}

MetricsReport MetricsReport::from_counts(std::size_t raw, std::size_t json_valid, std::size_t format_valid,
                                         std::size_t unique, std::size_t meaning_matched) {
  MetricsReport r;
  r.raw = raw;
  r.json_valid = json_valid;
  r.format_valid = format_valid;
  r.unique = unique;
  r.meaning_matched = meaning_matched;
  auto rate = [&](std::size_t num, std::size_t den, const char* label) {
    if (den == 0) {
      r.zero_denominators.emplace_back(label);
      return 0.0;
    }
    return static_cast<double>(num) / static_cast<double>(den);
  };
  r.json_validity_rate = rate(json_valid, raw, "json_validity");
  r.format_validity_rate = rate(format_valid, json_valid, "format_validity");
  r.unique_sample_rate = rate(unique, format_valid, "unique_sample");
  r.meaning_matched_rate = rate(meaning_matched, unique, "meaning_matched");
  r.overall_usability_rate = raw == 0 ? 0.0 : static_cast<double>(meaning_matched) / static_cast<double>(raw);
  return r;
}

MetricsReport MetricsReport::from_rates(double json, double format, double unique, double meaning) {
  MetricsReport r;
  r.json_validity_rate = json;
  r.format_validity_rate = format;
  r.unique_sample_rate = unique;
  r.meaning_matched_rate = meaning;
  r.overall_usability_rate = json * format * unique * meaning;
  return r;
}

nlohmann::json to_json(const MetricsReport& r) {
  return {{"counts",
           {{"raw", r.raw},
            {"json_valid", r.json_valid},
            {"format_valid", r.format_valid},
            {"unique", r.unique},
            {"meaning_matched", r.meaning_matched},
            {"review", r.review},
            {"fixed", r.fixed}}},
          {"json_validity_rate", r.json_validity_rate},
          {"format_validity_rate", r.format_validity_rate},
          {"unique_sample_rate", r.unique_sample_rate},
          {"meaning_matched_rate", r.meaning_matched_rate},
          {"overall_usability_rate", r.overall_usability_rate},
          {"zero_denominators", r.zero_denominators}};
}

std::string format_metrics_table(const std::vector<std::pair<std::string, MetricsReport>>& rows) {
  const std::vector<std::string> header = {"Generator",     "JSON Validity",   "Format Validity",
                                           "Unique Sample", "Meaning Matched", "Overall Usability"};
  std::vector<std::vector<std::string>> cells = {header};
  for (const auto& [label, r] : rows) {
    cells.push_back({label, percent(r.json_validity_rate), percent(r.format_validity_rate),
                     percent(r.unique_sample_rate), percent(r.meaning_matched_rate),
                     percent(r.overall_usability_rate)});
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::string out;
  auto emit = [&](const std::vector<std::string>& row) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      const std::string pad(width[c] - row[c].size(), ' ');
      if (c) out += "  ";
      out += c == 0 ? row[c] + pad : pad + row[c];
    }
    out += "\n";
  };
  emit(cells[0]);
  std::size_t total = 0;
  for (auto w : width) total += w;
  out += std::string(total + 2 * (width.size() - 1), '-') + "\n";
  for (std::size_t i = 1; i < cells.size(); ++i) emit(cells[i]);
  return out;
}

std::optional<nlohmann::json> stage_json(const RawSample& raw, std::string* error) {
  try {
    return nlohmann::json::parse(raw.text);
  } catch (const nlohmann::json::parse_error& e) {
    if (error) *error = e.what();
    return std::nullopt;
  }
}

DatasetSample stage_format(const nlohmann::json& doc, const RawSample& raw) {
  if (!doc.is_object()) throw SchemaError("BadSample", "sample is not a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (key != "command" && key != "existing_objects" && key != "actions") {
      throw SchemaError("UnknownField", "unexpected sample field '" + key + "'", key);
    }
    (void)value;
  }
  if (!doc.contains("command") || !doc["command"].is_string() || trim(doc["command"].get<std::string>()).empty()) {
    throw SchemaError("BadSample", "sample needs a non-empty string command", "command");
  }
  if (!doc.contains("actions")) throw SchemaError("MissingField", "sample has no actions", "actions");

  DatasetSample s;
  s.command = doc["command"].get<std::string>();
  s.generator_id = raw.generator_id;
  s.trial = raw.trial;
  s.index = raw.index;
  if (doc.contains("existing_objects")) {
    const auto& objs = doc["existing_objects"];
    if (!objs.is_array()) throw SchemaError("WrongType", "existing_objects must be an array", "existing_objects");
    for (const auto& o : objs) {
      if (o.is_string()) {
        s.existing_objects.push_back({o.get<std::string>(), type_of_name(o.get<std::string>())});
      } else if (o.is_object() && o.contains("name") && o["name"].is_string()) {
        const std::string name = o["name"];
        std::string type = type_of_name(name);
        if (o.contains("object_type") && o["object_type"].is_string()) type = o["object_type"];
        s.existing_objects.push_back({name, type});
      } else {
        throw SchemaError("WrongType", "existing object needs a name", "existing_objects");
      }
    }
  }

  ParseOptions lenient;
  lenient.lenient_local_ids = true;
  auto resequenced = resequence_local_ids(parse_actions_structural(doc["actions"], lenient));
  check_local_id_sequence(resequenced.actions);
  std::set<std::string> names;
  for (const auto& o : snapshot_of(s.existing_objects).objects) names.insert(o.name);
  validate_reference_closure(resequenced.actions, names);
  s.gold_actions = std::move(resequenced.actions);
  s.resequenced = resequenced.changed;
  return s;
}

std::string dedup_key(const DatasetSample& s) { return s.command + '\n' + canonicalize(s.gold_actions); }

std::vector<DatasetSample> stage_dedup(const std::vector<DatasetSample>& samples) {
  std::unordered_set<std::string> seen;
  std::vector<DatasetSample> out;
  for (const auto& s : samples) {
    if (seen.insert(dedup_key(s)).second) out.push_back(s);
  }
  return out;
}

ValidationOutcome run_validation(const std::vector<RawSample>& raw, const SemanticValidator& validator) {
  ValidationOutcome outcome;
  std::size_t json_valid = 0, format_valid = 0, unique = 0, matched = 0;
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    std::string err;
    const auto doc = stage_json(raw[i], &err);
    if (!doc) {
      outcome.rejections.push_back({i, "json", "JsonSyntax", err});
      continue;
    }
    ++json_valid;
    DatasetSample sample;
    try {
      sample = stage_format(*doc, raw[i]);
    } catch (const Error& e) {
      outcome.rejections.push_back({i, "format", e.code(), e.what()});
      continue;
    }
    ++format_valid;
    if (sample.resequenced) ++outcome.report.fixed;
    if (!seen.insert(dedup_key(sample)).second) {
      outcome.rejections.push_back({i, "dedup", "Duplicate", "same command and actions as an earlier sample"});
      continue;
    }
    ++unique;
    const Judgement j = validator.judge(sample);
    sample.semantic_reason = j.reason;
    switch (j.verdict) {
      case Verdict::kPass:
        ++matched;
        sample.semantic = "pass";
        outcome.accepted.push_back(std::move(sample));
        break;
      case Verdict::kFail:
        outcome.rejections.push_back({i, "semantic", "MeaningMismatch", j.reason});
        break;
      case Verdict::kReview:
        sample.semantic = "review";
        outcome.review.push_back(std::move(sample));
        break;
    }
  }
  const std::size_t fixed = outcome.report.fixed;
  outcome.report = MetricsReport::from_counts(raw.size(), json_valid, format_valid, unique, matched);
  outcome.report.fixed = fixed;
  outcome.report.review = outcome.review.size();
  return outcome;
}

AccuracyReport eval_accuracy(const std::vector<std::string>& pred, const std::vector<ActionList>& gold) {
  if (pred.size() != gold.size()) {
    throw DatasetError("LengthMismatch", "predictions and gold differ in length",
                       std::to_string(pred.size()) + " vs " + std::to_string(gold.size()));
  }
  AccuracyReport r;
  r.total = pred.size();
  for (std::size_t i = 0; i < pred.size(); ++i) {
    std::string text = trim(pred[i]);
    if (text.find("```") != std::string::npos) {
      try {
        text = extract_json_block(text);
      } catch (const Error&) {
      }
    }
    const auto doc = nlohmann::json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_array()) continue;
    ++r.json_valid;
    try {
      if (canonicalize(parse_action_list(text)) == canonicalize(gold[i])) ++r.exact;
    } catch (const Error&) {
    }
  }
  if (r.total > 0) {
    r.json_rate = static_cast<double>(r.json_valid) / static_cast<double>(r.total);
    r.accuracy = static_cast<double>(r.exact) / static_cast<double>(r.total);
  }
  return r;
}

nlohmann::json to_json(const AccuracyReport& r) {
  return {{"total", r.total},
          {"json_valid", r.json_valid},
          {"exact", r.exact},
          {"json_rate", round4(r.json_rate)},
          {"accuracy", round4(r.accuracy)}};
}

std::string format_accuracy(const AccuracyReport& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "samples: %zu\njson validity: %.2f%% (%.4f)\naccuracy: %.2f%% (%.4f)\n", r.total,
                r.json_rate * 100.0, r.json_rate, r.accuracy * 100.0, r.accuracy);
  return buf;
}

}  // namespace scenesmith
