// One PASS/FAIL line per acceptance criterion; exit status is the number of
// failures. Runs offline: fallback grammar, replay fixtures, loopback HTTP.

#include "generator_table.hpp"
#include "harness.hpp"
#include "oracles.hpp"

#include "scenesmith/api_service.hpp"
#include "scenesmith/dataset_forge.hpp"
#include "scenesmith/exporter.hpp"

#include <httplib.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

using namespace scenesmith;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Collects the first few violations; a criterion passes when there are none.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    ++failures_;
    if (failures_ <= 3) notes_ += (notes_.empty() ? "" : "; ") + what;
  }
  void note(const std::string& s) { info_ += (info_.empty() ? "" : ", ") + s; }
  bool ok() const { return failures_ == 0; }
  std::string summary() const {
    if (ok()) return info_;
    return std::to_string(failures_) + " violation(s): " + notes_;
  }

 private:
  int failures_ = 0;
  std::string notes_;
  std::string info_;
};

std::string fmt(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// ---------------------------------------------------------------------------

void table_arithmetic(Check& c) {
  const std::set<std::string_view> headline = {"GPT-5(nano)", "Qwen3 (8B)", "Phi4 (14B)"};
  int seen = 0;
  for (const auto& row : table::kGeneratorRows) {
    if (!headline.count(row.model)) continue;
    ++seen;
    const auto r = MetricsReport::from_rates(row.json / 100, row.format / 100, row.unique / 100, row.meaning / 100);
    const double got = r.overall_usability_rate * 100;
    c.expect(std::abs(got - row.overall) <= 0.05, std::string(row.model) + " gives " + fmt(got, 3));
    c.note(std::string(row.model) + "=" + fmt(got, 2));
  }
  c.expect(seen == 3, "missing headline rows");
}

void validation_properties(Check& c) {
  GenerationSpec spec;
  spec.n_samples = 1000;
  spec.samples_per_trial = 5;
  spec.seed = 2024;
  const auto raw = generate(spec, TemplateGenerator(0.35), "template");
  c.expect(raw.samples.size() == 1000, "generated " + std::to_string(raw.samples.size()) + " samples");
  const auto out = run_validation(raw.samples, GrammarSemanticValidator());
  const auto& r = out.report;
  c.expect(r.raw >= r.json_valid && r.json_valid >= r.format_valid && r.format_valid >= r.unique &&
               r.unique >= r.meaning_matched,
           "stage counts not monotone");
  c.expect(r.json_valid < r.raw && r.format_valid < r.json_valid && r.unique < r.format_valid,
           "corruptions did not reach every stage");
  const double product =
      r.json_validity_rate * r.format_validity_rate * r.unique_sample_rate * r.meaning_matched_rate;
  c.expect(std::abs(r.overall_usability_rate - product) <= 5e-4,
           "overall " + fmt(r.overall_usability_rate) + " vs product " + fmt(product));
  c.expect(r.fixed > 0, "no sample needed resequencing");

  std::size_t idempotent = 0;
  for (const auto& s : out.accepted) {
    json objs = json::array();
    for (const auto& o : s.existing_objects) objs.push_back({{"name", o.name}, {"object_type", o.object_type}});
    const json doc = {{"command", s.command}, {"existing_objects", objs}, {"actions", to_json(s.gold_actions)}};
    const auto again = stage_format(doc, {doc.dump(), s.generator_id, s.trial, s.index});
    const bool same = !again.resequenced && canonicalize(again.gold_actions) == canonicalize(s.gold_actions);
    c.expect(same, "resequencing changed an accepted sample");
    idempotent += same;
  }
  c.note("raw/json/format/unique/meaning = " + std::to_string(r.raw) + "/" + std::to_string(r.json_valid) + "/" +
         std::to_string(r.format_valid) + "/" + std::to_string(r.unique) + "/" + std::to_string(r.meaning_matched));
  c.note("resequenced " + std::to_string(r.fixed));
}

void golden_corpus(Check& c) {
  const auto corpus = harness::load_corpus();
  c.expect(corpus.size() >= 40, "corpus has " + std::to_string(corpus.size()) + " entries");
  std::set<std::string> commands;
  for (const auto& e : corpus) commands.insert(e.command);
  for (const char* must : {"Add a nightstand, then put a lamp on it", "Create a wood table in the center of the room",
                           "Put 4 bowls on the table"}) {
    c.expect(commands.count(must) == 1, std::string("missing '") + must + "'");
  }
  std::vector<std::string> pred;
  std::vector<ActionList> gold;
  std::size_t matched = 0;
  for (const auto& e : corpus) {
    Scene s;
    harness::run_all(s, e.setup, *harness::library());
    const auto snap = s.snapshot();
    const auto want = canonicalize(validate_reply_json(e.actions_json, snap.names()));
    std::string got;
    try {
      got = canonicalize(parse_command(GrammarParser(), snap, e.command));
    } catch (const Error& err) {
      got = std::string("error ") + err.code();
    }
    c.expect(got == want, "'" + e.command + "' parsed differently");
    matched += got == want;
    pred.push_back(e.actions_json);
    gold.push_back(parse_action_list(e.actions_json));
  }
  const auto acc = eval_accuracy(pred, gold);
  c.expect(fmt(acc.accuracy * 100, 2) == "100.00", "eval_accuracy " + fmt(acc.accuracy * 100, 2));
  c.note(std::to_string(matched) + "/" + std::to_string(corpus.size()) + " grammar == gold");
  c.note("eval_accuracy " + fmt(acc.accuracy * 100, 2));
}

Action create(const std::string& type, const std::string& id, const Vec3& size) {
  Action a;
  a.action_type = ActionType::kCreateObjectAbsolute;
  a.object_type = type;
  a.quantity = 1;
  a.local_id = id;
  a.size = size;
  return a;
}

void resolver_invariants(Check& c) {
  std::mt19937_64 rng(500);
  std::uniform_real_distribution<double> room_d(8, 14), pos(-1.5, 1.5), ref_e(0.4, 1.5), ref_h(0.3, 1.0),
      sub_e(0.1, 1.5), small(0.05, 0.15), turn(0, 360);
  const SpatialRelation lateral[] = {SpatialRelation::kLeftOf, SpatialRelation::kRightOf,
                                     SpatialRelation::kInFrontOf, SpatialRelation::kBehind};
  const auto& lib = *harness::library();
  std::size_t on_top = 0, lateral_checks = 0, grids = 0;
  for (int scene_i = 0; scene_i < 500; ++scene_i) {
    Scene s;
    s.setup_room(Vec3(room_d(rng), room_d(rng), 3));
    Action ref = create("box", "1", Vec3(ref_e(rng), ref_e(rng), ref_h(rng)));
    ref.position = Vec3(pos(rng), pos(rng), 0);
    if (scene_i % 3 == 0) ref.rotation_deg = Vec3(0, 0, turn(rng));
    s.apply_actions(resolve(s.snapshot(), ActionList{ref}, lib), lib);

    ActionList acts;
    auto relative = [&](SpatialRelation rel, const Vec3& size, long long qty) {
      Action a = create("box", std::to_string(acts.size() + 1), size);
      a.action_type = ActionType::kCreateObjectRelative;
      a.quantity = qty;
      a.relation = rel;
      a.reference_name = "box.001";
      acts.push_back(a);
    };
    relative(SpatialRelation::kOnTopOf, Vec3(sub_e(rng), sub_e(rng), sub_e(rng)), 1);
    for (auto rel : lateral) relative(rel, Vec3(sub_e(rng), sub_e(rng), sub_e(rng)), 1);
    const Vec3 item(small(rng), small(rng), small(rng));
    relative(SpatialRelation::kOnTopOf, item, 4);

    const auto resolved = resolve(s.snapshot(), acts, lib);
    const auto results = s.apply_actions(resolved, lib);
    for (const auto& r : results) c.expect(r.status == "ok", "apply failed: " + r.message);
    const auto snap = s.snapshot();
    const Aabb refb = snap.find("box.001")->bounds();
    auto bounds_of = [&](std::size_t source) {
      std::vector<Aabb> out;
      for (const auto& r : resolved) {
        if (r.source_index == source) out.push_back(snap.find(r.new_name)->bounds());
      }
      return out;
    };

    const Aabb top = bounds_of(0).at(0);
    c.expect(std::abs(top.min.z() - refb.max.z()) <= 1e-6, "on_top_of z off by " + fmt(top.min.z() - refb.max.z(), 9));
    ++on_top;
    for (int k = 0; k < 4; ++k) {
      const Aabb b = bounds_of(static_cast<std::size_t>(k + 1)).at(0);
      double gap = 0;
      switch (lateral[k]) {
        case SpatialRelation::kLeftOf: gap = refb.min.x() - b.max.x(); break;
        case SpatialRelation::kRightOf: gap = b.min.x() - refb.max.x(); break;
        case SpatialRelation::kInFrontOf: gap = refb.min.y() - b.max.y(); break;
        default: gap = b.min.y() - refb.max.y(); break;
      }
      c.expect(std::abs(gap - 0.10) <= 1e-6, std::string(to_string(lateral[k])) + " gap " + fmt(gap, 9));
      c.expect(!b.overlaps(refb), std::string(to_string(lateral[k])) + " overlaps its reference");
      ++lateral_checks;
    }
    const auto grid = bounds_of(5);
    c.expect(grid.size() == 4, "grid produced " + std::to_string(grid.size()) + " items");
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const Aabb& g = grid[i];
      c.expect(g.min.x() >= refb.min.x() - 1e-9 && g.max.x() <= refb.max.x() + 1e-9 &&
                   g.min.y() >= refb.min.y() - 1e-9 && g.max.y() <= refb.max.y() + 1e-9,
               "grid item outside the footprint");
      c.expect(std::abs(g.min.z() - refb.max.z()) <= 1e-6, "grid item not on the top");
      for (std::size_t j = i + 1; j < grid.size(); ++j) c.expect(!g.overlaps(grid[j]), "grid items overlap");
    }
    ++grids;
  }
  c.note("500 scenes, " + std::to_string(on_top) + " on_top_of, " + std::to_string(lateral_checks) + " lateral, " +
         std::to_string(grids) + " grids");
}

std::vector<BvhInput> random_scene(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> pos(-4, 4), ext(0.2, 1.6), ang(-180, 180);
  const PrimitiveKind kinds[] = {PrimitiveKind::kBox, PrimitiveKind::kCylinder, PrimitiveKind::kSphere,
                                 PrimitiveKind::kWedge};
  std::vector<BvhInput> out;
  for (int i = 0; i < n; ++i) {
    const Mesh m = make_primitive(kinds[rng() % 4], Vec3(ext(rng), ext(rng), ext(rng)), 16);
    const Mat3 r = rotation_from_euler_deg(Vec3(ang(rng), ang(rng), ang(rng)));
    out.push_back({"obj" + std::to_string(i), transformed(m, r, Vec3(pos(rng), pos(rng), pos(rng)))});
  }
  return out;
}

void geometry_oracles(Check& c) {
  std::mt19937_64 rng(10000);
  const auto scene = random_scene(rng, 20);
  std::vector<Mesh> meshes;
  for (const auto& o : scene) meshes.push_back(o.mesh);
  const Bvh bvh = Bvh::build(scene);
  std::uniform_real_distribution<double> u(-6, 6);
  std::normal_distribution<double> n(0, 1);

  int hits = 0;
  for (int i = 0; i < 10000; ++i) {
    const Vec3 o(u(rng), u(rng), u(rng));
    const Vec3 d = Vec3(n(rng), n(rng), n(rng)).normalized();
    const auto got = bvh.ray_cast(o, d);
    const auto want = oracle::nearest_hit(meshes, o, d);
    if (got.has_value() != want.has_value()) {
      c.expect(false, "ray " + std::to_string(i) + " hit disagreement");
      continue;
    }
    if (!got) continue;
    ++hits;
    c.expect(std::abs(got->t - want->t) <= 1e-6, "ray " + std::to_string(i) + " t differs by " + fmt(got->t - want->t, 9));
  }

  int contained = 0, checked = 0;
  while (checked < 1000) {
    const Vec3 p(u(rng), u(rng), u(rng));
    if (oracle::min_distance(meshes, p) <= 1e-4) continue;
    ++checked;
    bool want = false;
    for (const auto& m : meshes) want = want || oracle::winding_number(m, p) > 0.5;
    c.expect(bvh.contains_point(p) == want, "containment disagreement at query " + std::to_string(checked));
    contained += want;
  }

  std::uniform_real_distribution<double> clear(0.0, 0.8);
  int free_pts = 0;
  for (int i = 0; i < 100; ++i) {
    const Vec3 p(u(rng), u(rng), u(rng));
    const double clearance = clear(rng);
    const double dist = oracle::min_distance(meshes, p);
    bool inside = false;
    for (const auto& m : meshes) inside = inside || oracle::winding_number(m, p) > 0.5;
    const bool want = !inside && dist > clearance;
    c.expect(bvh.is_free_space(p, clearance) == want, "is_free_space disagreement at point " + std::to_string(i));
    free_pts += want;
  }
  c.note("10000 rays (" + std::to_string(hits) + " hits), 1000 containment (" + std::to_string(contained) +
         " inside), 100 free-space (" + std::to_string(free_pts) + " free)");
}

void export_goldens(Check& c) {
  const auto& lib = *harness::library();
  for (const std::string name : {"nist-lobby", "wireless-lab"}) {
    Scene a, b;
    harness::run_all(a, harness::demo_commands(name), lib);
    harness::run_all(b, harness::demo_commands(name), lib);
    const auto ea = build_export(a), eb = build_export(b);
    c.expect(ea.xml_text == eb.xml_text && ea.mesh_files == eb.mesh_files, name + " differs between runs");

    const fs::path golden = harness::test_data_dir() / "golden" / name;
    c.expect(oracle::read_file(golden / "scene.xml") == ea.xml_text, name + " scene.xml differs from golden");
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(golden / "meshes")) {
      ++files;
      const auto it = ea.mesh_files.find("meshes/" + e.path().filename().string());
      c.expect(it != ea.mesh_files.end() && it->second == oracle::read_file(e.path()),
               name + " " + e.path().filename().string() + " differs from golden");
    }
    c.expect(files == ea.mesh_files.size(), name + " mesh count differs from golden");

    const auto facts = oracle::parse_scene_xml(ea.xml_text);
    const std::set<std::string> ids(facts.ids.begin(), facts.ids.end());
    c.expect(facts.root == "scene" && facts.version == "2.1.0", name + " root element");
    c.expect(ids.size() == facts.ids.size(), name + " duplicate ids");
    for (const auto& r : facts.refs) c.expect(ids.count(r) == 1, name + " dangling ref " + r);

    const auto snap = a.snapshot();
    double worst = 0;
    for (const auto& [shape, file] : facts.shapes) {
      const auto it = ea.mesh_files.find(file);
      if (it == ea.mesh_files.end()) {
        c.expect(false, name + " shape " + shape + " has no mesh file");
        continue;
      }
      const Aabb got = oracle::ply_bounds(oracle::read_ply(it->second));
      const Aabb want = snap.find(shape)->bounds();
      worst = std::max({worst, (got.min - want.min).cwiseAbs().maxCoeff(), (got.max - want.max).cwiseAbs().maxCoeff()});
    }
    c.expect(worst <= 1e-5, name + " PLY AABB error " + fmt(worst, 9));
    c.note(name + ": " + std::to_string(ea.mesh_files.size()) + " meshes, " + std::to_string(ea.material_count) +
           " materials");
  }

  Scene base;
  harness::run_all(base, {"add a wooden table at (0, 0, 0)", "add a wooden chair at (2, 0, 0)"}, lib);
  auto doc = base.save();
  for (auto& o : doc["objects"]) {
    if (o["name"] == "chair.001") o["material"] = "itu_wood.001";
  }
  const auto facts = oracle::parse_scene_xml(build_export(Scene::load(doc)).xml_text);
  c.expect(facts.bsdf_ids == std::vector<std::string>{"itu_wood"}, "itu_wood.001 was not merged into itu_wood");
  c.expect(std::count(facts.refs.begin(), facts.refs.end(), "itu_wood") == 2, "both shapes should ref itu_wood");
}

void service_end_to_end(Check& c) {
  ApiService svc(harness::library(), nullptr);
  const int port = svc.start("127.0.0.1", 0);
  httplib::Client cli("127.0.0.1", port);
  cli.set_read_timeout(5, 0);
  auto post = [&](const std::string& path, const json& body) -> json {
    auto r = cli.Post(path, body.dump(), "application/json");
    if (!r) {
      c.expect(false, path + " transport error");
      return json::object();
    }
    c.expect(r->status == 200, path + " returned " + std::to_string(r->status) + " " + r->body.substr(0, 120));
    return json::parse(r->body, nullptr, false);
  };
  post("/chat", {{"command", "set up a 6 x 5 x 3 room"}, {"backend", "fallback"}});
  post("/chat", {{"command", "Create a wood table in the center of the room"}, {"backend", "fallback"}});
  post("/chat", {{"command", "Put 4 bowls on the table"}, {"backend", "fallback"}});

  auto got = cli.Get("/scene");
  c.expect(got && got->status == 200, "GET /scene failed");
  if (!got) return;
  const json scene = json::parse(got->body);
  const json* table = nullptr;
  int tables = 0, bowls = 0;
  for (const auto& o : scene["objects"]) {
    if (o["object_type"] == "table") {
      ++tables;
      table = &o;
    }
  }
  c.expect(tables == 1, std::to_string(tables) + " tables");
  if (!table) return;
  c.expect((*table)["material"] == "itu_wood", "table material " + (*table)["material"].dump());
  const double top = (*table)["aabb_max"][2];
  for (const auto& o : scene["objects"]) {
    if (o["object_type"] != "bowl") continue;
    ++bowls;
    c.expect(std::abs(o["aabb_min"][2].get<double>() - top) <= 1e-6, o["name"].get<std::string>() + " not on the table");
  }
  c.expect(bowls == 4, std::to_string(bowls) + " bowls");

  oracle::TempDir dir("acceptance_export");
  const json ex = post("/export", {{"out_dir", dir.path().string()}});
  std::size_t visible = 0;
  std::set<std::string> materials;
  for (const auto& o : scene["objects"]) {
    if (!o["visible"].get<bool>()) continue;
    ++visible;
    materials.insert(o["material"].get<std::string>());
  }
  std::size_t on_disk = 0;
  if (fs::exists(dir.path() / "meshes")) {
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir.path() / "meshes")) ++on_disk;
  }
  c.expect(ex.value("mesh_count", 0u) == visible && on_disk == visible, "export mesh count mismatch");
  c.expect(ex.value("material_count", 0u) == materials.size(), "export material count mismatch");

  const auto& tmin = (*table)["aabb_min"];
  const auto& tmax = (*table)["aabb_max"];
  const json inside = {(tmin[0].get<double>() + tmax[0].get<double>()) / 2,
                       (tmin[1].get<double>() + tmax[1].get<double>()) / 2,
                       (tmin[2].get<double>() + tmax[2].get<double>()) / 2};
  const json center = {0.0, 0.0, scene["room"]["size"][2].get<double>() / 2};
  const json check = post("/placement/check", {{"points", {inside, center}}, {"clearance", 0.1}});
  c.expect(check.contains("free") && check["free"] == json::parse("[false, true]"),
           "placement check returned " + check.dump());
  svc.stop();
  c.note(std::to_string(scene["objects"].size()) + " objects, " + std::to_string(visible) + " meshes exported");
}

void library_recall(Check& c) {
  const auto lib = harness::library();
  c.expect(lib->assets().size() == 50, std::to_string(lib->assets().size()) + " assets");
  std::size_t total = 0, found = 0;
  std::vector<std::string> vocab;
  for (const auto& a : lib->assets()) {
    c.expect(a.descriptions.size() >= 3 && a.descriptions.size() <= 6, a.asset_id + " description count");
    for (const auto& d : a.descriptions) {
      ++total;
      const auto hits = lib->search(d, 1);
      const bool ok = !hits.empty() && hits[0].asset_id == a.asset_id;
      c.expect(ok, "'" + d + "' did not find " + a.asset_id);
      found += ok;
      for (auto& t : tokenize(d)) vocab.push_back(t);
    }
  }
  const HashingEmbedder emb;
  std::vector<std::pair<std::string, std::vector<float>>> stored;
  for (const auto& a : lib->assets()) {
    for (const auto& d : a.descriptions) stored.emplace_back(a.asset_id, emb.embed(d));
  }
  std::mt19937_64 rng(200);
  int agree = 0;
  for (int q = 0; q < 200; ++q) {
    std::string query;
    const int words = 1 + static_cast<int>(rng() % 4);
    for (int w = 0; w < words; ++w) query += vocab[rng() % vocab.size()] + " ";
    const auto qv = emb.embed(query);
    double best = -2;
    std::string best_id;
    for (const auto& [id, v] : stored) {
      double dot = 0;
      for (std::size_t i = 0; i < v.size(); ++i) dot += static_cast<double>(qv[i]) * v[i];
      if (dot > best + 1e-9 || (std::abs(dot - best) <= 1e-9 && id < best_id)) {
        best = dot;
        best_id = id;
      }
    }
    const auto hits = lib->search(query, 1);
    const bool ok = !hits.empty() && (hits[0].asset_id == best_id || std::abs(hits[0].score - best) <= 1e-6);
    c.expect(ok, "query '" + query + "' top-1 " + (hits.empty() ? "none" : hits[0].asset_id) + " vs " + best_id);
    agree += ok;
  }
  c.note(std::to_string(found) + "/" + std::to_string(total) + " descriptions recalled");
  c.note(std::to_string(agree) + "/200 top-1 == argmax");
}

struct Criterion {
  const char* name;
  double limit_s;
  std::function<void(Check&)> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"generator-table arithmetic", 1, table_arithmetic},
      {"validation pipeline properties", 10, validation_properties},
      {"parser golden corpus", 5, golden_corpus},
      {"resolver placement invariants", 30, resolver_invariants},
      {"geometry oracle equivalence", 60, geometry_oracles},
      {"export golden files", 10, export_goldens},
      {"end-to-end service", 10, service_end_to_end},
      {"library search recall", 5, library_recall},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[i].run(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    c.expect(secs < criteria[i].limit_s, "took " + fmt(secs, 2) + " s, limit " + fmt(criteria[i].limit_s, 0) + " s");
    failed += !c.ok();
    std::printf("%s [%zu] %-32s %7.2fs  %s\n", c.ok() ? "PASS" : "FAIL", i + 1, criteria[i].name, secs,
                c.summary().c_str());
    std::fflush(stdout);
  }
  return failed;
}
