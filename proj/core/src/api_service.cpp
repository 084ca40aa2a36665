#include "scenesmith/api_service.hpp"

#include "scenesmith/exporter.hpp"
#include "scenesmith/geometry.hpp"

#include <httplib.h>

#include <cstdlib>
#include <fstream>
#include <thread>

namespace scenesmith {

namespace {

ApiResponse error_response(int status, const std::string& code, const std::string& message,
                           const std::string& stage = {}, const std::string& detail = {}) {
  return {status, api_error_body(code, message, stage, detail)};
}

ApiResponse error_response(int status, const Error& e) {
  return error_response(status, e.code(), e.what(), e.stage(), e.detail());
}

Vec3 point_from_json(const nlohmann::json& j) {
  if (j.is_array() && j.size() == 3 && j[0].is_number() && j[1].is_number() && j[2].is_number()) {
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
  }
  if (j.is_object() && j.contains("x") && j.contains("y") && j.contains("z") && j["x"].is_number() &&
      j["y"].is_number() && j["z"].is_number()) {
    return {j["x"].get<double>(), j["y"].get<double>(), j["z"].get<double>()};
  }
  throw SchemaError("WrongType", "points must be [x,y,z] or {x,y,z}", "points");
}

std::optional<std::uint64_t> expected_version(const nlohmann::json& body) {
  if (!body.contains("expected_version") || body["expected_version"].is_null()) return std::nullopt;
  if (!body["expected_version"].is_number_unsigned()) {
    throw SchemaError("WrongType", "expected_version must be a non-negative integer", "expected_version");
  }
  return body["expected_version"].get<std::uint64_t>();
}

std::string join_names(const std::vector<std::string>& names) {
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) out += i + 1 == names.size() ? " and " : ", ";
    out += names[i];
  }
  return out;
}

std::filesystem::path resolve_against(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

}  // namespace

std::optional<std::string> process_env(const char* name) {
  if (const char* v = std::getenv(name)) return std::string(v);
  return std::nullopt;
}

ServiceConfig load_config(const std::optional<std::filesystem::path>& file, const EnvLookup& env) {
  auto bad = [](const std::string& msg, const std::string& detail) {
    return Error("BadConfig", msg, detail, "config");
  };
  ServiceConfig c;
  if (file) {
    std::ifstream in(*file);
    if (!in) throw bad("cannot read config file", file->string());
    const auto doc = nlohmann::json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) throw bad("config file is not a JSON object", file->string());
    const auto base = file->parent_path();
    try {
      c.host = doc.value("host", c.host);
      c.port = doc.value("port", c.port);
      if (doc.contains("mode")) {
        auto m = outbound_mode_from_string(doc["mode"].get<std::string>());
        if (!m) throw bad("mode must be live, record or replay", doc["mode"].get<std::string>());
        c.mode = *m;
      }
      c.chat_url = doc.value("chat_url", c.chat_url);
      c.chat_model = doc.value("chat_model", c.chat_model);
      c.embed_url = doc.value("embed_url", c.embed_url);
      c.embed_model = doc.value("embed_model", c.embed_model);
      c.embed_dim = doc.value("embed_dim", c.embed_dim);
      c.meshgen_url = doc.value("meshgen_url", c.meshgen_url);
      c.timeout_ms = doc.value("timeout_ms", c.timeout_ms);
      if (doc.contains("assets_dir")) c.assets_dir = resolve_against(base, doc["assets_dir"].get<std::string>());
      if (doc.contains("fixtures_dir")) c.fixtures_dir = resolve_against(base, doc["fixtures_dir"].get<std::string>());
    } catch (const nlohmann::json::exception& e) {
      throw bad(std::string("config value has the wrong type: ") + e.what(), file->string());
    }
  }
  if (auto v = env("SCENESMITH_PORT")) {
    try {
      std::size_t used = 0;
      c.port = std::stoi(*v, &used);
      if (used != v->size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw bad("SCENESMITH_PORT is not an integer", *v);
    }
  }
  if (auto v = env("SCENESMITH_CHAT_URL")) c.chat_url = *v;
  if (auto v = env("SCENESMITH_EMBED_URL")) c.embed_url = *v;
  if (auto v = env("SCENESMITH_MESHGEN_URL")) c.meshgen_url = *v;
  if (auto v = env("SCENESMITH_MODE")) {
    auto m = outbound_mode_from_string(*v);
    if (!m) throw bad("SCENESMITH_MODE must be live, record or replay", *v);
    c.mode = *m;
  }
  if (auto v = env("SCENESMITH_ASSETS_DIR")) c.assets_dir = *v;
  if (auto v = env("SCENESMITH_FIXTURES_DIR")) c.fixtures_dir = *v;
  if (c.port < 0 || c.port > 65535) throw bad("port out of range", std::to_string(c.port));
  return c;
}

ServiceBackends make_backends(const ServiceConfig& config) {
  auto fixtures = config.fixtures_dir.empty() ? nullptr : std::make_shared<const FixtureStore>(config.fixtures_dir);
  const std::chrono::milliseconds timeout(config.timeout_ms);

  std::shared_ptr<const Embedder> embedder;
  if (!config.embed_url.empty()) {
    embedder = std::make_shared<HttpEmbedder>(config.embed_dim, EndpointConfig{config.embed_url, config.embed_model, timeout},
                                              OutboundClient("embed", config.mode, fixtures));
  } else {
    embedder = std::make_shared<HashingEmbedder>();
  }

  auto library = std::make_shared<AssetLibrary>();
  const auto manifest = config.assets_dir / "manifest.json";
  if (!config.assets_dir.empty() && std::filesystem::exists(manifest)) {
    *library = AssetLibrary::load(manifest, embedder);
  }
  if (!config.meshgen_url.empty()) {
    library->set_mesh_generator(make_http_mesh_generator(EndpointConfig{config.meshgen_url, {}, timeout},
                                                         OutboundClient("meshgen", config.mode, fixtures)));
  }

  ServiceBackends b;
  b.library = library;
  const bool replay = config.mode == OutboundMode::kReplay && fixtures;
  if (!config.chat_url.empty() || replay) {
    auto chat = std::make_shared<HttpChatBackend>(EndpointConfig{config.chat_url, config.chat_model, timeout},
                                                  OutboundClient("chat", config.mode, fixtures));
    b.external = std::make_shared<ChatParser>(chat, config.mode == OutboundMode::kReplay ? "replay_fixture"
                                                                                         : "external_chat_service");
  }
  return b;
}

nlohmann::json api_error_body(const std::string& code, const std::string& message, const std::string& stage,
                              const std::string& detail) {
  nlohmann::json j = {{"code", code}, {"message", message}};
  j["stage"] = stage.empty() ? nlohmann::json(nullptr) : nlohmann::json(stage);
  j["detail"] = detail.empty() ? nlohmann::json(nullptr) : nlohmann::json(detail);
  return j;
}

std::string summarize_results(const std::vector<ActionResult>& results) {
  std::vector<std::string> created;
  std::size_t updated = 0, skipped = 0;
  const ActionResult* failed = nullptr;
  for (const auto& r : results) {
    if (r.status == "ok") {
      if (r.created_names.empty()) ++updated;
      created.insert(created.end(), r.created_names.begin(), r.created_names.end());
    } else if (r.status == "skipped") {
      ++skipped;
    } else if (!failed) {
      failed = &r;
    }
  }
  std::string out;
  if (!created.empty()) out += "Created " + join_names(created) + ".";
  if (updated) {
    out += std::string(out.empty() ? "" : " ") + "Applied " + std::to_string(updated) +
           (updated == 1 ? " change." : " changes.");
  }
  if (failed) {
    out += std::string(out.empty() ? "" : " ") + "Step " + std::to_string(failed->index + 1) + " failed (" +
           failed->error_code + "): " + failed->message + ".";
    if (skipped) out += " " + std::to_string(skipped) + (skipped == 1 ? " later step was" : " later steps were") + " skipped.";
  }
  if (out.empty()) out = "Nothing to do.";
  return out;
}

struct ApiService::Impl {
  httplib::Server server;
  std::thread thread;
  std::mutex bvh_mu;
  std::optional<std::uint64_t> bvh_version;
  std::shared_ptr<const Bvh> bvh;  // null when the scene has no triangles
};

ApiService::ApiService(std::shared_ptr<const AssetLibrary> library, std::shared_ptr<const ParserBackend> external,
                       Scene scene)
    : impl_(std::make_unique<Impl>()),
      library_(library ? std::move(library) : std::make_shared<const AssetLibrary>()),
      external_(std::move(external)),
      store_(std::move(scene)) {}

ApiService::~ApiService() { stop(); }

ApiResponse ApiService::handle(const std::string& method, const std::string& path, const std::string& body) {
  try {
    if (method == "GET" && path == "/scene") return get_scene();
    static const std::vector<std::pair<std::string, ApiResponse (ApiService::*)(const nlohmann::json&)>> kPosts = {
        {"/actions", &ApiService::post_actions},
        {"/chat", &ApiService::post_chat},
        {"/export", &ApiService::post_export},
        {"/placement/check", &ApiService::post_placement_check},
    };
    const bool search = path == "/library/search";
    bool known = search || path == "/scene";
    for (const auto& [p, fn] : kPosts) known = known || p == path;
    if (!known) return error_response(404, "NotFound", "no such endpoint", "input", path);
    if (method != "POST" || path == "/scene") {
      return error_response(405, "MethodNotAllowed", method + " is not supported on " + path, "input", path);
    }
    const auto doc = nlohmann::json::parse(body, nullptr, false);
    if (doc.is_discarded()) return error_response(400, "JsonSyntax", "request body is not valid JSON", "schema");
    if (!doc.is_object()) return error_response(400, "WrongType", "request body must be a JSON object", "schema");
    if (search) return post_library_search(doc);
    for (const auto& [p, fn] : kPosts) {
      if (p == path) return (this->*fn)(doc);
    }
    return error_response(404, "NotFound", "no such endpoint", "input", path);
  } catch (const Error& e) {
    return error_response(500, e);
  } catch (const std::exception& e) {
    return error_response(500, "Internal", e.what());
  }
}

ApiResponse ApiService::get_scene() const { return {200, to_json(*store_.snapshot())}; }

ApiResponse ApiService::post_actions(const nlohmann::json& body) {
  ActionList actions;
  std::optional<std::uint64_t> expected;
  try {
    if (!body.contains("actions")) throw SchemaError("MissingField", "request needs an actions array", "actions");
    actions = parse_actions_structural(body["actions"]);
    check_local_id_sequence(actions);
    expected = expected_version(body);
  } catch (const Error& e) {
    return error_response(400, e);
  }
  return store_.mutate([&](Scene& scene) -> ApiResponse {
    if (expected && *expected != scene.version()) {
      return error_response(409, "VersionConflict", "scene version is " + std::to_string(scene.version()), "input",
                            std::to_string(*expected));
    }
    const SceneSnapshot snap = scene.snapshot();
    std::vector<ResolvedAction> resolved;
    try {
      validate_reference_closure(actions, snap.names());
      resolved = resolve(snap, actions, *library_);
    } catch (const Error& e) {
      return error_response(400, e);
    }
    const auto results = scene.apply_actions(resolved, *library_);
    nlohmann::json out = {{"results", nlohmann::json::array()}, {"resolved", to_json(resolved)},
                          {"version", scene.version()}};
    for (const auto& r : results) out["results"].push_back(to_json(r));
    return {200, out};
  });
}

ApiResponse ApiService::post_chat(const nlohmann::json& body) {
  if (!body.contains("command") || !body["command"].is_string()) {
    return error_response(400, "MissingField", "request needs a command string", "input", "command");
  }
  const std::string command = body["command"];
  const std::string backend = body.contains("backend") && body["backend"].is_string() ? body["backend"].get<std::string>()
                                                                                       : std::string();
  static const GrammarParser kGrammar;
  const ParserBackend* parser = nullptr;
  if (backend == "fallback" || backend == "fallback_grammar") {
    parser = &kGrammar;
  } else if (backend.empty() || backend == "external" || (external_ && backend == external_->kind())) {
    parser = external_.get();
    if (!parser) {
      return error_response(422, "BackendUnavailable", "no external chat backend is configured", "backend");
    }
  } else {
    return error_response(400, "UnknownBackend", "backend must be fallback or external", "input", backend);
  }
  std::optional<std::uint64_t> expected;
  try {
    expected = expected_version(body);
  } catch (const Error& e) {
    return error_response(400, e);
  }

  return store_.mutate([&](Scene& scene) -> ApiResponse {
    if (expected && *expected != scene.version()) {
      return error_response(409, "VersionConflict", "scene version is " + std::to_string(scene.version()), "input",
                            std::to_string(*expected));
    }
    const SceneSnapshot snap = scene.snapshot();
    ActionList actions;
    try {
      actions = parse_command(*parser, snap, command);
    } catch (const ParseFailure& e) {
      auto r = error_response(422, e);
      if (!e.raw_reply().empty()) r.body["raw_reply"] = e.raw_reply();
      return r;
    }
    std::vector<ResolvedAction> resolved;
    try {
      resolved = resolve(snap, actions, *library_);
    } catch (const Error& e) {
      return error_response(400, e);
    }
    const auto results = scene.apply_actions(resolved, *library_);
    nlohmann::json out = {{"actions", to_json(actions)},
                          {"resolved", to_json(resolved)},
                          {"results", nlohmann::json::array()},
                          {"reply_text", summarize_results(results)},
                          {"version", scene.version()}};
    for (const auto& r : results) out["results"].push_back(to_json(r));
    return {200, out};
  });
}

ApiResponse ApiService::post_export(const nlohmann::json& body) {
  if (!body.contains("out_dir") || !body["out_dir"].is_string() || body["out_dir"].get<std::string>().empty()) {
    return error_response(400, "MissingField", "request needs an out_dir string", "input", "out_dir");
  }
  const std::filesystem::path out_dir = body["out_dir"].get<std::string>();
  return store_.read([&](const Scene& scene) -> ApiResponse {
    try {
      const auto bundle = export_scene(scene, out_dir);
      return {200,
              {{"xml_path", (out_dir / "scene.xml").string()},
               {"mesh_count", bundle.mesh_files.size()},
               {"material_count", bundle.material_count}}};
    } catch (const ExportError& e) {
      if (e.code() == "NothingToExport") return error_response(409, e);
      if (e.code() == "IoFailure") return error_response(500, e);
      return error_response(400, e);
    }
  });
}

ApiResponse ApiService::post_placement_check(const nlohmann::json& body) {
  std::vector<Vec3> points;
  double clearance = 0;
  try {
    if (!body.contains("points") || !body["points"].is_array()) {
      throw SchemaError("MissingField", "request needs a points array", "points");
    }
    for (const auto& p : body["points"]) points.push_back(point_from_json(p));
    if (body.contains("clearance")) {
      if (!body["clearance"].is_number()) throw SchemaError("WrongType", "clearance must be a number", "clearance");
      clearance = body["clearance"].get<double>();
    }
  } catch (const Error& e) {
    return error_response(400, e);
  }
  if (!(clearance >= 0)) return error_response(400, "NegativeClearance", "clearance must be >= 0", "input");

  std::shared_ptr<const Bvh> bvh;
  std::uint64_t version = 0;
  {
    std::lock_guard lock(impl_->bvh_mu);
    store_.read([&](const Scene& scene) {
      version = scene.version();
      if (impl_->bvh_version == version) return;
      std::vector<BvhInput> inputs;
      for (const auto& o : scene.objects()) {
        if (o.visible && !o.mesh.faces.empty()) inputs.push_back({o.name, o.mesh});
      }
      impl_->bvh = inputs.empty() ? nullptr : std::make_shared<const Bvh>(Bvh::build(std::move(inputs)));
      impl_->bvh_version = version;
    });
    bvh = impl_->bvh;
  }
  nlohmann::json free = nlohmann::json::array();
  for (const auto& p : points) free.push_back(!bvh || bvh->is_free_space(p, clearance));
  return {200, {{"free", free}, {"version", version}}};
}

ApiResponse ApiService::post_library_search(const nlohmann::json& body) const {
  if (!body.contains("query") || !body["query"].is_string()) {
    return error_response(400, "MissingField", "request needs a query string", "input", "query");
  }
  long long k = 5;
  if (body.contains("k")) {
    if (!body["k"].is_number_integer()) return error_response(400, "WrongType", "k must be an integer", "input", "k");
    k = body["k"].get<long long>();
  }
  if (k < 1) return error_response(400, "OutOfRange", "k must be >= 1", "input", "k");
  try {
    const auto hits = library_->search(body["query"].get<std::string>(), static_cast<std::size_t>(k));
    nlohmann::json results = nlohmann::json::array();
    for (const auto& h : hits) {
      const Asset* a = library_->find(h.asset_id);
      results.push_back({{"asset_id", h.asset_id},
                         {"object_type", a ? a->object_type : std::string()},
                         {"score", h.score},
                         {"descriptions", a ? a->descriptions : std::vector<std::string>{}}});
    }
    return {200, {{"results", results}}};
  } catch (const LibraryError& e) {
    if (e.code() == "EmptyIndex") return error_response(409, e);
    return error_response(502, e);
  }
}

int ApiService::start(const std::string& host, int port) {
  auto& svr = impl_->server;
  svr.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                           {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                           {"Access-Control-Allow-Headers", "Content-Type"}});
  auto route = [this](const httplib::Request& req, httplib::Response& res) {
    const ApiResponse r = handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  svr.Get(R"(/.*)", route);
  svr.Post(R"(/.*)", route);
  svr.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  svr.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string msg = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      msg = e.what();
    } catch (...) {
    }
    res.status = 500;
    res.set_content(api_error_body("Internal", msg).dump(), "application/json");
  });

  int bound = port;
  if (port == 0) {
    bound = svr.bind_to_any_port(host);
  } else if (!svr.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound <= 0) throw Error("BindFailed", "cannot bind " + host + ":" + std::to_string(port), {}, "serve");
  impl_->thread = std::thread([&svr] { svr.listen_after_bind(); });
  svr.wait_until_ready();
  return bound;
}

void ApiService::wait() {
  if (impl_->thread.joinable()) impl_->thread.join();
}

void ApiService::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace scenesmith
