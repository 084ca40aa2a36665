#pragma once

#include "scenesmith/asset_library.hpp"
#include "scenesmith/command_pipeline.hpp"
#include "scenesmith/outbound.hpp"
#include "scenesmith/scene_engine.hpp"
#include "scenesmith/spatial_resolver.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>

namespace scenesmith {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8787;
  OutboundMode mode = OutboundMode::kReplay;
  std::string chat_url;
  std::string chat_model = "scenesmith-parser";
  std::string embed_url;
  std::string embed_model;
  std::size_t embed_dim = 384;
  std::string meshgen_url;
  std::filesystem::path assets_dir;    // holds manifest.json
  std::filesystem::path fixtures_dir;  // replay / record fixtures
  int timeout_ms = 60000;
};

using EnvLookup = std::function<std::optional<std::string>(const char* name)>;
std::optional<std::string> process_env(const char* name);

// JSON file (same keys as ServiceConfig, paths relative to the file) then
// SCENESMITH_PORT, SCENESMITH_CHAT_URL, SCENESMITH_EMBED_URL,
// SCENESMITH_MESHGEN_URL, SCENESMITH_MODE, SCENESMITH_ASSETS_DIR,
// SCENESMITH_FIXTURES_DIR. Throws Error("BadConfig", stage "config").
ServiceConfig load_config(const std::optional<std::filesystem::path>& file, const EnvLookup& env = process_env);

// Library, chat parser and mesh generator wired from a config. Without an
// embed URL the hashing embedder is used; without a chat URL in live or
// record mode the external parser is absent.
struct ServiceBackends {
  std::shared_ptr<const AssetLibrary> library;
  std::shared_ptr<const ParserBackend> external;  // may be null
};
ServiceBackends make_backends(const ServiceConfig& config);

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
};

// Every non-2xx body: {code, message, stage?, detail?}.
nlohmann::json api_error_body(const std::string& code, const std::string& message, const std::string& stage = {},
                              const std::string& detail = {});

// One-paragraph summary of an execution.
std::string summarize_results(const std::vector<ActionResult>& results);

class ApiService {
 public:
  ApiService(std::shared_ptr<const AssetLibrary> library, std::shared_ptr<const ParserBackend> external,
             Scene scene = Scene());
  ~ApiService();
  ApiService(const ApiService&) = delete;
  ApiService& operator=(const ApiService&) = delete;

  // Routes a request in-process; the HTTP server calls the same function.
  ApiResponse handle(const std::string& method, const std::string& path, const std::string& body);

  ApiResponse get_scene() const;
  ApiResponse post_actions(const nlohmann::json& body);
  ApiResponse post_chat(const nlohmann::json& body);
  ApiResponse post_export(const nlohmann::json& body);
  ApiResponse post_placement_check(const nlohmann::json& body);
  ApiResponse post_library_search(const nlohmann::json& body) const;

  // Binds host:port (0 picks a free port), serves on a background thread
  // and returns the bound port. Throws Error("BindFailed").
  int start(const std::string& host, int port);
  // Blocks until stop() is called.
  void wait();
  void stop();

  const SceneStore& store() const { return store_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::shared_ptr<const AssetLibrary> library_;
  std::shared_ptr<const ParserBackend> external_;
  SceneStore store_;
};

}  // namespace scenesmith
