#pragma once

#include "scenesmith/asset_library.hpp"
#include "scenesmith/command_pipeline.hpp"

#include <chrono>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

namespace scenesmith {

enum class OutboundMode { kLive, kRecord, kReplay };

std::string_view to_string(OutboundMode m);
std::optional<OutboundMode> outbound_mode_from_string(std::string_view s);

// One recorded exchange, stored as <dir>/<request_hash>.json.
struct Fixture {
  std::string request_hash;
  std::string prompt;
  std::string reply;
  std::string timestamp;  // ISO 8601 UTC
};

nlohmann::json to_json(const Fixture& f);

class FixtureStore {
 public:
  explicit FixtureStore(std::filesystem::path dir) : dir_(std::move(dir)) {}

  // 16 hex digits of FNV-1a over "<client>\n<prompt>".
  static std::string request_hash(std::string_view client, std::string_view prompt);

  std::optional<Fixture> find(const std::string& hash) const;
  // Throws BackendError("FixtureWrite").
  void put(const Fixture& f) const;
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  mutable std::mutex mu_;
};

// POST of a JSON body; returns the response body. Throws
// BackendError("BackendUnavailable") on transport errors and non-2xx.
class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual std::string post_json(const std::string& url, const std::string& body,
                                std::chrono::milliseconds timeout) const = 0;
};

// Plain-HTTP transport; https URLs are rejected.
class HttplibTransport final : public HttpTransport {
 public:
  std::string post_json(const std::string& url, const std::string& body,
                        std::chrono::milliseconds timeout) const override;
};

// live: one retry on BackendUnavailable. record: live, then persist.
// replay: fixture lookup, BackendError("FixtureMiss", detail = hash).
class OutboundClient {
 public:
  using LiveCall = std::function<std::string(const std::string& prompt)>;

  OutboundClient(std::string client, OutboundMode mode, std::shared_ptr<const FixtureStore> fixtures)
      : client_(std::move(client)), mode_(mode), fixtures_(std::move(fixtures)) {}

  std::string call(const std::string& prompt, const LiveCall& live) const;

  const std::string& client() const { return client_; }
  OutboundMode mode() const { return mode_; }

 private:
  std::string client_;
  OutboundMode mode_;
  std::shared_ptr<const FixtureStore> fixtures_;
};

struct EndpointConfig {
  std::string url;
  std::string model;
  std::chrono::milliseconds timeout{60000};
};

// Chat-completion exchange: {"model","temperature":0,"messages":[{"role":"user",
// "content":prompt}]} -> choices[0].message.content.
class HttpChatBackend final : public ChatBackend {
 public:
  HttpChatBackend(EndpointConfig endpoint, OutboundClient outbound,
                  std::shared_ptr<const HttpTransport> transport = std::make_shared<HttplibTransport>())
      : endpoint_(std::move(endpoint)), outbound_(std::move(outbound)), transport_(std::move(transport)) {}
  std::string complete(const std::string& prompt) const override;

 private:
  EndpointConfig endpoint_;
  OutboundClient outbound_;
  std::shared_ptr<const HttpTransport> transport_;
};

// {"model","input":text} -> {"data":[{"embedding":[...]}]} or {"embedding":[...]}.
// The stored reply is the JSON float array. Vectors are L2-normalized.
class HttpEmbedder final : public Embedder {
 public:
  HttpEmbedder(std::size_t dim, EndpointConfig endpoint, OutboundClient outbound,
               std::shared_ptr<const HttpTransport> transport = std::make_shared<HttplibTransport>())
      : dim_(dim), endpoint_(std::move(endpoint)), outbound_(std::move(outbound)), transport_(std::move(transport)) {}
  std::size_t dim() const override { return dim_; }
  std::vector<float> embed(std::string_view text) const override;

 private:
  std::size_t dim_;
  EndpointConfig endpoint_;
  OutboundClient outbound_;
  std::shared_ptr<const HttpTransport> transport_;
};

// {"prompt": text} -> ASCII PLY or OBJ body.
MeshGenerator make_http_mesh_generator(EndpointConfig endpoint, OutboundClient outbound,
                                       std::shared_ptr<const HttpTransport> transport = std::make_shared<HttplibTransport>());

}  // namespace scenesmith
