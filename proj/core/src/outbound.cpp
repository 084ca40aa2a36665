#include "scenesmith/outbound.hpp"

#include <httplib.h>

#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

namespace scenesmith {

namespace {

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw BackendError("BackendUnavailable", "malformed endpoint URL", url);
  const std::string scheme = url.substr(0, scheme_end);
  if (scheme != "http") throw BackendError("BackendUnavailable", "only http:// endpoints are supported", url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

std::string_view to_string(OutboundMode m) {
  switch (m) {
    case OutboundMode::kLive: return "live";
    case OutboundMode::kRecord: return "record";
    case OutboundMode::kReplay: return "replay";
  }
  return "replay";
}

std::optional<OutboundMode> outbound_mode_from_string(std::string_view s) {
  if (s == "live") return OutboundMode::kLive;
  if (s == "record") return OutboundMode::kRecord;
  if (s == "replay") return OutboundMode::kReplay;
  return std::nullopt;
}

nlohmann::json to_json(const Fixture& f) {
  return {{"request_hash", f.request_hash}, {"prompt", f.prompt}, {"reply", f.reply}, {"timestamp", f.timestamp}};
}

std::string FixtureStore::request_hash(std::string_view client, std::string_view prompt) {
  std::string key(client);
  key += '\n';
  key += prompt;
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(key)));
  return buf;
}

std::optional<Fixture> FixtureStore::find(const std::string& hash) const {
  std::lock_guard lock(mu_);
  std::ifstream in(dir_ / (hash + ".json"), std::ios::binary);
  if (!in) return std::nullopt;
  const auto doc = nlohmann::json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) return std::nullopt;
  Fixture f;
  f.request_hash = doc.value("request_hash", hash);
  f.prompt = doc.value("prompt", std::string());
  f.reply = doc.value("reply", std::string());
  f.timestamp = doc.value("timestamp", std::string());
  return f;
}

void FixtureStore::put(const Fixture& f) const {
  std::lock_guard lock(mu_);
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  std::ofstream out(dir_ / (f.request_hash + ".json"), std::ios::binary | std::ios::trunc);
  if (!out) throw BackendError("FixtureWrite", "cannot write fixture", (dir_ / f.request_hash).string());
  out << to_json(f).dump(2) << "\n";
  if (!out) throw BackendError("FixtureWrite", "cannot write fixture", (dir_ / f.request_hash).string());
}

std::string HttplibTransport::post_json(const std::string& url, const std::string& body,
                                        std::chrono::milliseconds timeout) const {
  const SplitUrl u = split_url(url);
  httplib::Client client(u.origin);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  auto res = client.Post(u.path, body, "application/json");
  if (!res) {
    throw BackendError("BackendUnavailable", "request to " + url + " failed: " + httplib::to_string(res.error()), url);
  }
  if (res->status < 200 || res->status >= 300) {
    throw BackendError("BackendUnavailable", "endpoint returned HTTP " + std::to_string(res->status), url);
  }
  return res->body;
}

std::string OutboundClient::call(const std::string& prompt, const LiveCall& live) const {
  const std::string hash = FixtureStore::request_hash(client_, prompt);
  if (mode_ == OutboundMode::kReplay) {
    if (fixtures_) {
      if (auto f = fixtures_->find(hash)) return f->reply;
    }
    throw BackendError("FixtureMiss", "no recorded " + client_ + " exchange for this request", hash);
  }
  std::string reply;
  try {
    reply = live(prompt);
  } catch (const BackendError& e) {
    if (e.code() != "BackendUnavailable") throw;
    reply = live(prompt);
  }
  if (mode_ == OutboundMode::kRecord && fixtures_) fixtures_->put({hash, prompt, reply, utc_now()});
  return reply;
}

std::string HttpChatBackend::complete(const std::string& prompt) const {
  return outbound_.call(prompt, [this](const std::string& p) {
    const nlohmann::json body = {{"model", endpoint_.model},
                                 {"temperature", 0},
                                 {"messages", {{{"role", "user"}, {"content", p}}}}};
    const std::string raw = transport_->post_json(endpoint_.url, body.dump(), endpoint_.timeout);
    const auto doc = nlohmann::json::parse(raw, nullptr, false);
    try {
      return doc.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception&) {
      throw BackendError("BadBackendReply", "chat reply has no choices[0].message.content", raw.substr(0, 200));
    }
  });
}

std::vector<float> HttpEmbedder::embed(std::string_view text) const {
  std::string reply;
  try {
    reply = outbound_.call(std::string(text), [this](const std::string& p) {
      const nlohmann::json body = {{"model", endpoint_.model}, {"input", p}};
      const auto doc = nlohmann::json::parse(transport_->post_json(endpoint_.url, body.dump(), endpoint_.timeout),
                                             nullptr, false);
      if (doc.is_object() && doc.contains("data")) return doc["data"].at(0).at("embedding").dump();
      if (doc.is_object() && doc.contains("embedding")) return doc["embedding"].dump();
      throw BackendError("BadBackendReply", "embedding reply has no vector");
    });
  } catch (const Error& e) {
    throw LibraryError("EmbedderUnavailable", e.what(), e.detail());
  } catch (const nlohmann::json::exception& e) {
    throw LibraryError("EmbedderUnavailable", e.what());
  }
  const auto arr = nlohmann::json::parse(reply, nullptr, false);
  if (!arr.is_array() || arr.size() != dim_) {
    throw LibraryError("EmbedderUnavailable", "embedding has the wrong shape", std::to_string(dim_));
  }
  std::vector<float> v;
  double norm = 0;
  for (const auto& x : arr) {
    if (!x.is_number()) throw LibraryError("EmbedderUnavailable", "embedding entries must be numbers");
    v.push_back(x.get<float>());
    norm += static_cast<double>(v.back()) * v.back();
  }
  norm = std::sqrt(norm);
  if (norm > 0) {
    for (auto& x : v) x = static_cast<float>(x / norm);
  }
  return v;
}

MeshGenerator make_http_mesh_generator(EndpointConfig endpoint, OutboundClient outbound,
                                       std::shared_ptr<const HttpTransport> transport) {
  return [endpoint = std::move(endpoint), outbound = std::move(outbound),
          transport = std::move(transport)](const std::string& prompt) {
    const std::string body = outbound.call(prompt, [&](const std::string& p) {
      return transport->post_json(endpoint.url, nlohmann::json{{"prompt", p}}.dump(), endpoint.timeout);
    });
    const auto start = body.find_first_not_of(" \t\r\n");
    if (start != std::string::npos && body.compare(start, 3, "ply") == 0) return parse_ply_ascii(body);
    return parse_obj(body);
  };
}

}  // namespace scenesmith
