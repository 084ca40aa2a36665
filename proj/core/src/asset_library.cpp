#include "scenesmith/asset_library.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>

namespace scenesmith {

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis) {
  std::uint64_t h = basis;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

std::vector<float> HashingEmbedder::embed(std::string_view text) const {
  constexpr std::uint64_t kSignBasis = 0x84222325cbf29ce4ULL;
  const auto tokens = tokenize(text);
  if (tokens.empty()) throw LibraryError("NoTokens", "text has no alphanumeric tokens");
  std::vector<double> acc(dim_, 0.0);
  for (const auto& t : tokens) {
    const auto bucket = fnv1a64(t) % dim_;
    acc[bucket] += (fnv1a64(t, kSignBasis) & 1U) ? 1.0 : -1.0;
  }
  double norm = 0;
  for (double v : acc) norm += v * v;
  norm = std::sqrt(norm);
  std::vector<float> out(dim_, 0.0f);
  if (norm == 0) {
    // Every token cancelled out; fall back to the first token's bucket.
    out[fnv1a64(tokens.front()) % dim_] = 1.0f;
    return out;
  }
  for (std::size_t i = 0; i < dim_; ++i) out[i] = static_cast<float>(acc[i] / norm);
  return out;
}

namespace {

double dot(const std::vector<float>& a, const std::vector<float>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * b[i];
  return s;
}

void normalize(std::vector<float>& v) {
  double n = std::sqrt(dot(v, v));
  if (n == 0) throw LibraryError("EmbedderUnavailable", "embedder returned a zero vector");
  for (auto& x : v) x = static_cast<float>(x / n);
}

std::vector<float> checked_embed(const Embedder& e, std::string_view text) {
  std::vector<float> v;
  try {
    v = e.embed(text);
  } catch (const LibraryError&) {
    throw;
  } catch (const std::exception& ex) {
    throw LibraryError("EmbedderUnavailable", ex.what());
  }
  if (v.size() != e.dim()) throw LibraryError("EmbedderUnavailable", "embedding has the wrong dimension");
  normalize(v);
  return v;
}

}  // namespace

EmbeddingIndex EmbeddingIndex::build(const std::vector<Asset>& assets, std::shared_ptr<const Embedder> embedder) {
  EmbeddingIndex index;
  index.embedder_ = std::move(embedder);
  if (!index.embedder_) return index;
  index.dim_ = index.embedder_->dim();
  for (const auto& a : assets) {
    for (std::size_t i = 0; i < a.descriptions.size(); ++i) {
      index.entries_.push_back({checked_embed(*index.embedder_, a.descriptions[i]), a.asset_id, i});
    }
  }
  return index;
}

std::vector<SearchHit> EmbeddingIndex::search(std::string_view query, std::size_t k) const {
  if (entries_.empty()) throw LibraryError("EmptyIndex", "the asset index is empty");
  return search_vector(checked_embed(*embedder_, query), k);
}

std::vector<SearchHit> EmbeddingIndex::search_vector(const std::vector<float>& query, std::size_t k) const {
  if (entries_.empty()) throw LibraryError("EmptyIndex", "the asset index is empty");
  if (query.size() != dim_) throw LibraryError("EmbedderUnavailable", "query has the wrong dimension");
  std::map<std::string, double> best;
  for (const auto& e : entries_) {
    const double s = dot(query, e.vector);
    auto [it, inserted] = best.emplace(e.asset_id, s);
    if (!inserted) it->second = std::max(it->second, s);
  }
  std::vector<SearchHit> hits;
  hits.reserve(best.size());
  for (auto& [id, s] : best) hits.push_back({id, std::clamp(s, -1.0, 1.0)});
  std::stable_sort(hits.begin(), hits.end(), [](const SearchHit& a, const SearchHit& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.asset_id < b.asset_id;
  });
  if (hits.size() > k) hits.resize(k);
  return hits;
}

AssetLibrary::AssetLibrary(std::vector<Asset> assets, std::shared_ptr<const Embedder> embedder)
    : assets_(std::move(assets)) {
  for (const auto& a : assets_) {
    if (a.mesh.empty()) throw LibraryError("InvalidAsset", "asset mesh is empty", a.asset_id);
    if (a.descriptions.empty() || a.descriptions.size() > 6) {
      throw LibraryError("InvalidAsset", "assets carry between 1 and 6 descriptions", a.asset_id);
    }
  }
  index_ = EmbeddingIndex::build(assets_, std::move(embedder));
}

AssetLibrary AssetLibrary::load(const std::filesystem::path& manifest, std::shared_ptr<const Embedder> embedder) {
  std::ifstream f(manifest);
  if (!f) throw LibraryError("ManifestIo", "cannot open manifest", manifest.string());
  auto doc = nlohmann::json::parse(f, nullptr, false);
  if (doc.is_discarded() || !doc.is_object() || !doc.contains("assets") || !doc["assets"].is_array()) {
    throw LibraryError("CorruptManifest", "manifest must be an object with an 'assets' array", manifest.string());
  }
  const auto base = manifest.parent_path();
  std::vector<Asset> assets;
  try {
    for (const auto& j : doc["assets"]) {
      Asset a;
      a.asset_id = j.at("asset_id").get<std::string>();
      a.object_type = j.at("object_type").get<std::string>();
      a.descriptions = j.at("descriptions").get<std::vector<std::string>>();
      a.default_extents = vec_from_array(j.at("default_extents"));
      a.material = j.value("material", catalog_lookup(a.object_type).material);
      const auto mesh = j.at("mesh").get<std::string>();
      if (mesh.rfind("primitive:", 0) == 0) {
        auto kind = primitive_from_string(mesh.substr(10));
        if (!kind) throw LibraryError("CorruptManifest", "unknown primitive", mesh);
        a.mesh = make_primitive(*kind, a.default_extents);
      } else {
        a.mesh = read_mesh_file(base / mesh);
      }
      assets.push_back(std::move(a));
    }
  } catch (const nlohmann::json::exception& e) {
    throw LibraryError("CorruptManifest", e.what(), manifest.string());
  } catch (const std::invalid_argument& e) {
    throw LibraryError("CorruptManifest", e.what(), manifest.string());
  }
  return AssetLibrary(std::move(assets), std::move(embedder));
}

const Asset* AssetLibrary::find(std::string_view asset_id) const {
  for (const auto& a : assets_) {
    if (a.asset_id == asset_id) return &a;
  }
  return nullptr;
}

Vec3 AssetLibrary::default_extents(std::string_view asset_id, std::string_view object_type) const {
  if (const Asset* a = find(asset_id)) return a->default_extents;
  return catalog_lookup(object_type).extents;
}

std::string AssetLibrary::default_material(std::string_view asset_id, std::string_view object_type) const {
  if (const Asset* a = find(asset_id)) return a->material;
  return catalog_lookup(object_type).material;
}

Mesh AssetLibrary::mesh_for(std::string_view asset_id, std::string_view object_type, const Vec3& extents) const {
  if (const Asset* a = find(asset_id)) return fit_to_extents(a->mesh, extents);
  if (asset_id.rfind("generate:", 0) == 0 && generator_) {
    try {
      Mesh m = generator_(std::string(object_type));
      if (!m.empty()) return fit_to_extents(m, extents);
    } catch (const std::exception&) {
      // fall through to the primitive catalog
    }
  }
  return make_primitive(catalog_lookup(object_type).kind, extents);
}

}  // namespace scenesmith
