#include "harness.hpp"
#include "oracles.hpp"

#include "scenesmith/asset_library.hpp"
#include "scenesmith/materials.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <random>

using namespace scenesmith;

namespace {

double cosine(const std::vector<float>& a, const std::vector<float>& b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  return dot / std::sqrt(na * nb);
}

Asset asset(const std::string& id, std::vector<std::string> descriptions) {
  Asset a;
  a.asset_id = id;
  a.object_type = id;
  a.mesh = make_primitive(PrimitiveKind::kBox, Vec3(1, 1, 1));
  a.descriptions = std::move(descriptions);
  return a;
}

}  // namespace

TEST(HashingEmbedder, IsDeterministicNormalizedAndTokenBased) {
  const HashingEmbedder e(384);
  const auto a = e.embed("A wooden Dining Table!");
  EXPECT_EQ(a.size(), 384u);
  double n = 0;
  for (float x : a) n += static_cast<double>(x) * x;
  EXPECT_NEAR(n, 1.0, 1e-6);
  EXPECT_EQ(a, e.embed("a wooden dining table"));
  EXPECT_EQ(tokenize("Hello, World-42"), (std::vector<std::string>{"hello", "world", "42"}));
  EXPECT_THROW(e.embed("!!! ---"), LibraryError);
}

TEST(Fnv1a, MatchesReferenceVectors) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ULL);
  EXPECT_EQ(fnv1a64("scenesmith"), oracle::fnv1a("scenesmith"));
}

TEST(EmbeddingIndex, EmptyIndexIsAnError) {
  AssetLibrary lib;
  EXPECT_THROW(lib.search("chair", 1), LibraryError);
}

TEST(EmbeddingIndex, TiesBreakOnAssetIdAndKLimitsResults) {
  AssetLibrary lib({asset("b_chair", {"red chair"}), asset("a_chair", {"red chair"}), asset("lamp", {"desk lamp"})},
                   std::make_shared<HashingEmbedder>());
  const auto hits = lib.search("red chair", 2);
  ASSERT_EQ(hits.size(), 2u);
  EXPECT_EQ(hits[0].asset_id, "a_chair");
  EXPECT_EQ(hits[1].asset_id, "b_chair");
  EXPECT_NEAR(hits[0].score, 1.0, 1e-6);
  EXPECT_EQ(lib.search("red chair", 10).size(), 3u);
}

TEST(AssetLibrary, RejectsAssetsWithoutDescriptionsOrMesh) {
  auto emb = std::make_shared<HashingEmbedder>();
  EXPECT_THROW(AssetLibrary({asset("x", {})}, emb), LibraryError);
  Asset empty = asset("y", {"thing"});
  empty.mesh = Mesh{};
  EXPECT_THROW(AssetLibrary({empty}, emb), LibraryError);
  EXPECT_THROW(AssetLibrary({asset("z", {"1", "2", "3", "4", "5", "6", "7"})}, emb), LibraryError);
}

TEST(AssetLibrary, ManifestLoadsFiftyAssetsWithThreeToSixDescriptions) {
  const auto lib = harness::library();
  ASSERT_EQ(lib->assets().size(), 50u);
  for (const auto& a : lib->assets()) {
    EXPECT_GE(a.descriptions.size(), 3u) << a.asset_id;
    EXPECT_LE(a.descriptions.size(), 6u) << a.asset_id;
    EXPECT_FALSE(a.mesh.empty());
  }
  ASSERT_NE(lib->find("vase_01"), nullptr);
  ASSERT_NE(lib->find("bowl_01"), nullptr);
  EXPECT_EQ(lib->find("nope"), nullptr);
}

TEST(AssetLibrary, EveryStoredDescriptionFindsItsOwner) {
  const auto lib = harness::library();
  for (const auto& a : lib->assets()) {
    for (const auto& d : a.descriptions) {
      const auto hits = lib->search(d, 1);
      ASSERT_EQ(hits.size(), 1u);
      EXPECT_EQ(hits[0].asset_id, a.asset_id) << d;
    }
  }
}

TEST(AssetLibrary, TopOneEqualsBruteForceArgmax) {
  const auto lib = harness::library();
  const HashingEmbedder emb;
  std::vector<std::string> vocab;
  for (const auto& a : lib->assets()) {
    for (const auto& d : a.descriptions) {
      for (auto& t : tokenize(d)) vocab.push_back(t);
    }
  }
  std::mt19937_64 rng(21);
  for (int q = 0; q < 200; ++q) {
    std::string query;
    const int words = std::uniform_int_distribution<int>(1, 4)(rng);
    for (int w = 0; w < words; ++w) query += vocab[rng() % vocab.size()] + " ";
    const auto qv = emb.embed(query);
    double best = -2;
    std::string best_id;
    for (const auto& a : lib->assets()) {
      for (const auto& d : a.descriptions) {
        const double s = cosine(qv, emb.embed(d));
        if (s > best + 1e-12 || (std::abs(s - best) <= 1e-12 && a.asset_id < best_id)) {
          best = s;
          best_id = a.asset_id;
        }
      }
    }
    const auto hits = lib->search(query, 1);
    ASSERT_EQ(hits.size(), 1u);
    EXPECT_NEAR(hits[0].score, best, 1e-5) << query;
    if (hits[0].asset_id != best_id) {
      // Only acceptable when the two scores tie within float precision.
      EXPECT_NEAR(hits[0].score, best, 1e-6) << query;
    }
  }
}

TEST(AssetLibrary, ManifestErrors) {
  oracle::TempDir dir("manifest");
  auto emb = std::make_shared<HashingEmbedder>();
  EXPECT_THROW(AssetLibrary::load(dir.path() / "missing.json", emb), LibraryError);
  {
    std::ofstream(dir.path() / "bad.json") << R"({"schema_version":1})";
  }
  EXPECT_THROW(AssetLibrary::load(dir.path() / "bad.json", emb), LibraryError);
  {
    std::ofstream(dir.path() / "prim.json")
        << R"({"schema_version":1,"assets":[{"asset_id":"a","object_type":"a","mesh":"primitive:blob","descriptions":["x"],"default_extents":[1,1,1]}]})";
  }
  EXPECT_THROW(AssetLibrary::load(dir.path() / "prim.json", emb), LibraryError);
}

TEST(AssetLibrary, MeshForFitsRequestedExtents) {
  const auto lib = harness::library();
  for (const std::string id : {"vase_01", "bowl_01", "primitive:table", "primitive:unknown_gizmo"}) {
    const Mesh m = lib->mesh_for(id, "thing", Vec3(0.3, 0.4, 0.5));
    EXPECT_NO_THROW(validate_mesh(m)) << id;
    const Aabb b = mesh_bounds(m);
    EXPECT_NEAR((b.size() - Vec3(0.3, 0.4, 0.5)).norm(), 0.0, 1e-9) << id;
    EXPECT_NEAR(b.center().norm(), 0.0, 1e-9) << id;
  }
}

TEST(AssetLibrary, GeneratorFailureFallsBackToCatalog) {
  AssetLibrary lib;
  lib.set_mesh_generator([](const std::string&) -> Mesh { throw BackendError("BackendUnavailable", "down"); });
  const Mesh m = lib.mesh_for("generate:robot_arm", "robot_arm", Vec3(0.5, 0.5, 1));
  EXPECT_FALSE(m.empty());
  AssetLibrary gen;
  gen.set_mesh_generator([](const std::string&) { return make_primitive(PrimitiveKind::kSphere, Vec3(2, 2, 2)); });
  const Mesh s = gen.mesh_for("generate:orb", "orb", Vec3(1, 1, 1));
  EXPECT_NEAR((mesh_bounds(s).size() - Vec3(1, 1, 1)).norm(), 0.0, 1e-9);
}

TEST(Catalog, UnknownTypesFallBackToConcreteBox) {
  const auto e = catalog_lookup("flux_capacitor");
  EXPECT_EQ(e.kind, PrimitiveKind::kBox);
  EXPECT_EQ(e.extents, Vec3::Constant(0.5));
  EXPECT_EQ(e.material, "itu_concrete");
  EXPECT_EQ(catalog_lookup("table").material.rfind("itu_", 0), 0u);
}

TEST(MeshIo, ParsesPlyAndObj) {
  const Mesh ply = parse_ply_ascii(
      "ply\nformat ascii 1.0\nelement vertex 4\nproperty float x\nproperty float y\nproperty float z\n"
      "element face 1\nproperty list uchar int vertex_indices\nend_header\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n");
  EXPECT_EQ(ply.faces.size(), 2u);
  EXPECT_NO_THROW(validate_mesh(ply));
  const Mesh obj = parse_obj("# quad\nv 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n");
  EXPECT_EQ(obj.faces.size(), 2u);
  const Mesh slashes = parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nvn 0 0 1\nf 1//1 2//1 3//1\n");
  EXPECT_EQ(slashes.faces.size(), 1u);
  EXPECT_THROW(parse_ply_ascii("ply\nformat binary_little_endian 1.0\nend_header\n"), LibraryError);
  EXPECT_THROW(parse_obj("v 0 0 0\nf 1 2 3\n"), LibraryError);
}

TEST(Materials, CanonicalFormsAndLookup) {
  const auto table = MaterialTable::builtin();
  EXPECT_EQ(table.names().size(), 10u);
  EXPECT_EQ(canonical_material_form("itu_wood.001"), "itu_wood");
  EXPECT_EQ(canonical_material_form("Wood"), "itu_wood");
  EXPECT_EQ(canonical_material_form("ITU_Metal.012"), "itu_metal");
  EXPECT_EQ(normalize_material_name("itu_wood.001", table), "itu_wood");
  EXPECT_EQ(normalize_material_name("marble", table), "itu_marble");
  EXPECT_THROW(normalize_material_name("unobtainium", table), ExportError);
  MaterialTable t = table;
  EXPECT_THROW(t.set("wood", {0.1, 0.1, 0.1}), ExportError);
  EXPECT_THROW(t.set("itu_wood", {1.5, 0, 0}), ExportError);
  t.set("itu_carpet", {0.2, 0.3, 0.4});
  EXPECT_TRUE(t.contains("itu_carpet"));
}

TEST(Materials, OverridesFile) {
  oracle::TempDir dir("materials");
  {
    std::ofstream(dir.path() / "m.json") << R"({"itu_wood":[0.1,0.2,0.3],"itu_rubber":[0,0,0]})";
  }
  const auto t = MaterialTable::with_overrides(dir.path() / "m.json");
  EXPECT_EQ(t.rgb("itu_wood")[1], 0.2);
  EXPECT_TRUE(t.contains("itu_rubber"));
  {
    std::ofstream(dir.path() / "bad.json") << R"({"itu_wood":[0.1,0.2]})";
  }
  EXPECT_THROW(MaterialTable::with_overrides(dir.path() / "bad.json"), ExportError);
}
