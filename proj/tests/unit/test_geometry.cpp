#include "oracles.hpp"

#include "scenesmith/asset_library.hpp"
#include "scenesmith/geometry.hpp"
#include "scenesmith/scene_engine.hpp"

#include <gtest/gtest.h>

#include <random>
#include <thread>

using namespace scenesmith;

namespace {

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

std::vector<Mesh> meshes_of(const std::vector<BvhInput>& in) {
  std::vector<Mesh> out;
  for (const auto& o : in) out.push_back(o.mesh);
  return out;
}

Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0, 1);
  Vec3 v(n(rng), n(rng), n(rng));
  return v.normalized();
}

}  // namespace

TEST(Primitives, AreValidClosedAndSpanTheirExtents) {
  const Vec3 e(1.2, 0.8, 0.75);
  for (auto kind : {PrimitiveKind::kBox, PrimitiveKind::kCylinder, PrimitiveKind::kSphere, PrimitiveKind::kWedge}) {
    const Mesh m = make_primitive(kind, e, 24);
    EXPECT_NO_THROW(validate_mesh(m));
    EXPECT_TRUE(is_closed(m)) << to_string(kind);
    const Aabb b = mesh_bounds(m);
    EXPECT_NEAR((b.size() - e).norm(), 0.0, 1e-9) << to_string(kind);
    EXPECT_NEAR(b.center().norm(), 0.0, 1e-9);
    EXPECT_GT(mesh_volume(m), 0.0) << to_string(kind);
  }
  EXPECT_NEAR(mesh_volume(make_primitive(PrimitiveKind::kBox, e)), 1.2 * 0.8 * 0.75, 1e-9);
  EXPECT_NEAR(mesh_volume(make_primitive(PrimitiveKind::kWedge, e)), 1.2 * 0.8 * 0.75 / 2, 1e-9);
  const Mesh plane = make_primitive(PrimitiveKind::kPlane, Vec3(2, 3, 1));
  EXPECT_FALSE(is_closed(plane));
  EXPECT_EQ(mesh_bounds(plane).size().z(), 0.0);
}

TEST(Primitives, RejectBadArguments) {
  EXPECT_THROW(make_primitive(PrimitiveKind::kBox, Vec3(1, 0, 1)), LibraryError);
  EXPECT_THROW(make_primitive(PrimitiveKind::kCylinder, Vec3(1, 1, 1), 6), LibraryError);
}

TEST(Mesh, ValidateCatchesBrokenMeshes) {
  Mesh m = make_primitive(PrimitiveKind::kBox, Vec3(1, 1, 1));
  Mesh bad_index = m;
  bad_index.faces[0][0] = 999;
  EXPECT_THROW(validate_mesh(bad_index), GeometryError);
  Mesh bad_normal = m;
  bad_normal.normals[0] *= 3;
  EXPECT_THROW(validate_mesh(bad_normal), GeometryError);
  Mesh nan = m;
  nan.vertices[1].x() = std::nan("");
  EXPECT_THROW(validate_mesh(nan), GeometryError);
  Mesh degenerate = m;
  degenerate.faces[0] = {0, 0, 1};
  EXPECT_THROW(validate_mesh(degenerate), GeometryError);
}

TEST(Mesh, TransformedKeepsNormalsUnitAndOutward) {
  std::mt19937_64 rng(3);
  const Mesh m = make_primitive(PrimitiveKind::kSphere, Vec3(1, 2, 3), 16);
  const Mat3 lin = rotation_from_euler_deg(Vec3(10, 20, 30)) * Vec3(2, 0.5, 1).asDiagonal();
  const Mesh t = transformed(m, lin, Vec3(1, -1, 2));
  EXPECT_NO_THROW(validate_mesh(t));
  EXPECT_NEAR(mesh_volume(t), mesh_volume(m) * lin.determinant(), 1e-9);
  const Vec3 c = mesh_bounds(t).center();
  for (std::size_t i = 0; i < t.vertices.size(); ++i) EXPECT_GT(t.normals[i].dot(t.vertices[i] - c), -1e-9);
}

TEST(Triangle, IntersectAgreesWithPlaneOracle) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2, 2);
  int hits = 0;
  for (int i = 0; i < 20000; ++i) {
    const Vec3 a(u(rng), u(rng), u(rng)), b(u(rng), u(rng), u(rng)), c(u(rng), u(rng), u(rng));
    const Vec3 o(u(rng), u(rng), u(rng));
    const Vec3 d = random_unit(rng);
    const auto got = intersect_triangle(o, d, a, b, c, 1e-7, 1e9);
    const auto want = oracle::ray_triangle(o, d, a, b, c, 1e-7, 1e9);
    // Grazing rays near an edge may legitimately differ; skip those.
    const Vec3 n = (b - a).cross(c - a).normalized();
    if (std::abs(n.dot(d)) < 1e-6) continue;
    if (got.has_value() != want.has_value()) {
      const Vec3 p = o + (got ? *got : *want) * d;
      EXPECT_LT(oracle::point_triangle_distance(p, a, b, c), 1e-9);
      const double edge = std::min({oracle::point_triangle_distance(p, a, b, a), oracle::point_triangle_distance(p, b, c, b),
                                    oracle::point_triangle_distance(p, c, a, c)});
      EXPECT_LT(edge, 1e-7);
      continue;
    }
    if (got) {
      ++hits;
      EXPECT_NEAR(*got, *want, 1e-9);
    }
  }
  EXPECT_GT(hits, 500);
}

TEST(Triangle, ClosestPointMatchesDistanceOracle) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int i = 0; i < 20000; ++i) {
    const Vec3 a(u(rng), u(rng), u(rng)), b(u(rng), u(rng), u(rng)), c(u(rng), u(rng), u(rng));
    const Vec3 p(u(rng), u(rng), u(rng));
    const Vec3 q = closest_point_on_triangle(p, a, b, c);
    EXPECT_NEAR((p - q).norm(), oracle::point_triangle_distance(p, a, b, c), 1e-9);
    EXPECT_LT(oracle::point_triangle_distance(q, a, b, c), 1e-9);
  }
}

TEST(Bvh, EmptySceneIsAnError) { EXPECT_THROW(Bvh::build({}), GeometryError); }

TEST(Bvh, StructureCoversEveryTriangleOnce) {
  std::mt19937_64 rng(1);
  const Bvh bvh = Bvh::build(random_scene(rng, 12));
  std::size_t total = 0;
  for (const auto& o : bvh.objects()) total += o.mesh.faces.size();
  EXPECT_EQ(bvh.primitives().size(), total);
  std::vector<int> seen(total, 0);
  std::size_t offset = 0;
  std::vector<std::size_t> base;
  for (const auto& o : bvh.objects()) {
    base.push_back(offset);
    offset += o.mesh.faces.size();
  }
  for (const auto& node : bvh.nodes()) {
    if (!node.is_leaf()) {
      EXPECT_TRUE(node.bounds.contains(bvh.nodes()[node.left].bounds, 1e-12));
      EXPECT_TRUE(node.bounds.contains(bvh.nodes()[node.right].bounds, 1e-12));
      continue;
    }
    EXPECT_LE(node.count, Bvh::kLeafSize);
    for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
      const auto& p = bvh.primitives()[i];
      ++seen[base[p.object] + p.face];
      const auto& m = bvh.objects()[p.object].mesh;
      for (auto v : m.faces[p.face]) EXPECT_TRUE(node.bounds.contains(Aabb{m.vertices[v], m.vertices[v]}, 1e-12));
    }
  }
  for (int s : seen) EXPECT_EQ(s, 1);
}

TEST(Bvh, RayCastMatchesBruteForceNearestHit) {
  std::mt19937_64 rng(2);
  const auto scene = random_scene(rng, 20);
  const auto meshes = meshes_of(scene);
  const Bvh bvh = Bvh::build(scene);
  std::uniform_real_distribution<double> u(-6, 6);
  int hits = 0;
  for (int i = 0; i < 3000; ++i) {
    const Vec3 o(u(rng), u(rng), u(rng));
    const Vec3 d = random_unit(rng);
    const auto got = bvh.ray_cast(o, d);
    const auto want = oracle::nearest_hit(meshes, o, d);
    ASSERT_EQ(got.has_value(), want.has_value()) << i;
    if (!got) continue;
    ++hits;
    EXPECT_NEAR(got->t, want->t, 1e-6);
    EXPECT_NEAR((got->point - (o + want->t * d)).norm(), 0.0, 1e-6);
    EXPECT_EQ(got->object_name, scene[want->object].name);
  }
  EXPECT_GT(hits, 150);
}

TEST(Bvh, RayCastRespectsTMax) {
  Mesh box = make_primitive(PrimitiveKind::kBox, Vec3(1, 1, 1));
  const Bvh bvh = Bvh::build({{"box", transformed(box, Mat3::Identity(), Vec3(5, 0, 0))}});
  EXPECT_TRUE(bvh.ray_cast(Vec3::Zero(), Vec3::UnitX()));
  EXPECT_NEAR(bvh.ray_cast(Vec3::Zero(), Vec3::UnitX())->t, 4.5, 1e-12);
  EXPECT_FALSE(bvh.ray_cast(Vec3::Zero(), Vec3::UnitX(), 4.0));
  EXPECT_FALSE(bvh.ray_cast(Vec3::Zero(), -Vec3::UnitX()));
}

TEST(Bvh, ContainmentMatchesWindingNumber) {
  std::mt19937_64 rng(4);
  const auto scene = random_scene(rng, 10);
  const Bvh bvh = Bvh::build(scene);
  std::uniform_real_distribution<double> u(-5, 5);
  int inside = 0, checked = 0;
  while (checked < 1500) {
    const Vec3 p(u(rng), u(rng), u(rng));
    if (oracle::min_distance(meshes_of(scene), p) <= 1e-4) continue;
    ++checked;
    bool want = false;
    for (std::uint32_t k = 0; k < scene.size(); ++k) {
      const double w = oracle::winding_number(scene[k].mesh, p);
      const bool in = w > 0.5;
      EXPECT_EQ(bvh.contains_point(p, k), in);
      want = want || in;
    }
    EXPECT_EQ(bvh.contains_point(p), want);
    inside += want;
  }
  EXPECT_GT(inside, 10);
}

TEST(Bvh, OpenMeshesNeverContainPoints) {
  const Mesh plane = make_primitive(PrimitiveKind::kPlane, Vec3(4, 4, 0));
  const Bvh bvh = Bvh::build({{"rug", plane}});
  EXPECT_FALSE(bvh.object_closed(0));
  EXPECT_FALSE(bvh.contains_point(Vec3(0, 0, -0.5)));
  EXPECT_FALSE(bvh.contains_point(Vec3(0, 0, 0.5)));
}

TEST(Bvh, MinDistanceAndFreeSpaceMatchBruteForce) {
  std::mt19937_64 rng(12);
  const auto scene = random_scene(rng, 10);
  const auto meshes = meshes_of(scene);
  const Bvh bvh = Bvh::build(scene);
  std::uniform_real_distribution<double> u(-6, 6), cl(0.0, 0.8);
  for (int i = 0; i < 400; ++i) {
    const Vec3 p(u(rng), u(rng), u(rng));
    const double want = oracle::min_distance(meshes, p);
    EXPECT_NEAR(bvh.min_distance(p), want, 1e-9);
    const double clearance = cl(rng);
    if (std::abs(want - clearance) < 1e-9) continue;
    bool in_closed = false;
    for (const auto& m : meshes) in_closed = in_closed || oracle::winding_number(m, p) > 0.5;
    EXPECT_EQ(bvh.is_free_space(p, clearance), !in_closed && want > clearance);
  }
  EXPECT_EQ(bvh.min_distance(Vec3(100, 100, 100), 1.0), std::numeric_limits<double>::infinity());
}

TEST(Bvh, ConcurrentQueriesAgree) {
  std::mt19937_64 rng(13);
  const Bvh bvh = Bvh::build(random_scene(rng, 15));
  std::vector<Vec3> origins, dirs;
  std::uniform_real_distribution<double> u(-6, 6);
  for (int i = 0; i < 400; ++i) {
    origins.emplace_back(u(rng), u(rng), u(rng));
    dirs.push_back(random_unit(rng));
  }
  std::vector<double> serial;
  for (std::size_t i = 0; i < origins.size(); ++i) {
    auto h = bvh.ray_cast(origins[i], dirs[i]);
    serial.push_back(h ? h->t : -1);
  }
  std::vector<std::vector<double>> par(4, std::vector<double>(origins.size()));
  std::vector<std::thread> threads;
  for (std::size_t t = 0; t < par.size(); ++t) {
    threads.emplace_back([&, t] {
      for (std::size_t i = 0; i < origins.size(); ++i) {
        auto h = bvh.ray_cast(origins[i], dirs[i]);
        par[t][i] = h ? h->t : -1;
      }
    });
  }
  for (auto& th : threads) th.join();
  for (const auto& p : par) EXPECT_EQ(p, serial);
}

TEST(Bvh, HandBuiltBoxAgreesWithWindingOracle) {
  std::mt19937_64 rng(14);
  for (int i = 0; i < 20; ++i) {
    const Mesh box = oracle::random_box(rng, 2.0);
    EXPECT_NO_THROW(validate_mesh(box));
    EXPECT_TRUE(is_closed(box));
    const Bvh bvh = Bvh::build({{"b", box}});
    const Aabb bb = mesh_bounds(box);
    EXPECT_TRUE(bvh.contains_point(bb.center()));
    EXPECT_NEAR(oracle::winding_number(box, bb.center()), 1.0, 1e-9);
    EXPECT_FALSE(bvh.contains_point(bb.max + Vec3::Constant(0.01)));
  }
}
