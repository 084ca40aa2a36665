#include "scenesmith/geometry.hpp"
#include "scenesmith/scene_engine.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace scenesmith;

namespace {

std::vector<BvhInput> scene_of(int n) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> pos(-10, 10), ext(0.2, 2.0), ang(-180, 180);
  std::vector<BvhInput> out;
  for (int i = 0; i < n; ++i) {
    const Mesh m = make_primitive(i % 2 ? PrimitiveKind::kSphere : PrimitiveKind::kBox, Vec3(ext(rng), ext(rng), ext(rng)), 16);
    out.push_back({"o" + std::to_string(i),
                   transformed(m, rotation_from_euler_deg(Vec3(0, 0, ang(rng))), Vec3(pos(rng), pos(rng), pos(rng)))});
  }
  return out;
}

void BM_BvhBuild(benchmark::State& state) {
  const auto scene = scene_of(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(Bvh::build(scene));
}
BENCHMARK(BM_BvhBuild)->Arg(10)->Arg(100)->Arg(1000);

void BM_RayCast(benchmark::State& state) {
  const Bvh bvh = Bvh::build(scene_of(static_cast<int>(state.range(0))));
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0, 1);
  for (auto _ : state) {
    const Vec3 d = Vec3(n(rng), n(rng), n(rng)).normalized();
    benchmark::DoNotOptimize(bvh.ray_cast(Vec3::Zero(), d));
  }
}
BENCHMARK(BM_RayCast)->Arg(10)->Arg(100)->Arg(1000);

void BM_IsFreeSpace(benchmark::State& state) {
  const Bvh bvh = Bvh::build(scene_of(200));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-10, 10);
  for (auto _ : state) benchmark::DoNotOptimize(bvh.is_free_space(Vec3(u(rng), u(rng), u(rng)), 0.1));
}
BENCHMARK(BM_IsFreeSpace);

}  // namespace
