#include "scenesmith/asset_library.hpp"

#include <benchmark/benchmark.h>

using namespace scenesmith;

namespace {

const AssetLibrary& library() {
  static const AssetLibrary lib = AssetLibrary::load(std::string(SCENESMITH_BENCH_DATA) + "/library/manifest.json",
                                                     std::make_shared<HashingEmbedder>());
  return lib;
}

void BM_HashingEmbed(benchmark::State& state) {
  const HashingEmbedder e;
  for (auto _ : state) benchmark::DoNotOptimize(e.embed("a small wooden side table with a drawer"));
}
BENCHMARK(BM_HashingEmbed);

void BM_Search(benchmark::State& state) {
  const auto& lib = library();
  for (auto _ : state) benchmark::DoNotOptimize(lib.search("vase with a wide base", static_cast<std::size_t>(state.range(0))));
}
BENCHMARK(BM_Search)->Arg(1)->Arg(10);

}  // namespace
