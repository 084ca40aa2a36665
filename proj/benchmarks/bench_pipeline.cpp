#include "scenesmith/command_pipeline.hpp"
#include "scenesmith/dataset_forge.hpp"
#include "scenesmith/spatial_resolver.hpp"

#include <benchmark/benchmark.h>

using namespace scenesmith;

namespace {

void BM_GrammarParse(benchmark::State& state) {
  Scene s;
  s.setup_room(Vec3(6, 5, 3));
  const auto snap = s.snapshot();
  const GrammarParser p;
  for (auto _ : state) {
    benchmark::DoNotOptimize(parse_command(p, snap, "add a nightstand, then put a lamp on top of it"));
  }
}
BENCHMARK(BM_GrammarParse);

void BM_ExtractJson(benchmark::State& state) {
  std::string reply = "Here you go: [1] and then ";
  for (int i = 0; i < 50; ++i) reply += "[{\"action_type\": \"clear_scene\"}, ";
  reply += "[]" + std::string(50, ']');
  for (auto _ : state) benchmark::DoNotOptimize(extract_json_block(reply));
}
BENCHMARK(BM_ExtractJson);

void BM_ValidationPipeline(benchmark::State& state) {
  GenerationSpec spec;
  spec.n_samples = static_cast<std::size_t>(state.range(0));
  spec.seed = 9;
  const auto raw = generate(spec, TemplateGenerator(0.3));
  const GrammarSemanticValidator v;
  for (auto _ : state) benchmark::DoNotOptimize(run_validation(raw.samples, v));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ValidationPipeline)->Arg(100)->Arg(1000);

}  // namespace
